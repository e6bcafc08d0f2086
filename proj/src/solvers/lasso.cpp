#include "blockinfer/solvers/lasso.hpp"

#include <algorithm>

namespace blockinfer {

namespace {

double gram_objective(const Matrix& gram, const Vector& corr, double target_ms, double tau,
                      const Vector& g) {
    return target_ms - 2.0 * g.dot(corr) + g.dot(gram * g) + tau * g.lpNorm<1>();
}

// grad = corr - gram * g  (half the negative gradient of the smooth part)
double kkt_violation(const Vector& grad, const Vector& g, double tau) {
    double worst = 0.0;
    for (Index l = 0; l < g.size(); ++l) {
        const double two = 2.0 * grad(l);
        double v;
        if (g(l) > 0.0)
            v = std::abs(two - tau);
        else if (g(l) < 0.0)
            v = std::abs(two + tau);
        else
            v = std::max(0.0, std::abs(two) - tau);
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

LassoResult lasso_cd_gram(const Matrix& gram, const Vector& corr, double target_ms, double tau,
                          double tol, int max_iter, bool record_trace) {
    const Index d = corr.size();
    LassoResult res;
    res.coefficients = Vector::Zero(d);
    Vector& g = res.coefficients;
    Vector grad = corr;
    const double half_tau = 0.5 * tau;

    auto update = [&](Index l) {
        const double a = gram(l, l);
        if (a <= 0.0) return 0.0;
        const double old = g(l);
        const double z = grad(l) + a * old;
        const double fresh = soft_threshold(z, half_tau) / a;
        const double delta = fresh - old;
        if (delta != 0.0) {
            g(l) = fresh;
            grad.noalias() -= gram.col(l) * delta;
        }
        return std::abs(delta) * std::sqrt(a);
    };

    std::vector<Index> active;
    while (res.sweeps < max_iter) {
        for (Index l = 0; l < d; ++l) update(l);
        ++res.sweeps;
        if (record_trace) res.trace.push_back(gram_objective(gram, corr, target_ms, tau, g));
        res.kkt_violation = kkt_violation(grad, g, tau);
        if (res.kkt_violation <= tol) {
            res.converged = true;
            break;
        }
        // Cycle over the current support until it settles before the next full sweep.
        active.clear();
        for (Index l = 0; l < d; ++l)
            if (g(l) != 0.0) active.push_back(l);
        for (int inner = 0; inner < 1000 && res.sweeps < max_iter; ++inner) {
            double change = 0.0;
            for (Index l : active) change = std::max(change, update(l));
            ++res.sweeps;
            if (record_trace) res.trace.push_back(gram_objective(gram, corr, target_ms, tau, g));
            if (change <= 0.1 * tol) break;
        }
    }
    if (!res.converged) res.kkt_violation = kkt_violation(grad, g, tau);
    res.objective = gram_objective(gram, corr, target_ms, tau, g);
    return res;
}

LassoResult lasso_cd(const LassoProblem& pr, bool record_trace) {
    const Index m = pr.design.rows();
    if (m < 1 || pr.design.cols() < 1 || pr.target.size() != m || pr.tau < 0.0 || pr.tol <= 0.0)
        throw std::invalid_argument("lasso_cd: invalid problem dimensions or parameters");
    const double inv_m = 1.0 / static_cast<double>(m);
    Matrix gram = (pr.design.transpose() * pr.design) * inv_m;
    Vector corr = (pr.design.transpose() * pr.target) * inv_m;
    const double ms = pr.target.squaredNorm() * inv_m;
    LassoResult res = lasso_cd_gram(gram, corr, ms, pr.tau, pr.tol, pr.max_iter, record_trace);
    res.objective = lasso_objective(pr.design, pr.target, res.coefficients, pr.tau);
    return res;
}

double lasso_objective(const Matrix& design, const Vector& target, const Vector& coef, double tau) {
    return (target - design * coef).squaredNorm() / static_cast<double>(design.rows()) +
           tau * coef.lpNorm<1>();
}

LassoCvResult lasso_cv(const Matrix& design, const Vector& target, int folds,
                       std::span<const double> tau_grid, double tol, int max_iter) {
    const Index m = design.rows();
    if (folds < 2 || m < folds) throw DegenerateFolds("lasso_cv: every fold needs at least one row");
    if (tau_grid.empty()) throw std::invalid_argument("lasso_cv: empty tau grid");

    LassoCvResult out;
    out.cv_loss.assign(tau_grid.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<Index> train, test;
        for (Index i = 0; i < m; ++i) (i % folds == f ? test : train).push_back(i);
        const Matrix xt = gather_rows(design, train);
        const Vector yt = target(train);
        const Matrix xh = gather_rows(design, test);
        const Vector yh = target(test);
        const double inv = 1.0 / static_cast<double>(train.size());
        const Matrix gram = (xt.transpose() * xt) * inv;
        const Vector corr = (xt.transpose() * yt) * inv;
        const double ms = yt.squaredNorm() * inv;
        for (std::size_t t = 0; t < tau_grid.size(); ++t) {
            const LassoResult fit = lasso_cd_gram(gram, corr, ms, tau_grid[t], tol, max_iter);
            out.cv_loss[t] += (yh - xh * fit.coefficients).squaredNorm() / static_cast<double>(test.size());
        }
    }
    for (double& l : out.cv_loss) l /= folds;

    std::size_t best = 0;
    for (std::size_t t = 1; t < tau_grid.size(); ++t) {
        const double a = out.cv_loss[t], b = out.cv_loss[best];
        if (a < b || (a == b && tau_grid[t] > tau_grid[best])) best = t;
    }
    out.tau_star = tau_grid[best];
    LassoProblem full{design, target, out.tau_star, tol, max_iter};
    out.coefficients = lasso_cd(full).coefficients;
    return out;
}

std::vector<double> default_tau_grid(const Matrix& design, const Vector& target, int points,
                                     double ratio) {
    const Vector corr = design.transpose() * target / static_cast<double>(design.rows());
    const double top = std::max(2.0 * corr.cwiseAbs().maxCoeff(), 1e-12);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int t = 0; t < points; ++t) {
        const double frac = points == 1 ? 0.0 : static_cast<double>(t) / (points - 1);
        grid[static_cast<std::size_t>(t)] = top * std::pow(ratio, frac);
    }
    return grid;
}

}  // namespace blockinfer
