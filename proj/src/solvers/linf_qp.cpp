#include "blockinfer/solvers/linf_qp.hpp"

#include "blockinfer/solvers/l1_linf.hpp"

#include <algorithm>
#include <sstream>

namespace blockinfer {

Index BlockDiagonal::size() const {
    return blocks.empty() ? 0 : offsets.back() + blocks.back().rows();
}

void BlockDiagonal::push(Matrix block, Matrix factor) {
    if (block.rows() != block.cols()) throw std::invalid_argument("BlockDiagonal: block must be square");
    if (factor.size() && factor.rows() != block.rows())
        throw std::invalid_argument("BlockDiagonal: factor rows differ from block size");
    offsets.push_back(size());
    blocks.push_back(std::move(block));
    factors.push_back(std::move(factor));
}

Vector BlockDiagonal::multiply(const Vector& v) const {
    Vector out(v.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Index m = blocks[b].rows();
        out.segment(offsets[b], m).noalias() = blocks[b] * v.segment(offsets[b], m);
    }
    return out;
}

Matrix BlockDiagonal::dense() const {
    const Index M = size();
    Matrix out = Matrix::Zero(M, M);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        out.block(offsets[b], offsets[b], blocks[b].rows(), blocks[b].rows()) = blocks[b];
    return out;
}

namespace {

constexpr double kEigRel = 1e-10;
constexpr double kAdmmSigma = 1e-6;
constexpr double kAdmmRho = 0.1;
constexpr double kAdmmAlpha = 1.6;

// Columns of V (scaled eigenvectors) and eigenvalues above the relative cutoff.
void positive_part(const Matrix& S, Matrix& vecs, Vector& vals) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success) throw NumericalFailure("LinfQpSolver: eigendecomposition failed");
    const Vector& ev = es.eigenvalues();
    const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    std::vector<Index> keep;
    for (Index i = 0; i < ev.size(); ++i)
        if (top > 0.0 && ev(i) > kEigRel * top) keep.push_back(i);
    vecs = es.eigenvectors()(Eigen::all, keep);
    vals = ev(keep);
}

}  // namespace

LinfQpSolver::LinfQpSolver(BlockDiagonal W, const Matrix& G, QpOptions options)
    : W_(std::move(W)), G_(G), opt_(options), p_(G.cols()) {
    if (W_.size() != G_.rows()) throw std::invalid_argument("LinfQpSolver: W and G dimensions differ");

    const std::size_t nb = W_.count();
    ctilde_.resize(nb);
    recover_.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const Matrix& Wb = W_.blocks[b];
        const Matrix& F = W_.factors[b];
        const Index m = Wb.rows();
        const auto Gb = G_.middleRows(W_.offsets[b], m);
        Matrix U;
        Vector om;
        if (F.size() && F.cols() < m) {
            Matrix V;
            positive_part(F.transpose() * F, V, om);
            U = F * V * om.cwiseSqrt().cwiseInverse().asDiagonal();
        } else {
            positive_part(Wb, U, om);
        }
        const Vector isq = om.cwiseSqrt().cwiseInverse();
        const Matrix UtG = U.transpose() * Gb;
        const double gnorm = Gb.norm();
        if (gnorm > 0.0 && (Gb - U * UtG).norm() > opt_.range_tol * gnorm) range_ok_ = false;
        ctilde_[b] = isq.asDiagonal() * UtG;
        recover_[b] = U * isq.asDiagonal();
    }

    Matrix gram;
    if (range_ok_) {
        sigma_ = Matrix::Zero(p_, p_);
        for (const Matrix& C : ctilde_) sigma_.selfadjointView<Eigen::Lower>().rankUpdate(C.transpose());
        sigma_ = sigma_.selfadjointView<Eigen::Lower>();
        gram = sigma_;
    } else {
        gram = Matrix::Zero(p_, p_);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(G_.transpose());
        gram = gram.selfadjointView<Eigen::Lower>();

        // Woodbury pieces for (2W + sigma I + rho G G')^{-1}.
        kinv_.resize(nb);
        kinv_g_.resize(G_.rows(), p_);
        for (std::size_t b = 0; b < nb; ++b) {
            const Index m = W_.blocks[b].rows();
            Matrix K = 2.0 * W_.blocks[b];
            K.diagonal().array() += kAdmmSigma;
            kinv_[b] = K.llt().solve(Matrix::Identity(m, m));
            kinv_g_.middleRows(W_.offsets[b], m).noalias() = kinv_[b] * G_.middleRows(W_.offsets[b], m);
        }
        Matrix S = G_.transpose() * kinv_g_;
        S.diagonal().array() += 1.0 / kAdmmRho;
        schur_.compute(S);
        if (schur_.info() != Eigen::Success) throw NumericalFailure("LinfQpSolver: Woodbury factorization failed");
    }

    Matrix vecs;
    Vector vals;
    positive_part(gram, vecs, vals);
    if (vals.size() < p_) range_basis_ = vecs;
}

void LinfQpSolver::check_feasible(const Vector& t, double lambda_prime) const {
    if (range_basis_.size() == 0) return;
    if (range_basis_.cols() == 0) {
        const double r = t.cwiseAbs().maxCoeff();
        if (r > lambda_prime) {
            std::ostringstream os;
            os << "no v satisfies ||G'v - t||_inf <= " << lambda_prime << " (smallest attainable radius " << r << ")";
            throw Infeasible(os.str(), r);
        }
        return;
    }
    LinfFeasibleL1Problem lp{range_basis_, t, lambda_prime};
    try {
        solve_l1_linf(lp);
    } catch (const Infeasible& e) {
        std::ostringstream os;
        os << "no v satisfies ||G'v - t||_inf <= " << lambda_prime << " (smallest attainable radius "
           << e.attained() << ")";
        throw Infeasible(os.str(), e.attained());
    }
}

QpSolution LinfQpSolver::solve(const Vector& target, double lambda_prime) const {
    if (target.size() != p_) throw std::invalid_argument("LinfQpSolver: target length differs from G columns");
    if (!(lambda_prime >= 0.0)) throw std::invalid_argument("LinfQpSolver: lambda' must be nonnegative");
    check_feasible(target, lambda_prime);
    QpSolution s = range_ok_ ? solve_dual(target, lambda_prime) : solve_admm(target, lambda_prime);
    finish(s, target, lambda_prime);
    return s;
}

QpSolution LinfQpSolver::solve_dual(const Vector& t, double lp) const {
    const Matrix& S = sigma_;
    const double tol = 0.1 * opt_.feas_tol;
    Vector mu = Vector::Zero(p_);
    Vector h = t;  // t - Sigma mu / 2
    const Vector half = 0.5 * S.diagonal();

    auto update = [&](Index l) {
        const double a = half(l);
        if (a <= 0.0) return 0.0;
        const double old = mu(l);
        const double fresh = soft_threshold(h(l) + a * old, lp) / a;
        const double delta = fresh - old;
        if (delta != 0.0) {
            mu(l) = fresh;
            h.noalias() -= (0.5 * delta) * S.col(l);
        }
        return std::abs(delta) * std::sqrt(a);
    };
    auto violation = [&](const Vector& m, const Vector& g) {
        double worst = 0.0;
        for (Index l = 0; l < p_; ++l) {
            double v;
            if (m(l) > 0.0)
                v = std::abs(g(l) - lp);
            else if (m(l) < 0.0)
                v = std::abs(g(l) + lp);
            else
                v = std::max(0.0, std::abs(g(l)) - lp);
            worst = std::max(worst, v);
        }
        return worst;
    };

    QpSolution out;
    std::vector<Index> active;
    bool done = false;
    while (out.iterations < opt_.max_sweeps) {
        for (Index l = 0; l < p_; ++l) update(l);
        ++out.iterations;
        double viol = violation(mu, h);
        if (viol <= tol) {
            done = true;
            break;
        }
        active.clear();
        for (Index l = 0; l < p_; ++l)
            if (mu(l) != 0.0) active.push_back(l);

        // Newton step on the current support with signs held fixed.
        if (!active.empty()) {
            Vector rhs(static_cast<Index>(active.size()));
            for (std::size_t a = 0; a < active.size(); ++a)
                rhs(static_cast<Index>(a)) = t(active[a]) - (mu(active[a]) > 0.0 ? lp : -lp);
            const Matrix SA = 0.5 * S(active, active);
            const Vector na = SA.ldlt().solve(rhs);
            bool signs = na.allFinite();
            for (std::size_t a = 0; a < active.size() && signs; ++a)
                signs = (na(static_cast<Index>(a)) > 0.0) == (mu(active[a]) > 0.0) && na(static_cast<Index>(a)) != 0.0;
            if (signs) {
                Vector trial = Vector::Zero(p_);
                trial(active) = na;
                Vector th = t - 0.5 * (S(Eigen::all, active) * na);
                const double tv = violation(trial, th);
                if (tv < viol) {
                    mu.swap(trial);
                    h.swap(th);
                    viol = tv;
                    if (viol <= tol) {
                        done = true;
                        break;
                    }
                }
            }
        }

        for (int inner = 0; inner < 1000 && out.iterations < opt_.max_sweeps; ++inner) {
            double change = 0.0;
            for (Index l : active) change = std::max(change, update(l));
            ++out.iterations;
            if (change <= 0.1 * tol) break;
        }
    }
    if (!done) throw NumericalFailure("LinfQpSolver: dual coordinate descent did not converge");

    out.mu = mu;
    out.v.resize(G_.rows());
    for (std::size_t b = 0; b < W_.count(); ++b)
        out.v.segment(W_.offsets[b], recover_[b].rows()).noalias() = 0.5 * (recover_[b] * (ctilde_[b] * mu));
    return out;
}

QpSolution LinfQpSolver::solve_admm(const Vector& t, double lp) const {
    const Index M = G_.rows();
    const Vector lo = t.array() - lp, hi = t.array() + lp;
    auto ksolve = [&](const Vector& rhs) {
        Vector a(M);
        for (std::size_t b = 0; b < W_.count(); ++b) {
            const Index m = kinv_[b].rows();
            a.segment(W_.offsets[b], m).noalias() = kinv_[b] * rhs.segment(W_.offsets[b], m);
        }
        const Vector c = schur_.solve(G_.transpose() * a);
        a.noalias() -= kinv_g_ * c;
        return a;
    };

    Vector x = Vector::Zero(M), z = Vector::Zero(p_), y = Vector::Zero(p_);
    QpSolution out;
    out.used_admm = true;

    // Equality-constrained solve on the active set suggested by y; accepted
    // when feasible with consistent multiplier signs.
    auto polish = [&]() {
        std::vector<Index> act;
        std::vector<int> side;
        const double ytol = 1e-9 * std::max(1.0, y.cwiseAbs().maxCoeff());
        for (Index l = 0; l < p_; ++l) {
            if (y(l) > ytol) act.push_back(l), side.push_back(1);
            if (y(l) < -ytol) act.push_back(l), side.push_back(-1);
        }
        if (act.empty()) {
            const bool ok = (G_.transpose() * x - t).cwiseAbs().maxCoeff() <= lp + 0.1 * opt_.feas_tol;
            if (ok) out.v = x, out.mu = Vector::Zero(p_);
            return ok;
        }
        Vector b(static_cast<Index>(act.size()));
        for (std::size_t a = 0; a < act.size(); ++a) b(static_cast<Index>(a)) = side[a] > 0 ? hi(act[a]) : lo(act[a]);
        const Matrix GA = G_(Eigen::all, act);
        const Matrix KGA = kinv_g_(Eigen::all, act);
        const Vector nu = -(GA.transpose() * KGA).ldlt().solve(b);
        const Vector xp = -(KGA * nu);
        bool ok = nu.allFinite() && (G_.transpose() * xp - t).cwiseAbs().maxCoeff() <= lp + 0.1 * opt_.feas_tol;
        for (std::size_t a = 0; a < act.size() && ok; ++a) ok = nu(static_cast<Index>(a)) * side[a] >= 0.0;
        if (!ok) return false;
        out.v = xp;
        out.mu = Vector::Zero(p_);
        for (std::size_t a = 0; a < act.size(); ++a) out.mu(act[a]) = -nu(static_cast<Index>(a));
        return true;
    };

    double eps = 1e-6;
    for (out.iterations = 0; out.iterations < opt_.admm_max_iter; ++out.iterations) {
        const Vector rhs = kAdmmSigma * x + G_ * (kAdmmRho * z - y);
        const Vector xt = ksolve(rhs);
        const Vector zt = G_.transpose() * xt;
        x = kAdmmAlpha * xt + (1.0 - kAdmmAlpha) * x;
        const Vector zr = kAdmmAlpha * zt + (1.0 - kAdmmAlpha) * z;
        const Vector zn = (zr + y / kAdmmRho).cwiseMax(lo).cwiseMin(hi);
        y += kAdmmRho * (zr - zn);
        z = zn;
        if (out.iterations % 25 != 24) continue;
        const Vector Ax = G_.transpose() * x;
        const Vector Px = 2.0 * W_.multiply(x);
        const Vector Aty = G_ * y;
        const double rp = (Ax - z).cwiseAbs().maxCoeff();
        const double rd = (Px + Aty).cwiseAbs().maxCoeff();
        const double sp = std::max(Ax.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff());
        const double sd = std::max(Px.cwiseAbs().maxCoeff(), Aty.cwiseAbs().maxCoeff());
        if (rp <= eps * (1.0 + sp) && rd <= eps * (1.0 + sd)) {
            if (polish()) return out;
            eps *= 0.1;
        }
    }
    if (!polish()) {
        out.v = x;
        out.mu = -y;
    }
    return out;
}

void LinfQpSolver::finish(QpSolution& s, const Vector& t, double lp) const {
    const Vector Wv = W_.multiply(s.v);
    s.objective = s.v.dot(Wv);
    const Vector c = G_.transpose() * s.v - t;
    s.constraint_norm = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    double kkt = (2.0 * Wv - G_ * s.mu).cwiseAbs().maxCoeff();
    for (Index l = 0; l < p_; ++l) {
        if (s.mu(l) > 0.0) kkt = std::max(kkt, s.mu(l) * std::abs(c(l) + lp));
        if (s.mu(l) < 0.0) kkt = std::max(kkt, -s.mu(l) * std::abs(c(l) - lp));
    }
    s.kkt_residual = kkt;
    if (s.constraint_norm > lp + opt_.feas_tol) {
        std::ostringstream os;
        os << "LinfQpSolver: returned point violates the constraint by " << s.constraint_norm - lp;
        throw NumericalFailure(os.str());
    }
    if (kkt > opt_.opt_tol * std::max(1.0, s.mu.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "LinfQpSolver: KKT residual " << kkt << " above tolerance";
        throw NumericalFailure(os.str());
    }
}

QpSolution solve_qp_linf(const LinfConstrainedQP& pr) {
    if (pr.W.rows() != pr.W.cols() || pr.W.rows() != pr.Gmat.rows() || pr.target.size() != pr.Gmat.cols())
        throw std::invalid_argument("solve_qp_linf: inconsistent dimensions");
    if ((pr.W - pr.W.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, pr.W.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("solve_qp_linf: W is not symmetric");
    BlockDiagonal W;
    W.push(pr.W);
    QpOptions opt;
    opt.feas_tol = pr.feas_tol;
    opt.opt_tol = pr.opt_tol;
    LinfQpSolver solver(std::move(W), pr.Gmat, opt);
    return solver.solve(pr.target, pr.lambda_prime);
}

}  // namespace blockinfer
