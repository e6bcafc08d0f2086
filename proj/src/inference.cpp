#include "blockinfer/inference.hpp"

#include "blockinfer/normal.hpp"
#include "blockinfer/parallel.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace blockinfer {

double default_lambda_prime(Index p, Index n) {
    return 0.1 * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

ProjectionVector projection_vector(const LinfQpSolver& solver, Index j, double lambda_prime_init,
                                   const EscalationPolicy& policy) {
    if (!(lambda_prime_init > 0.0)) throw std::invalid_argument("projection_vector: lambda' must be positive");
    if (j < 0 || j >= solver.dimension()) throw std::out_of_range("projection_vector: coordinate outside [0, p)");
    Vector e = Vector::Zero(solver.dimension());
    e(j) = 1.0;
    double lp = lambda_prime_init;
    for (int esc = 0;; ++esc) {
        try {
            QpSolution s = solver.solve(e, lp);
            ProjectionVector pv;
            pv.j = j;
            pv.v = std::move(s.v);
            pv.mu = std::move(s.mu);
            pv.lambda_prime_used = lp;
            pv.escalations = esc;
            pv.objective = s.objective;
            pv.constraint_norm = s.constraint_norm;
            return pv;
        } catch (const Infeasible& err) {
            if (esc >= policy.max_escalations) {
                std::ostringstream os;
                os << "projection for coordinate " << j << " infeasible after " << esc
                   << " escalations (lambda' = " << lp << "): " << err.what();
                throw PersistentlyInfeasible(os.str());
            }
            lp *= policy.factor;
        }
    }
}

double debias(const EstimatingSystem& s, const Vector& beta_hat, const ProjectionVector& pv, DebiasDenominator mode,
              double denom_tol) {
    const Vector g = eval_g(s, beta_hat, Variant::Partial);
    const double num = pv.v.dot(g);
    const double den = mode == DebiasDenominator::ExactRoot ? s.B_partial.col(pv.j).dot(pv.v) : s.Gn.col(pv.j).dot(pv.v);
    if (!(std::abs(den) > denom_tol)) {
        std::ostringstream os;
        os << "debiasing denominator " << den << " for coordinate " << pv.j << " is below " << denom_tol;
        throw DegenerateDenominator(os.str());
    }
    return beta_hat(pv.j) + num / den;
}

double sigma_hat_sq(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                    const EstimatingSystem& s, const Vector& beta_hat) {
    double num = 0.0, den = 0.0;
    for (Index i : s.inference_pool) {
        const int r = groups.group_of[static_cast<std::size_t>(i)];
        const std::size_t K = groups.sources[static_cast<std::size_t>(r)].size();
        for (std::size_t t = 0; t < K; ++t) {
            const double e = data.y(i) - views.row(groups, i, t).dot(beta_hat);
            num += e * e;
        }
        den += static_cast<double>(K);
    }
    return num / den;
}

double s_hat_j(const EstimatingSystem& s, const ProjectionVector& pv, double sigma_sq, VarianceForm form) {
    const double n = static_cast<double>(s.n);
    double acc = 0.0;
    if (form == VarianceForm::PerView) {
        for (std::size_t b = 0; b < s.blocks.size(); ++b) {
            const double nr = static_cast<double>(s.n_pool[static_cast<std::size_t>(s.blocks[b].first)]);
            const Vector w = s.inference_design[b] * pv.v.segment(s.partial_offset[b], s.partial_size[b]);
            acc += (n / nr) * (n / nr) * w.squaredNorm();
        }
    } else {
        std::size_t b = 0;
        while (b < s.blocks.size()) {
            const int r = s.blocks[b].first;
            const double nr = static_cast<double>(s.n_pool[static_cast<std::size_t>(r)]);
            Vector w = Vector::Zero(s.inference_design[b].rows());
            for (; b < s.blocks.size() && s.blocks[b].first == r; ++b)
                w.noalias() += s.inference_design[b] * pv.v.segment(s.partial_offset[b], s.partial_size[b]);
            acc += (n / nr) * (n / nr) * w.squaredNorm();
        }
    }
    return std::sqrt(sigma_sq * acc);
}

Interval confidence_interval(double beta_tilde, double s_hat, Index n2, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("confidence_interval: alpha outside (0, 1]");
    const double half = normal_quantile(1.0 - alpha / 2.0) * s_hat / static_cast<double>(n2);
    return {beta_tilde - half, beta_tilde + half};
}

TestResult test_statistic(double beta_tilde, double b, double s_hat, Index n2) {
    if (!(s_hat > 0.0)) throw DegenerateVariance("test statistic undefined: estimated standard deviation is zero");
    TestResult t;
    t.T = static_cast<double>(n2) * (beta_tilde - b) / s_hat;
    t.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(t.T)));
    return t;
}

FdrResult fdr_select(const Vector& T0, double alpha) {
    const Index p = T0.size();
    if (p < 3) throw std::invalid_argument("fdr_select: needs at least 3 statistics");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("fdr_select: alpha outside [0, 1)");
    const double dp = static_cast<double>(p);
    const double bp = std::sqrt(2.0 * std::log(dp) - 2.0 * std::log(std::log(dp)));
    std::vector<double> a(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) a[static_cast<std::size_t>(j)] = std::abs(T0(j));
    std::sort(a.begin(), a.end());
    auto count_at_least = [&](double t) {
        return static_cast<double>(a.end() - std::lower_bound(a.begin(), a.end(), t));
    };
    // Smallest t with 2 p (1 - Phi(t)) <= alpha max(c, 1).
    auto t_star = [&](double c) {
        const double target = alpha * std::max(c, 1.0) / (2.0 * dp);
        if (target >= 0.5) return target >= 1.0 ? -std::numeric_limits<double>::infinity() : normal_quantile(1.0 - target);
        return target <= 0.0 ? std::numeric_limits<double>::infinity() : -normal_quantile(target);
    };

    double best = std::numeric_limits<double>::infinity();
    if (t_star(dp) <= 0.0) best = 0.0;  // t = 0: every statistic counts
    double start = 0.0;
    std::vector<double> cuts;
    for (double v : a)
        if (v > 0.0 && v < bp && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
    cuts.push_back(bp);
    for (double hi : cuts) {
        // On (start, hi] the count is constant and equals count_at_least(hi).
        const double ts = t_star(count_at_least(hi));
        if (ts <= hi) best = std::min(best, std::max(ts, start));
        start = hi;
        if (best <= start) break;
    }

    FdrResult out;
    if (best == std::numeric_limits<double>::infinity()) {
        out.empty_infimum = true;
        out.t_hat = std::sqrt(2.0 * std::log(dp));
    } else {
        out.t_hat = best;
    }
    for (Index j = 0; j < p; ++j)
        if (std::abs(T0(j)) >= out.t_hat) out.rejected.push_back(j);
    return out;
}

std::string to_string(CoordinateStatus s) {
    switch (s) {
        case CoordinateStatus::Ok: return "ok";
        case CoordinateStatus::PersistentlyInfeasible: return "persistently_infeasible";
        case CoordinateStatus::DegenerateDenominator: return "degenerate_denominator";
        case CoordinateStatus::DegenerateVariance: return "degenerate_variance";
        case CoordinateStatus::Failed: return "failed";
    }
    return "unknown";
}

InferenceReport infer(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                      const EstimatingSystem& system, const Vector& beta_hat, const std::vector<Index>& coords,
                      const InferenceOptions& opt, const Vector& null_values) {
    if (system.Gn.size() == 0) throw std::invalid_argument("infer: system was built without projection parts");
    for (Index j : coords)
        if (j < 0 || j >= system.p) throw std::out_of_range("infer: coordinate outside [0, p)");

    InferenceReport rep;
    rep.beta_hat = beta_hat;
    rep.alpha = opt.alpha;
    rep.sigma_hat_sq = sigma_hat_sq(data, groups, views, system, beta_hat);
    const double lp0 = opt.lambda_prime > 0.0 ? opt.lambda_prime : default_lambda_prime(system.p, system.n);
    const LinfQpSolver solver(system.Wn, system.Gn, opt.qp);

    rep.records.resize(coords.size());
    parallel_for(coords.size(), opt.threads, [&](std::size_t c) {
        CoordinateRecord& rec = rep.records[c];
        const Index j = coords[c];
        rec.j = j;
        rec.beta_hat = beta_hat(j);
        try {
            const ProjectionVector pv = projection_vector(solver, j, lp0, opt.escalation);
            rec.lambda_prime_used = pv.lambda_prime_used;
            rec.escalations = pv.escalations;
            rec.denominator = opt.denominator == DebiasDenominator::ExactRoot ? system.B_partial.col(j).dot(pv.v)
                                                                              : system.Gn.col(j).dot(pv.v);
            rec.beta_tilde = debias(system, beta_hat, pv, opt.denominator, opt.denom_tol);
            rec.s_hat = s_hat_j(system, pv, rep.sigma_hat_sq, opt.variance);
            const Interval ci = confidence_interval(rec.beta_tilde, rec.s_hat, system.n, opt.alpha);
            rec.ci_lower = ci.lower;
            rec.ci_upper = ci.upper;
            const double b = null_values.size() ? null_values(j) : 0.0;
            const TestResult t = test_statistic(rec.beta_tilde, b, rec.s_hat, system.n);
            rec.T = t.T;
            rec.p_value = t.p_value;
        } catch (const PersistentlyInfeasible& e) {
            rec.status = CoordinateStatus::PersistentlyInfeasible;
            rec.message = e.what();
        } catch (const DegenerateDenominator& e) {
            rec.status = CoordinateStatus::DegenerateDenominator;
            rec.message = e.what();
        } catch (const DegenerateVariance& e) {
            rec.status = CoordinateStatus::DegenerateVariance;
            rec.message = e.what();
        } catch (const NumericalFailure& e) {
            rec.status = CoordinateStatus::Failed;
            rec.message = e.what();
        }
    });

    if (opt.fdr) {
        Vector T0 = Vector::Zero(static_cast<Index>(coords.size()));
        for (std::size_t c = 0; c < coords.size(); ++c) {
            const CoordinateRecord& rec = rep.records[c];
            if (rec.status == CoordinateStatus::Ok)
                T0(static_cast<Index>(c)) = static_cast<double>(system.n) * rec.beta_tilde / rec.s_hat;
        }
        FdrResult f = fdr_select(T0, opt.fdr_alpha);
        for (Index& idx : f.rejected) idx = coords[static_cast<std::size_t>(idx)];
        rep.fdr = std::move(f);
    }
    return rep;
}

}  // namespace blockinfer
