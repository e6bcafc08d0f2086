#include "doctest.h"
#include "oracles.hpp"

#include "blockinfer/estimator.hpp"
#include "blockinfer/inference.hpp"
#include "blockinfer/normal.hpp"
#include "blockinfer/simulate.hpp"

using namespace blockinfer;

using oracle::make_toy;
using oracle::Toy;

TEST_CASE("estimating system equals per-sample loop oracles") {
    for (int inst = 0; inst < 10; ++inst) {
        const int R = 1 + inst % 3;
        const Toy t = make_toy(100 + static_cast<std::uint64_t>(inst), R);
        const SemiSupervisedDataset& d = t.data;
        const GroupStructure& g = t.groups;
        const SampleSet D2 = d.supervised(), D = d.all_samples();
        for (WnPool wp : {WnPool::Projection, WnPool::Inference}) {
            const EstimatingSystem s = build_system(d, g, t.views, D2, D, {true, true, wp});
            const Index p = d.n_covariates();
            const oracle::LoopSystem o = oracle::loop_system(t, D2, D, wp == WnPool::Projection ? D : D2);
            REQUIRE(o.qf.size() == s.M_full);
            REQUIRE(o.qp.size() == s.M_partial);
            CHECK(o.max_error(s) <= 1e-12);
            CHECK(s.theta_hat.sum() == doctest::Approx(1.0));

            // g_n is affine in beta.
            Rng rng(static_cast<std::uint64_t>(inst));
            const Vector b1 = oracle::random_vector(rng, p), b2 = oracle::random_vector(rng, p);
            const Vector lhs = eval_g(s, 0.3 * b1 + 0.7 * b2, Variant::Full);
            const Vector rhs = 0.3 * eval_g(s, b1, Variant::Full) + 0.7 * eval_g(s, b2, Variant::Full);
            CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-10);
        }
    }
}

TEST_CASE("estimating system rejects empty groups and unsupervised samples") {
    const Toy t = make_toy(7, 2);
    SampleSet only_first;
    for (Index i : t.data.supervised())
        if (t.groups.group_of[static_cast<std::size_t>(i)] == 0) only_first.push_back(i);
    CHECK_THROWS_AS(build_system(t.data, t.groups, t.views, only_first, t.data.all_samples()), EmptyGroupInPool);
    CHECK_THROWS_AS(build_system(t.data, t.groups, t.views, t.data.all_samples(), t.data.all_samples()),
                    std::invalid_argument);
}

TEST_CASE("Dantzig path: l1 norm shrinks as lambda grows and constraint holds") {
    const Toy t = make_toy(9, 3);
    const EstimatingSystem s = build_system(t.data, t.groups, t.views, t.data.supervised(), {}, {false, false});
    const std::vector<double> grid = {0.05, 0.1, 0.2, 0.4, 0.8};
    const auto path = fit_dantzig_path(s, grid);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (path[k].beta_hat.size() == 0) continue;
        CHECK(path[k].feasibility_slack <= grid[k] + 1e-7);
        CHECK(std::abs(path[k].duality_gap) <= 1e-6);
        if (std::isfinite(prev)) CHECK(path[k].beta_hat.lpNorm<1>() <= prev + 1e-9);
        prev = path[k].beta_hat.lpNorm<1>();
    }
}

TEST_CASE("cross-validation folds are stratified and deterministic") {
    const Toy t = make_toy(21, 3);
    const SampleSet D2 = t.data.supervised();
    bool strat = false;
    const auto a = make_folds(t.groups, D2, 3, 5, strat);
    const auto b = make_folds(t.groups, D2, 3, 5, strat);
    CHECK(a == b);
    CHECK(strat);
    for (int f = 0; f < 3; ++f) {
        std::vector<int> train_groups(3, 0);
        for (std::size_t i = 0; i < D2.size(); ++i)
            if (a[i] != f) ++train_groups[static_cast<std::size_t>(t.groups.group_of[static_cast<std::size_t>(D2[i])])];
        for (int c : train_groups) CHECK(c > 0);
    }
    CHECK_THROWS_AS(make_folds(t.groups, D2, 1, 5, strat), DegenerateFolds);
    CvOptions opt;
    opt.folds = 3;
    const FitResult f = cv_fit(t.data, t.groups, t.views, D2, opt);
    CHECK(f.cv_table.size() == 20);
    double best = std::numeric_limits<double>::infinity();
    for (const CvPoint& pt : f.cv_table) best = std::min(best, pt.loss);
    for (const CvPoint& pt : f.cv_table)
        if (pt.lambda == f.lambda) CHECK(pt.loss == best);
}

TEST_CASE("debiasing solves the projected equation exactly") {
    const Toy t = make_toy(33, 3);
    const EstimatingSystem s = build_system(t.data, t.groups, t.views, t.data.supervised(), t.data.all_samples());
    double lam = 0.3;
    try {
        fit_dantzig(s, lam);
    } catch (const Infeasible& e) {
        lam = 1.5 * e.attained();
    }
    const FitResult f = fit_dantzig(s, lam);
    const LinfQpSolver solver(s.Wn, s.Gn);
    for (Index j = 0; j < s.p; ++j) {
        const ProjectionVector pv = projection_vector(solver, j, 0.3);
        const double bt = debias(s, f.beta_hat, pv);
        Vector b = f.beta_hat;
        b(j) = bt;
        CHECK(std::abs(pv.v.dot(eval_g(s, b, Variant::Partial))) <= 1e-10);
        CHECK((s.Gn.transpose() * pv.v - Vector::Unit(s.p, j)).lpNorm<Eigen::Infinity>() <=
              pv.lambda_prime_used + 1e-7);
    }
}

TEST_CASE("intervals, tests and their monotonicity") {
    const Interval a = confidence_interval(0.5, 10.0, 100, 0.05);
    CHECK(a.upper - a.lower == doctest::Approx(2.0 * normal_quantile(0.975) * 10.0 / 100.0));
    const Interval b = confidence_interval(0.5, 10.0, 100, 0.10);
    CHECK(b.upper - b.lower < a.upper - a.lower);
    CHECK(a.lower <= 0.5);
    CHECK(0.5 <= a.upper);
    const TestResult tr = test_statistic(0.3, 0.0, 10.0, 100);
    CHECK(tr.T == doctest::Approx(3.0));
    CHECK(tr.p_value == doctest::Approx(2.0 * normal_sf(3.0)));
    CHECK_THROWS_AS(test_statistic(0.3, 0.0, 0.0, 100), DegenerateVariance);
}

namespace {

// Smallest t on a fine grid meeting the rule, or the convention.
double fdr_grid_oracle(const Vector& T, double alpha) {
    const double p = static_cast<double>(T.size());
    const double bp = std::sqrt(2.0 * std::log(p) - 2.0 * std::log(std::log(p)));
    auto ok = [&](double t) {
        double R = 0.0;
        for (Index j = 0; j < T.size(); ++j) R += std::abs(T(j)) >= t;
        // Equality points are the candidates, so allow rounding.
        return 2.0 * p * normal_sf(t) <= alpha * std::max(R, 1.0) * (1.0 + 1e-12);
    };
    // Candidates where the inequality can switch on: 0 and the equality points.
    double best = std::numeric_limits<double>::infinity();
    if (ok(0.0)) best = 0.0;
    for (int c = 1; c <= T.size(); ++c) {
        const double t = -normal_quantile(alpha * c / (2.0 * p));
        if (t >= 0.0 && t <= bp && ok(t)) best = std::min(best, t);
    }
    return std::isfinite(best) ? best : std::sqrt(2.0 * std::log(p));
}

}  // namespace

TEST_CASE("modified BH threshold matches a brute-force scan") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const Index p = 3 + static_cast<Index>(rng.below(60));
        Vector T = oracle::random_vector(rng, p);
        const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p)));
        for (Index j = 0; j < k; ++j) T(j) += 2.0 + 3.0 * rng.uniform();
        const double alpha = 0.01 + 0.2 * rng.uniform();
        const FdrResult f = fdr_select(T, alpha);
        CHECK(f.t_hat == doctest::Approx(fdr_grid_oracle(T, alpha)).epsilon(1e-9));
        for (Index j = 0; j < p; ++j) {
            const bool rej = std::find(f.rejected.begin(), f.rejected.end(), j) != f.rejected.end();
            CHECK(rej == (std::abs(T(j)) >= f.t_hat));
        }
        // No grid point below the threshold satisfies the rule.
        const double bp = std::sqrt(2.0 * std::log(static_cast<double>(p)) - 2.0 * std::log(std::log(static_cast<double>(p))));
        for (double t = 0.0; t < std::min(f.t_hat, bp) - 1e-6; t += 0.01) {
            double R = 0.0;
            for (Index j = 0; j < p; ++j) R += std::abs(T(j)) >= t;
            CHECK(2.0 * static_cast<double>(p) * normal_sf(t) > alpha * std::max(R, 1.0));
        }
    }
}

TEST_CASE("FDR boundary cases") {
    Vector T = Vector::Constant(10, 100.0);
    const FdrResult z = fdr_select(T, 0.0);
    CHECK(z.empty_infimum);
    CHECK(z.t_hat == doctest::Approx(std::sqrt(2.0 * std::log(10.0))));
    CHECK(z.rejected.size() == 10);
    CHECK(fdr_select(Vector::Zero(10), 0.0).rejected.empty());
    CHECK_THROWS_AS(fdr_select(Vector::Zero(2), 0.05), std::invalid_argument);
}

TEST_CASE("cross-validation on trivial grids") {
    SettingConfig c = complete_config(60, 5, 2, 1.0);
    c.noise_sd = 0.0;
    const SimulatedData sd = generate(c, 3);
    const ImputationModel m = fit_imputation(sd.data, sd.groups, TauPolicy{}, sd.data.all_samples());
    const ImputedViews v = materialize_views(m, sd.data, sd.groups);
    CvOptions opt;
    opt.folds = 5;
    opt.grid = {1e6};
    const FitResult huge = cv_fit(sd.data, sd.groups, v, sd.data.supervised(), opt);
    CHECK(huge.lambda == 1e6);
    CHECK(huge.beta_hat.isZero());
    opt.grid = {1e-4, 10.0};
    const FitResult tight = cv_fit(sd.data, sd.groups, v, sd.data.supervised(), opt);
    CHECK(tight.lambda == 1e-4);
    CHECK((tight.beta_hat - sd.beta).lpNorm<Eigen::Infinity>() < 1e-3);
}
