#include "doctest.h"
#include "oracles.hpp"

#include "blockinfer/core_data.hpp"
#include "blockinfer/imputation.hpp"
#include "blockinfer/normal.hpp"
#include "blockinfer/parallel.hpp"
#include "blockinfer/rng.hpp"
#include "blockinfer/solvers/lasso.hpp"

#include <atomic>
#include <set>

using namespace blockinfer;

namespace {

// Five groups over three sources: 1 complete, 2 misses source 3,
// 3 misses source 2, 4 misses source 1, 5 observes only source 1.
SemiSupervisedDataset five_group_data() {
    Rng rng(1);
    SemiSupervisedDataset d = oracle::toy_dataset(rng, {2, 2, 2}, {-1, 2, 1, 0, -1}, {6, 6, 6, 6, 6}, {3, 3, 3, 3, 3});
    for (Index i = 24; i < 30; ++i)
        for (Index j = 2; j < 6; ++j) {
            d.missing(i, j) = true;
            d.X(i, j) = kNaN;
        }
    return d;
}

}  // namespace

TEST_CASE("group derivation: patterns, sources and overlaps") {
    const SemiSupervisedDataset d = five_group_data();
    const GroupStructure g = derive_groups(d);
    REQUIRE(g.n_groups() == 5);
    CHECK(g.is_complete(0));
    CHECK(g.missing[1] == IndexSet{4, 5});
    // Group 2 (index 1) misses source 3; groups observing it and something else.
    CHECK(g.sources[1] == std::vector<int>{0, 2, 3});
    // Group 5 observes only source 1, so it cannot impute source 3.
    CHECK(std::find(g.sources[1].begin(), g.sources[1].end(), 4) == g.sources[1].end());
    CHECK(g.J(1, 2) == IndexSet{0, 1});
    CHECK(g.J(1, 3) == IndexSet{2, 3});
    CHECK(g.n_supervised[0] == 3);
    CHECK(g.n_unsupervised[4] == 3);
    for (int r = 0; r < 5; ++r) CHECK(g.members[static_cast<std::size_t>(r)].size() == 6);
    validate(d, g);
}

TEST_CASE("group derivation errors") {
    Rng rng(2);
    SemiSupervisedDataset d = oracle::toy_dataset(rng, {2, 2}, {-1, 1}, {5, 5}, {3, 3});
    SUBCASE("covariate never observed") {
        for (Index i = 0; i < 5; ++i) d.missing(i, 3) = true;
        CHECK_THROWS_AS(derive_groups(d), NeverObservedCovariate);
    }
    SUBCASE("group without imputation source") {
        // Only one pattern observes source 2, and it observes nothing else.
        SemiSupervisedDataset e = oracle::toy_dataset(rng, {2, 2}, {0, 1}, {5, 5}, {3, 3});
        CHECK_THROWS_AS(derive_groups(e), EmptySourceSet);
    }
}

TEST_CASE("normal distribution functions") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(normal_sf(8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
    for (double x : {-3.0, -0.4, 0.0, 1.2, 4.0}) CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
    CHECK_THROWS_AS(normal_quantile(1.5), std::domain_error);
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42), b(42), c(Rng::derive(42, 1));
    for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
    CHECK(Rng::derive(42, 1) != Rng::derive(42, 2));
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    c.shuffle(v);
    CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
    double s = 0.0, s2 = 0.0;
    Rng n(7);
    for (int i = 0; i < 20000; ++i) {
        const double z = n.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / 20000.0) < 0.03);
    CHECK(std::abs(s2 / 20000.0 - 1.0) < 0.05);
    for (int i = 0; i < 1000; ++i) CHECK(n.below(7) < 7);
}

TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 5) throw std::runtime_error("x"); }),
                    std::runtime_error);
}

TEST_CASE("imputation recovers population regression coefficients") {
    // Exchangeable covariance over 6 coordinates; coordinate 5 missing in group 2.
    const Index p = 6, m = 5000;
    const double rho = 0.4;
    Matrix S = Matrix::Constant(p, p, rho);
    S.diagonal().setOnes();
    const Matrix L = S.llt().matrixL();
    Rng rng(10);
    SemiSupervisedDataset d;
    d.X = oracle::random_matrix(rng, 2 * m, p) * L.transpose();
    d.missing = MaskMatrix::Constant(2 * m, p, false);
    d.y = Vector::Zero(2 * m);
    d.y_observed.assign(static_cast<std::size_t>(2 * m), false);
    for (Index i = 0; i < 10; ++i) d.y_observed[static_cast<std::size_t>(i)] = true;
    for (Index i = m; i < 2 * m; ++i) {
        d.missing(i, 5) = true;
        d.X(i, 5) = kNaN;
        if (i < m + 10) d.y_observed[static_cast<std::size_t>(i)] = true;
    }
    const GroupStructure g = derive_groups(d);
    TauPolicy pol;
    pol.mode = TauMode::Fixed;
    pol.value = 1e-4;
    const ImputationModel model = fit_imputation(d, g, pol, d.all_samples());
    const Vector gamma = model.gamma(g, 1, 0, 5);
    const IndexSet J = g.J(1, 0);
    const Vector pop = S(J, J).ldlt().solve(S(J, Eigen::seqN(5, 1)));
    CHECK((gamma - pop).norm() <= 0.1);

    // Imputed view fills exactly the missing coordinate.
    const Vector xv = imputed_view(model, d, g, m, 0);
    CHECK(xv.head(5) == d.X.row(m).head(5).transpose());
    CHECK(xv(5) == doctest::Approx(d.X.row(m).head(5).dot(gamma)));
}

TEST_CASE("imputation coefficients match independent lasso fits") {
    Rng rng(12);
    const SemiSupervisedDataset d = oracle::toy_dataset(rng, {3, 2, 2}, {-1, 2, 1}, {40, 30, 30}, {10, 10, 10});
    const GroupStructure g = derive_groups(d);
    TauPolicy pol;  // fixed-rate default
    const ImputationModel model = fit_imputation(d, g, pol, d.all_samples());
    for (const auto& [key, coef] : model.coef) {
        const auto [r, k] = key;
        const IndexSet& J = g.J(r, k);
        const IndexSet& miss = g.missing[static_cast<std::size_t>(r)];
        const SampleSet& H = g.members[static_cast<std::size_t>(k)];
        const Matrix Z = d.X(H, J);
        for (std::size_t c = 0; c < miss.size(); ++c) {
            const Vector t = d.X(H, Eigen::seqN(miss[c], 1));
            const double tau = pol.c * std::sqrt(std::log(static_cast<double>(J.size())) / static_cast<double>(H.size()));
            const LassoResult ref = lasso_cd({Z, t, tau, 1e-12});
            CHECK((coef.col(static_cast<Index>(c)) - ref.coefficients).lpNorm<Eigen::Infinity>() <= 1e-6);
        }
    }
}

TEST_CASE("imputation needs two pool samples per source group") {
    Rng rng(13);
    const SemiSupervisedDataset d = oracle::toy_dataset(rng, {2, 2}, {-1, 1}, {5, 5}, {2, 2});
    const GroupStructure g = derive_groups(d);
    CHECK_THROWS_AS(fit_imputation(d, g, TauPolicy{}, SampleSet{0, 5, 6, 7}), InsufficientSamples);
}
