#include "doctest.h"
#include "oracles.hpp"

#include "blockinfer/solvers/l1_linf.hpp"
#include "blockinfer/solvers/lasso.hpp"
#include "blockinfer/solvers/linf_qp.hpp"

using namespace blockinfer;

TEST_CASE("identity system: Dantzig fit is soft thresholding") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Index p = 5 + static_cast<Index>(rng.below(40));
        const Vector q = 2.0 * oracle::random_vector(rng, p);
        const double lam = 0.1 + rng.uniform();
        const LpSolution s = solve_l1_linf({Matrix::Identity(p, p), q, lam});
        double err = 0.0;
        for (Index j = 0; j < p; ++j) err = std::max(err, std::abs(s.beta(j) - oracle::soft(q(j), lam)));
        CHECK(err <= 1e-5);
        CHECK(std::abs(s.duality_gap) <= 1e-6);
    }
}

TEST_CASE("LP matches vertex enumeration on small dense problems") {
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const Index p = 2 + static_cast<Index>(rng.below(2));
        const Index M = p + static_cast<Index>(rng.below(3));
        const Matrix A = oracle::random_matrix(rng, M, p);
        const Vector q = oracle::random_vector(rng, M);
        L1LinfPathSolver solver(A, q);
        const double rmin = solver.min_radius();
        const double lam = rmin + 0.05 + 0.5 * rng.uniform();
        const double want = oracle::l1_linf_bruteforce(A, q, lam);
        const LpSolution s = solver.solve(lam);
        CHECK(s.beta.lpNorm<1>() == doctest::Approx(want).epsilon(1e-7));
        CHECK(s.max_residual <= lam + 1e-7);
        CHECK(std::abs(s.duality_gap) <= 1e-6);
    }
}

TEST_CASE("LP reports infeasibility with the attainable radius") {
    Rng rng(8);
    const Matrix A = oracle::random_matrix(rng, 6, 2);
    const Vector q = oracle::random_vector(rng, 6);
    L1LinfPathSolver solver(A, q);
    const double rmin = solver.min_radius();
    CHECK(std::isinf(oracle::l1_linf_bruteforce(A, q, 0.95 * rmin)));
    CHECK(std::isfinite(oracle::l1_linf_bruteforce(A, q, 1.01 * rmin)));
    try {
        solve_l1_linf({A, q, 0.9 * rmin});
        FAIL("expected Infeasible");
    } catch (const Infeasible& e) {
        CHECK(e.attained() == doctest::Approx(rmin).epsilon(1e-6));
    }
}

TEST_CASE("LP warm-started path agrees with cold solves") {
    Rng rng(21);
    const Matrix A = oracle::random_matrix(rng, 25, 40);
    const Vector q = oracle::random_vector(rng, 25);
    L1LinfPathSolver path(A, q);
    for (double lam : {2.0, 1.5, 1.0, 0.7, 0.5}) {
        const LpSolution warm = path.solve(lam);
        const LpSolution cold = solve_l1_linf({A, q, lam});
        CHECK(warm.primal_objective == doctest::Approx(cold.primal_objective).epsilon(1e-8));
        CHECK(std::abs(warm.duality_gap) <= 1e-6);
    }
}

TEST_CASE("LP with low-rank row slabs matches the dense solve") {
    Rng rng(23);
    for (int inst = 0; inst < 10; ++inst) {
        const Index p = 30;
        std::vector<LowRankRows> f;
        Index rows = 0;
        for (int b = 0; b < 3; ++b) {
            const Index m = 8 + static_cast<Index>(rng.below(10)), rank = 2 + static_cast<Index>(rng.below(4));
            f.push_back({rows, oracle::random_matrix(rng, m, rank), oracle::random_matrix(rng, rank, p)});
            rows += m;
        }
        Matrix A(rows, p);
        for (const LowRankRows& s : f) A.middleRows(s.row0, s.L.rows()) = s.L * s.R;
        const Vector q = A * oracle::random_vector(rng, p) + 0.01 * oracle::random_vector(rng, rows);
        L1LinfPathSolver dense(A, q), slab(A, q, {}, f);
        for (double lam : {1.0, 0.3, 0.1}) {
            const LpSolution a = dense.solve(lam), b = slab.solve(lam);
            CHECK(a.primal_objective == doctest::Approx(b.primal_objective).epsilon(1e-8));
            CHECK(b.max_residual <= lam + 1e-7);
            CHECK(std::abs(b.duality_gap) <= 1e-6);
        }
    }
    const Matrix A = Matrix::Identity(4, 4);
    const Vector q = Vector::Ones(4);
    CHECK_THROWS_AS(L1LinfPathSolver(A, q, {}, {{1, Matrix::Identity(3, 3), Matrix::Identity(3, 4)}}), std::invalid_argument);
}

TEST_CASE("QP closed form with identity weight and gradient") {
    for (Index p : {1, 4, 30}) {
        for (double lp : {0.01, 0.2, 0.7}) {
            BlockDiagonal W;
            W.push(Matrix::Identity(p, p));
            const Matrix G = Matrix::Identity(p, p);
            const LinfQpSolver solver(W, G);
            for (Index j = 0; j < p; ++j) {
                Vector e = Vector::Zero(p);
                e(j) = 1.0;
                const QpSolution s = solver.solve(e, lp);
                Vector want = Vector::Zero(p);
                want(j) = 1.0 - lp;
                CHECK((s.v - want).lpNorm<Eigen::Infinity>() <= 1e-6);
            }
        }
    }
}

TEST_CASE("QP agrees with a proximal-gradient dual oracle") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Index M = 6, p = 4;
        const Matrix F = oracle::random_matrix(rng, M, M + 3);
        const Matrix W = F * F.transpose() / static_cast<double>(M + 3);
        const Matrix G = oracle::random_matrix(rng, M, p);
        Vector t = Vector::Zero(p);
        t(rep % p) = 1.0;
        const double lp = 0.05 + 0.2 * rng.uniform();
        const QpSolution s = solve_qp_linf({W, G, t, lp});
        const Vector v = oracle::qp_dual_ista(W, G, t, lp);
        CHECK(s.objective == doctest::Approx(v.dot(W * v)).epsilon(1e-6));
        CHECK((G.transpose() * s.v - t).lpNorm<Eigen::Infinity>() <= lp + 1e-7);
        CHECK(s.kkt_residual <= 1e-6);
    }
}

TEST_CASE("QP splitting path handles gradients outside the weight range") {
    Rng rng(17);
    // Rank-deficient blocks without a range match force the splitting path.
    const Index M = 8, p = 5;
    const Matrix F = oracle::random_matrix(rng, M, 5);
    BlockDiagonal W;
    W.push(F * F.transpose(), F);
    const Matrix G = oracle::random_matrix(rng, M, p);
    const LinfQpSolver solver(W, G);
    CHECK_FALSE(solver.range_condition());
    Vector t = Vector::Zero(p);
    t(0) = 1.0;
    const QpSolution s = solver.solve(t, 0.1);
    CHECK(s.used_admm);
    CHECK((G.transpose() * s.v - t).lpNorm<Eigen::Infinity>() <= 0.1 + 1e-7);
    // Any feasible perturbation must not lower the objective.
    const Matrix Wd = W.dense();
    for (int k = 0; k < 200; ++k) {
        const Vector d = 1e-3 * oracle::random_vector(rng, M);
        const Vector v2 = s.v + d;
        if ((G.transpose() * v2 - t).lpNorm<Eigen::Infinity>() <= 0.1)
            CHECK(v2.dot(Wd * v2) >= s.objective - 1e-9);
    }
}

TEST_CASE("QP infeasible target raises Infeasible") {
    // G' v has a zero row, so the constraint on that coordinate cannot be met.
    BlockDiagonal W;
    W.push(Matrix::Identity(3, 3));
    Matrix G = Matrix::Zero(3, 2);
    G(0, 0) = 1.0;
    G(1, 0) = 1.0;
    const LinfQpSolver solver(W, G);
    Vector t(2);
    t << 0.0, 1.0;
    CHECK_THROWS_AS(solver.solve(t, 0.1), Infeasible);
}

TEST_CASE("Lasso KKT residual on random problems") {
    Rng rng(29);
    for (int rep = 0; rep < 50; ++rep) {
        const Index m = 20 + static_cast<Index>(rng.below(60));
        const Index p = 5 + static_cast<Index>(rng.below(60));
        const Matrix X = oracle::random_matrix(rng, m, p);
        const Vector t = oracle::random_vector(rng, m);
        const double tau = 0.02 + 0.3 * rng.uniform();
        const LassoResult r = lasso_cd({X, t, tau});
        CHECK(r.converged);
        CHECK(oracle::lasso_kkt(X, t, r.coefficients, tau) <= 1e-6);
    }
}

TEST_CASE("Lasso on an orthogonal design is soft thresholding") {
    const Index m = 16, p = 4;
    Matrix X = Matrix::Zero(m, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < 4; ++i) X(4 * j + i, j) = 2.0;  // X'X/m = I
    Rng rng(2);
    const Vector t = oracle::random_vector(rng, m);
    const double tau = 0.3;
    const LassoResult r = lasso_cd({X, t, tau, 1e-12});
    const Vector z = X.transpose() * t / static_cast<double>(m);
    for (Index j = 0; j < p; ++j) CHECK(r.coefficients(j) == doctest::Approx(oracle::soft(z(j), tau / 2.0)).epsilon(1e-9));
}

TEST_CASE("Lasso objective trace never increases") {
    Rng rng(4);
    const Matrix X = oracle::random_matrix(rng, 30, 50);
    const Vector t = oracle::random_vector(rng, 30);
    const LassoResult r = lasso_cd({X, t, 0.05}, true);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1] + 1e-12);
}

TEST_CASE("Lasso cross-validation follows the documented folds and ties") {
    Rng rng(6);
    const Matrix X = oracle::random_matrix(rng, 40, 6);
    Vector t = X.col(0) * 2.0 + 0.3 * oracle::random_vector(rng, 40);
    const std::vector<double> grid = {1.0, 0.3, 0.1, 0.03};
    const LassoCvResult cv = lasso_cv(X, t, 5, grid);
    // Independent recomputation of the fold losses.
    std::vector<double> loss(grid.size(), 0.0);
    for (int f = 0; f < 5; ++f) {
        std::vector<Index> tr, te;
        for (Index i = 0; i < 40; ++i) (i % 5 == f ? te : tr).push_back(i);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const LassoResult r = lasso_cd({X(tr, Eigen::all), t(tr), grid[g], 1e-10});
            loss[g] += (t(te) - X(te, Eigen::all) * r.coefficients).squaredNorm() / static_cast<double>(te.size()) / 5.0;
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (loss[g] < loss[best]) best = g;
    CHECK(cv.tau_star == grid[best]);
    for (std::size_t g = 0; g < grid.size(); ++g) CHECK(cv.cv_loss[g] == doctest::Approx(loss[g]).epsilon(1e-6));
    CHECK_THROWS_AS(lasso_cv(X, t, 1, grid), DegenerateFolds);
}
