#pragma once

#include "blockinfer/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace blockinfer {

/// min_g  mean_i (target_i - design_i' g)^2 + tau * ||g||_1   (no intercept)
struct LassoProblem {
    Matrix design;
    Vector target;
    double tau = 0.0;
    double tol = 1e-8;
    int max_iter = 100000;
};

struct LassoResult {
    Vector coefficients;
    double objective = 0.0;
    int sweeps = 0;
    bool converged = false;
    /// Largest violation of the subgradient optimality conditions.
    double kkt_violation = 0.0;
    /// Objective after each full sweep; filled only when requested.
    std::vector<double> trace;
};

/// Coordinate descent on the Gram form of the problem:
/// gram = design'design/m, corr = design'target/m, target_ms = mean(target^2).
/// Several regressions sharing one design can reuse the same gram.
LassoResult lasso_cd_gram(const Matrix& gram, const Vector& corr, double target_ms, double tau,
                          double tol = 1e-8, int max_iter = 100000, bool record_trace = false);

/// Coordinate descent Lasso. Does not throw on non-convergence; inspect
/// `converged` (the best iterate is returned).
LassoResult lasso_cd(const LassoProblem& problem, bool record_trace = false);

/// Mean squared residual plus tau times the l1 norm.
double lasso_objective(const Matrix& design, const Vector& target, const Vector& coef, double tau);

struct LassoCvResult {
    double tau_star = 0.0;
    Vector coefficients;
    std::vector<double> cv_loss;  // aligned with the input grid
};

/// Fold of row i is i mod folds. Picks the grid value with the smallest mean
/// held-out squared error (ties go to the larger tau), then refits on all rows.
/// Throws DegenerateFolds when folds < 2 or some fold is empty.
LassoCvResult lasso_cv(const Matrix& design, const Vector& target, int folds,
                       std::span<const double> tau_grid, double tol = 1e-8, int max_iter = 100000);

/// Log-spaced grid from tau_max = 2 max_j |mean_i x_ij t_i| down to ratio * tau_max.
std::vector<double> default_tau_grid(const Matrix& design, const Vector& target, int points = 20,
                                     double ratio = 1e-3);

}  // namespace blockinfer
