#pragma once

#include "blockinfer/estimating.hpp"
#include "blockinfer/solvers/l1_linf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace blockinfer {

struct CvPoint {
    double lambda = 0.0;
    double loss = 0.0;  // +inf when the constraint set is empty for some fold
    bool feasible = true;
};

struct FitResult {
    Vector beta_hat;
    double lambda = 0.0;
    std::vector<CvPoint> cv_table;
    double feasibility_slack = 0.0;  // ||g_n(beta_hat)||_inf
    double duality_gap = 0.0;
    int lp_iterations = 0;
    int cv_folds = 0;
    bool cv_stratified = false;
    bool cv_grid_shifted = false;  // default grid lay below every feasible radius
};

/// min ||beta||_1 s.t. ||g_n(beta)||_inf <= lambda. Throws Infeasible with
/// the smallest attainable radius.
FitResult fit_dantzig(const EstimatingSystem& system, double lambda, const LpOptions& lp = {});

/// Dantzig fits along `lambdas` sharing one warm-started solver. Entry t is
/// empty (beta of size 0) when lambda_t is infeasible or the LP broke down.
std::vector<FitResult> fit_dantzig_path(const EstimatingSystem& system, const std::vector<double>& lambdas,
                                        const LpOptions& lp = {});

/// Descending log-spaced grid on [lo, hi] * (sqrt(log p / n) + sqrt(log p / (n + N))).
std::vector<double> default_lambda_grid(Index n, Index N, Index p, int points = 20, double lo = 0.05,
                                        double hi = 2.0);

/// Mean over k in G(r) of the squared residual y_i - Xhat_i^(k)' beta.
double view_loss(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                 Index i, const Vector& beta);

/// Mean over k in G(r) of Xhat_i^(k)' beta.
double predict_sample(const GroupStructure& groups, const ImputedViews& views, Index i, const Vector& beta);

struct CvOptions {
    int folds = 10;
    std::vector<double> grid;  // empty: default_lambda_grid with grid_points
    int grid_points = 20;
    std::uint64_t seed = 1;
    LpOptions lp;
};

/// K-fold cross-validation of lambda over the supervised `pool`, stratified
/// by group (falls back to unstratified folds when stratification would empty
/// a group from some training set). Imputation is shared across folds. The
/// smallest mean held-out view loss wins, ties to the larger lambda, then the
/// fit is recomputed on the whole pool. Throws DegenerateFolds or Infeasible.
FitResult cv_fit(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                 const SampleSet& pool, const CvOptions& options);

/// Fold label per pool member (aligned with `pool`). Throws DegenerateFolds.
std::vector<int> make_folds(const GroupStructure& groups, const SampleSet& pool, int folds, std::uint64_t seed,
                            bool& stratified);

}  // namespace blockinfer
