#pragma once

#include "blockinfer/core_data.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace blockinfer {

enum class TauMode {
    FixedRate,       // tau = c * sqrt(log|J| / m)
    Fixed,           // tau = value
    CrossValidated,  // lasso_cv over a log grid, per regression
};

struct TauPolicy {
    TauMode mode = TauMode::FixedRate;
    double c = 0.5;
    double value = 0.0;
    int folds = 10;
    int grid_points = 20;

    std::string describe() const;
};

/// Fitted imputation coefficients. For each (r, k) with k in G(r) and m(r)
/// nonempty, coef(r,k) is |J(r,k)| x |m(r)|: column c regresses covariate
/// m(r)[c] on X_{J(r,k)} over H(k) within the fit pool.
struct ImputationModel {
    std::map<std::pair<int, int>, Matrix> coef;
    std::map<std::pair<int, int>, std::vector<double>> tau;
    std::map<std::pair<int, int>, std::vector<bool>> converged;
    SampleSet fit_pool;
    TauPolicy policy;

    /// gamma_{j, J(r,k)}; throws std::out_of_range for keys outside the model.
    Vector gamma(const GroupStructure& groups, int r, int k, Index j) const;
    std::size_t n_regressions() const;
};

/// Lasso imputation regressions over `fit_pool` (sorted). Throws
/// InsufficientSamples if some required H(k) has fewer than 2 pool samples.
ImputationModel fit_imputation(const SemiSupervisedDataset& data, const GroupStructure& groups,
                               const TauPolicy& policy, const SampleSet& fit_pool);

/// X_i with its missing coordinates predicted from J(r,k), r = group of i.
Vector imputed_view(const ImputationModel& model, const SemiSupervisedDataset& data,
                    const GroupStructure& groups, Index i, int k);

/// Imputed views of the given rows (all in group r) through source k.
Matrix imputed_rows(const ImputationModel& model, const SemiSupervisedDataset& data,
                    const GroupStructure& groups, int r, const SampleSet& rows, int k);

/// Every sample's imputed views, materialized once.
struct ImputedViews {
    /// view[r][t] holds H(r) (rows in H(r) order) imputed through sources[r][t].
    std::vector<std::vector<Matrix>> view;
    /// Position of each sample inside its group's H(r).
    std::vector<Index> position;

    auto row(const GroupStructure& g, Index i, std::size_t t) const {
        const int r = g.group_of[static_cast<std::size_t>(i)];
        return view[static_cast<std::size_t>(r)][t].row(position[static_cast<std::size_t>(i)]);
    }
};

ImputedViews materialize_views(const ImputationModel& model, const SemiSupervisedDataset& data,
                               const GroupStructure& groups);

}  // namespace blockinfer
