#pragma once

#include "blockinfer/common.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace blockinfer {

/// Covariates with a per-entry missing mask and a partially observed response.
///
/// Rows with `y_observed[i] == true` form the supervised set D2; the rest form
/// the unsupervised set D1. Values of `X` under the mask and of `y` where the
/// response is unobserved are never read.
struct SemiSupervisedDataset {
    Matrix X;
    MaskMatrix missing;
    Vector y;
    std::vector<bool> y_observed;
    std::vector<std::string> sample_ids;
    std::vector<std::string> covariate_names;

    Index n_samples() const { return X.rows(); }
    Index n_covariates() const { return X.cols(); }

    SampleSet supervised() const;
    SampleSet unsupervised() const;
    SampleSet all_samples() const;
};

/// Missing-pattern groups and the imputation sources derived from them.
/// Group labels are zero-based and assigned in order of first appearance.
struct GroupStructure {
    Index p = 0;
    std::vector<int> group_of;                   // sample -> group
    std::vector<IndexSet> observed;              // a(r)
    std::vector<IndexSet> missing;               // m(r)
    std::vector<SampleSet> members;              // H(r)
    std::vector<std::vector<int>> sources;       // G(r), ascending
    std::map<std::pair<int, int>, IndexSet> overlap;  // J(r,k) for k in G(r)
    std::vector<Index> n_supervised;             // n_r
    std::vector<Index> n_unsupervised;           // N_r

    int n_groups() const { return static_cast<int>(observed.size()); }
    const IndexSet& J(int r, int k) const;
    bool is_complete(int r) const { return missing[static_cast<std::size_t>(r)].empty(); }
};

/// Groups samples by identical missing masks and computes a, m, H, G, J.
/// Throws NeverObservedCovariate or EmptySourceSet.
GroupStructure derive_groups(const SemiSupervisedDataset& data);

/// Checks every dataset and group-structure invariant; throws
/// ValidationFailure naming the first violated one.
void validate(const SemiSupervisedDataset& data, const GroupStructure& groups);

/// Members of `pool` that belong to group r, in pool order.
SampleSet pool_members(const GroupStructure& groups, const SampleSet& pool, int r);

}  // namespace blockinfer
