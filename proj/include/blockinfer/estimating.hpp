#pragma once

#include "blockinfer/imputation.hpp"
#include "blockinfer/solvers/l1_linf.hpp"
#include "blockinfer/solvers/linf_qp.hpp"

#include <string>
#include <utility>
#include <vector>

namespace blockinfer {

enum class WnPool {
    Projection,  // same pool as Gn (all samples by default)
    Inference,   // supervised inference pool, as printed for W_n
};

struct SystemOptions {
    bool with_partial = true;
    bool with_projection = true;
    WnPool wn_pool = WnPool::Projection;
};

/// Stacked estimating equations over the blocks (r, k), r ascending, then k
/// ascending within G(r). Full blocks have |a(k)| rows, partial blocks |J(r,k)|.
///
///   g_n(beta)  = q_full    - B_full    beta
///   g*_n(beta) = q_partial - B_partial beta
///
/// Gn and Wn carry the per-sample scale of the projection pool P:
///   Gn block = (1/|P_r|) sum_{P_r} X_J Xhat'          (M'_g x p)
///   Wn block = (|P|/|P_r|^2) sum_{P_r} X_J X_J'       (block diagonal)
struct EstimatingSystem {
    std::vector<std::pair<int, int>> blocks;
    std::vector<Index> full_offset, full_size;
    std::vector<Index> partial_offset, partial_size;
    Index M_full = 0, M_partial = 0, p = 0;

    Vector theta_hat;          // per group: |I_r| / |I|
    std::vector<Index> n_pool; // per group: |I_r|
    Index n = 0;               // |I|

    Vector q_full;
    Matrix B_full;
    std::vector<LowRankRows> full_factors;  // B_full slab b = (xa' / |I_r|) * xhat
    Vector q_partial;
    Matrix B_partial;
    Matrix Gn;
    BlockDiagonal Wn;

    /// Per block: X_{I_r, J(r,k)}, used by the variance estimate.
    std::vector<Matrix> inference_design;

    SampleSet inference_pool, projection_pool, wn_pool;

    std::size_t block_index(int r, int k) const;
};

enum class Variant { Full, Partial };

/// Throws EmptyGroupInPool when some group has no sample in a pool.
EstimatingSystem build_system(const SemiSupervisedDataset& data, const GroupStructure& groups,
                              const ImputedViews& views, const SampleSet& inference_pool,
                              const SampleSet& projection_pool, const SystemOptions& options = {});

Vector eval_g(const EstimatingSystem& system, const Vector& beta, Variant which);

}  // namespace blockinfer
