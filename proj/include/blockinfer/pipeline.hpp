#pragma once

#include "blockinfer/inference.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blockinfer {

enum class SplitMode {
    None,    // imputation fitted on all of D
    Theory,  // a fraction of D2 is held out of imputation and used for estimation
};

struct PipelineOptions {
    TauPolicy tau;
    bool lambda_cv = true;
    double lambda = 0.0;  // used when lambda_cv is false
    CvOptions cv;
    WnPool wn_pool = WnPool::Projection;
    SplitMode split = SplitMode::None;
    double split_fraction = 0.5;
    InferenceOptions inference;
};

struct PipelineResult {
    ImputationModel model;
    ImputedViews views;
    SampleSet inference_pool;
    FitResult fit;
    std::optional<EstimatingSystem> system;  // present when inference ran
    std::optional<InferenceReport> report;
};

/// Supervised samples reserved for estimation under SplitMode::Theory: the
/// first round(fraction * n_r) of each group's supervised members after a
/// seeded shuffle (at least one per group).
SampleSet theory_split(const SemiSupervisedDataset& data, const GroupStructure& groups, double fraction,
                       std::uint64_t seed);

/// Imputation, lambda selection and the Dantzig fit; then inference for
/// `coords` when nonempty.
PipelineResult run_pipeline(const SemiSupervisedDataset& data, const GroupStructure& groups,
                            const std::vector<Index>& coords, const PipelineOptions& options,
                            const Vector& null_values = Vector());

}  // namespace blockinfer
