#pragma once

#include "blockinfer/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blockinfer {

enum class Mechanism {
    InformativeResponse,   // complete group drawn with weights exp(-10 y)
    InformativeAuxiliary,  // weights exp(-10 d), d = sum of the always-observed source
    Mcar,                  // uniform assignment
};

std::string to_string(Mechanism m);

/// Synthetic design: sources of sizes p_src, the first q_src[s] coordinates of
/// source s carry signal beta_s. Sources listed in `correlated` (contiguous)
/// share one exchangeable block with correlation rho; the rest are identity.
/// Group r misses source missing_source[r] (-1: nothing missing).
struct SettingConfig {
    std::string name;
    Index n = 0;  // supervised
    Index N = 0;  // unsupervised
    std::vector<Index> p_src;
    std::vector<Index> q_src;
    double beta_s = 0.0;
    double rho = 0.0;
    std::vector<int> correlated;
    std::vector<Index> n_r;
    std::vector<int> missing_source;
    Mechanism mechanism = Mechanism::Mcar;
    int auxiliary_source = -1;  // source summed into d for InformativeAuxiliary
    double weight_scale = 10.0;
    double noise_sd = 1.0;
    std::uint64_t seed = 1;

    Index p() const;
    Index q() const;
    /// Throws std::invalid_argument naming the violated invariant.
    void check() const;
    /// First relevant coordinate of the second source (0-based), or 0 with one source.
    Index default_coordinate() const;
};

/// Settings 1, 2, 3 of the simulation study.
SettingConfig setting_config(int setting, double rho = 0.1);
/// Complete-data, fully supervised design with s leading signals.
SettingConfig complete_config(Index n, Index p, Index s, double beta_s);

struct SimulatedData {
    SemiSupervisedDataset data;
    GroupStructure groups;
    Vector beta;
    Vector y_full;                  // responses before masking
    std::vector<int> config_group;  // configured group per row
};

/// Group sizes round((n+N) n_r / n), largest remainder so they sum to n+N.
/// Throws QuotaMismatch when some size falls below n_r.
std::vector<Index> group_quotas(const SettingConfig& config);

/// Draws one dataset; rows ordered by configured group. Same seed, same bits.
SimulatedData generate(const SettingConfig& config, std::uint64_t seed);

struct HarnessOptions {
    PipelineOptions pipeline;
    int threads = 1;
};

struct CoordinateSummary {
    Index j = 0;
    double truth = 0.0;
    Index used = 0;  // replications with a usable interval
    double coverage = kNaN;
    double coverage_se = kNaN;
    double average_length = kNaN;
    double rejection_rate = kNaN;  // p-value below alpha
    double mean_estimate = kNaN;
};

struct ReplicationRecord {
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    double lambda = kNaN;
    double duality_gap = kNaN;
    double estimation_error = kNaN;  // ||beta_hat - beta||_2
    std::vector<CoordinateRecord> coords;
    double fdp = kNaN;
    double tpp = kNaN;
    double mse_proposed = kNaN, mse_naive = kNaN, mse_cc = kNaN;
    bool cc_skipped = false;
};

struct PredictionRow {
    std::string method;
    Index used = 0;
    double mean_mse = kNaN;
    double sd_mse = kNaN;
    double improvement_rate = kNaN;  // (PE_M - PE_P) / PE_P against the proposed method
    std::string flag;
};

struct ExperimentResult {
    std::string kind;
    std::string setting;
    Index reps = 0;
    Index failures = 0;
    std::vector<CoordinateSummary> coordinates;
    std::optional<double> empirical_fdr;
    std::optional<double> power;
    std::vector<PredictionRow> prediction;
    double max_duality_gap = 0.0;
    double median_estimation_error = kNaN;
    std::vector<ReplicationRecord> replications;
    double runtime_seconds = 0.0;
};

/// (PE_M - PE_P) / PE_P.
double improvement_rate(double pe_method, double pe_proposed);

/// Coverage and length of the intervals for `coords` (0-based). With empty
/// `coords` only the fit runs (estimation error is still recorded).
ExperimentResult run_coverage(const SettingConfig& config, Index reps, const std::vector<Index>& coords,
                              const HarnessOptions& options);

/// Modified BH selection over all coordinates each replication.
ExperimentResult run_fdr_experiment(const SettingConfig& config, Index reps, double fdr_alpha,
                                    const HarnessOptions& options);

/// Hides `holdout` of the observed responses, refits, and compares the
/// proposed predictor with the training mean and a complete-case Lasso.
ExperimentResult run_prediction(const SettingConfig& config, Index reps, double holdout,
                                const HarnessOptions& options);

/// Same comparison on a fixed dataset (e.g. a CSV); replication t hides a
/// fresh random subset drawn from Rng::derive(seed, t).
ExperimentResult run_prediction(const SemiSupervisedDataset& data, Index reps, double holdout, std::uint64_t seed,
                                const HarnessOptions& options);

}  // namespace blockinfer
