#pragma once

#include "blockinfer/estimator.hpp"
#include "blockinfer/solvers/linf_qp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blockinfer {

class PersistentlyInfeasible : public Error {
public:
    using Error::Error;
};

struct ProjectionVector {
    Index j = 0;
    Vector v;
    Vector mu;
    double lambda_prime_used = 0.0;
    int escalations = 0;
    double objective = 0.0;
    double constraint_norm = 0.0;
};

struct EscalationPolicy {
    double factor = 1.5;
    int max_escalations = 20;
};

/// 0.1 * sqrt(log p / n).
double default_lambda_prime(Index p, Index n);

/// Solves the projection QP for target e_j, enlarging lambda' by the policy
/// factor while infeasible. Throws PersistentlyInfeasible after the cap.
ProjectionVector projection_vector(const LinfQpSolver& solver, Index j, double lambda_prime_init,
                                   const EscalationPolicy& policy = {});

enum class DebiasDenominator {
    ExactRoot,           // v' B_partial e_j: exact root of v' g*_n(beta) = 0 in beta_j
    ProjectionGradient,  // v' Gn e_j
};

/// beta_tilde_j = beta_hat_j + v' g*_n(beta_hat) / denominator.
/// Throws DegenerateDenominator when |denominator| <= denom_tol.
double debias(const EstimatingSystem& system, const Vector& beta_hat, const ProjectionVector& pv,
              DebiasDenominator mode = DebiasDenominator::ExactRoot, double denom_tol = 1e-6);

/// Pooled squared imputed-view residual over the inference pool, divided by
/// sum_r |G(r)| n_r.
double sigma_hat_sq(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                    const EstimatingSystem& system, const Vector& beta_hat);

enum class VarianceForm {
    PerView,    // sum over i and k of (n/n_r)^2 (v_rk' X_iJ)^2
    Clustered,  // sum over i of (sum over k of (n/n_r) v_rk' X_iJ)^2
};

double s_hat_j(const EstimatingSystem& system, const ProjectionVector& pv, double sigma_sq,
               VarianceForm form = VarianceForm::PerView);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

Interval confidence_interval(double beta_tilde, double s_hat, Index n2, double alpha);

struct TestResult {
    double T = 0.0;
    double p_value = 1.0;
};

/// T = n2 (beta_tilde - b) / s_hat, two-sided normal p-value. Throws
/// DegenerateVariance when s_hat == 0.
TestResult test_statistic(double beta_tilde, double b, double s_hat, Index n2);

struct FdrResult {
    double t_hat = 0.0;
    bool empty_infimum = false;  // the sqrt(2 log p) convention was applied
    std::vector<Index> rejected;
};

/// Modified BH threshold over |T0|, capped at b_p = sqrt(2 log p - 2 log log p).
/// Requires p >= 3.
FdrResult fdr_select(const Vector& T0, double alpha);

enum class CoordinateStatus { Ok, PersistentlyInfeasible, DegenerateDenominator, DegenerateVariance, Failed };

std::string to_string(CoordinateStatus s);

struct CoordinateRecord {
    Index j = 0;
    CoordinateStatus status = CoordinateStatus::Ok;
    std::string message;
    double beta_hat = 0.0;
    double beta_tilde = kNaN;
    double s_hat = kNaN;
    double ci_lower = kNaN;
    double ci_upper = kNaN;
    double T = kNaN;
    double p_value = kNaN;
    double lambda_prime_used = kNaN;
    int escalations = 0;
    double denominator = kNaN;
};

struct InferenceOptions {
    double alpha = 0.05;
    double lambda_prime = 0.0;  // <= 0: default_lambda_prime
    EscalationPolicy escalation;
    DebiasDenominator denominator = DebiasDenominator::ExactRoot;
    VarianceForm variance = VarianceForm::Clustered;
    double denom_tol = 1e-6;
    bool fdr = false;
    double fdr_alpha = 0.05;
    int threads = 1;
    QpOptions qp;
};

struct InferenceReport {
    Vector beta_hat;
    double sigma_hat_sq = 0.0;
    double alpha = 0.05;
    std::vector<CoordinateRecord> records;
    std::optional<FdrResult> fdr;  // rejected holds covariate indices
};

/// Projection, debiasing, variance, interval and test for each coordinate in
/// `coords` (0-based). Null value b_j = 0 unless `null_values` is given.
/// Failing coordinates are reported with a status instead of aborting.
InferenceReport infer(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                      const EstimatingSystem& system, const Vector& beta_hat, const std::vector<Index>& coords,
                      const InferenceOptions& options, const Vector& null_values = Vector());

}  // namespace blockinfer
