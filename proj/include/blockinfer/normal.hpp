#pragma once

namespace blockinfer {

/// Standard normal CDF.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

/// Inverse standard normal CDF (Wichura's AS241, relative error ~1e-16).
/// Returns -inf / +inf at 0 / 1; throws std::domain_error outside [0, 1].
double normal_quantile(double prob);

}  // namespace blockinfer
