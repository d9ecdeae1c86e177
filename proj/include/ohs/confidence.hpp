#pragma once

#include <cstdint>
#include <utility>

#include "ohs/ohs_search.hpp"
#include "ohs/power_law_fit.hpp"

namespace ohs {

/// Delta-method confidence intervals around the fitted optimum:
///   n*(theta)  +- z_alpha * sqrt(beta^T V beta)
///   l(n*)      +- z_alpha * sqrt(gamma^T V gamma)
/// with V the 5x5 parameter covariance assembled from the fit (theta block)
/// and the user-supplied k1/N standard errors, and z_alpha the two-sided
/// normal quantile. The n* interval is clipped to [1, N-1]. Throws
/// CovarianceInvalidError when a quadratic form is negative beyond -1e-12.
struct AsymptoticCis {
    ConfidenceInterval ci_n;
    ConfidenceInterval ci_cost;
    double n_star = 0.0;    // continuous optimum the intervals are centred on
    double min_cost = 0.0;
};

AsymptoticCis asymptotic_ci(const ThetaFit& fit, double alpha);

/// Parametric bootstrap for the OHS: resample value_i ~ N(k2(n_i; theta_hat),
/// sigma_i^2), refit, recompute n*. Replicates without an interior optimum
/// (or failing to fit) are excluded and counted; more than half degenerate
/// raises CiUndefinedError, since then the sampling distribution of n* has
/// no usable quantiles.
struct BootstrapCi {
    ConfidenceInterval ci;
    double degenerate_fraction = 0.0;
    int replicates_used = 0;
};

BootstrapCi bootstrap_ci(const ObservationSet& obs, const ThetaFit& fit, double alpha,
                         int replicate_count, std::uint64_t seed);

}  // namespace ohs
