#include "ohs/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ohs/gradients.hpp"
#include "ohs/math_util.hpp"
#include "ohs/parallel.hpp"
#include "ohs/rng.hpp"

namespace ohs {

namespace {

double quadratic_form(const GradientVector& g, const ThetaFit& fit) {
    // V is block diagonal: the fitted 3x3 theta covariance plus independent
    // k1 and N variances.
    double qf = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) qf += g.d[r] * fit.covariance[r][c] * g.d[c];
    qf += g.d[3] * g.d[3] * fit.k1_se * fit.k1_se;
    qf += g.d[4] * g.d[4] * fit.N_se * fit.N_se;
    if (qf < -1e-12)
        throw CovarianceInvalidError(
            "asymptotic_ci: negative variance quadratic form (" + std::to_string(qf) + ")");
    return std::max(qf, 0.0);
}

}  // namespace

AsymptoticCis asymptotic_ci(const ThetaFit& fit, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("asymptotic_ci: alpha must be in (0,1)");
    const CostParameters params = fit.params();
    const double n_star = ohs_continuous_root(params);
    const double min_cost = total_cost(n_star, params);

    const GradientVector beta = ohs_gradient(params);
    const GradientVector gamma = mincost_gradient(params);
    const double z = z_two_sided(alpha);

    const double half_n = z * std::sqrt(quadratic_form(beta, fit));
    const double half_cost = z * std::sqrt(quadratic_form(gamma, fit));

    AsymptoticCis out;
    out.n_star = n_star;
    out.min_cost = min_cost;
    out.ci_n = ConfidenceInterval{std::clamp(n_star - half_n, 1.0, params.N - 1.0),
                                  std::clamp(n_star + half_n, 1.0, params.N - 1.0),
                                  1.0 - alpha, ConfidenceInterval::Kind::asymptotic};
    out.ci_cost = ConfidenceInterval{min_cost - half_cost, min_cost + half_cost, 1.0 - alpha,
                                     ConfidenceInterval::Kind::asymptotic};
    return out;
}

BootstrapCi bootstrap_ci(const ObservationSet& obs, const ThetaFit& fit, double alpha,
                         int replicate_count, std::uint64_t seed) {
    if (replicate_count < 1)
        throw DomainError("bootstrap_ci: replicate count must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("bootstrap_ci: alpha must be in (0,1)");
    obs.validate(fit.N);

    FitOptions fast;
    fast.starts = 2;
    fast.max_iterations = 80;
    fast.throw_on_failure = false;

    std::vector<double> n_stars(static_cast<std::size_t>(replicate_count),
                                std::numeric_limits<double>::quiet_NaN());

    parallel_for(static_cast<std::size_t>(replicate_count), [&](std::size_t rep) {
        Rng rng(derive_seed(seed, rep));
        ObservationSet resampled = obs;
        for (std::size_t i = 0; i < resampled.size(); ++i) {
            const double mean_i = k2_power_law(resampled.sizes[i], fit.theta);
            resampled.values[i] = rng.normal(mean_i, std::sqrt(resampled.variances[i]));
        }
        try {
            ThetaFit refit = fit_power_law(resampled, fit.theta, fast);
            if (!refit.converged) return;
            refit.with_known(fit.k1, fit.N, fit.k1_se, fit.N_se);
            n_stars[rep] = static_cast<double>(find_ohs_root(refit.params()).n_star);
        } catch (const Error&) {
            // Degenerate replicate: n* undefined for the resampled parameters.
        }
    });

    std::vector<double> valid;
    valid.reserve(n_stars.size());
    for (double v : n_stars)
        if (std::isfinite(v)) valid.push_back(v);

    BootstrapCi out;
    out.replicates_used = static_cast<int>(valid.size());
    out.degenerate_fraction =
        1.0 - static_cast<double>(valid.size()) / static_cast<double>(replicate_count);
    if (out.degenerate_fraction > 0.5) {
        throw CiUndefinedError(
            "bootstrap_ci: more than half of the replicates have no interior OHS (" +
            std::to_string(out.degenerate_fraction) + " degenerate)");
    }
    out.ci = ConfidenceInterval{quantile(valid, alpha / 2.0), quantile(valid, 1.0 - alpha / 2.0),
                                1.0 - alpha, ConfidenceInterval::Kind::bootstrap};
    return out;
}

}  // namespace ohs
