#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ohs/ohs_search.hpp"
#include "ohs/parametric_algorithm.hpp"

namespace ohs {

/// Gaussian-process surrogate configuration. The prior mean is the
/// parametric total cost m(n) = k1*n + k2(n; theta)*(N - n); deviations are
/// a zero-mean process with squared-exponential kernel
///   k(n, n') = sigma_u2 * exp(-((n - n') / zeta)^2).
struct GPConfig {
    PowerLawTheta prior_theta;
    double prior_k1 = 0.0;
    double prior_N = 0.0;
    double sigma_u2 = 0.0;  // kernel variance, total-cost^2 units
    double zeta = 0.0;      // kernel length-scale, holdout-size units
    double tau = 0.0;       // stopping threshold, total-cost units
    double alpha = 0.1;     // error-set tail probability

    void validate() const {
        prior_theta.validate();
        if (!(prior_N >= 2.0)) throw DomainError("gp config: N must be >= 2");
        if (!(prior_k1 > 0.0)) throw DomainError("gp config: k1 must be > 0");
        if (!(sigma_u2 > 0.0)) throw DomainError("gp config: sigma_u2 must be > 0");
        if (!(zeta > 0.0)) throw DomainError("gp config: zeta must be > 0");
        if (!(tau >= 0.0)) throw DomainError("gp config: tau must be >= 0");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("gp config: alpha must be in (0,1)");
    }

    double kernel(double n, double m) const {
        const double z = (n - m) / zeta;
        return sigma_u2 * std::exp(-z * z);
    }

    double prior_mean(double n) const {
        return prior_k1 * n + k2_power_law(n, prior_theta) * (prior_N - n);
    }
};

/// How duplicate observations at one size combine. The inverse-variance
/// weighted mean is shared; for the combined variance the statistically
/// correct reciprocal (sum of precisions)^-1 is the default. `as_printed`
/// reproduces the source material's displayed formula (the plain sum of
/// precisions), which is dimensionally inconsistent and makes replicate
/// accumulation diverge -- it exists so a regression test can document the
/// deviation, not for production use.
enum class CoalesceVariance { reciprocal, as_printed };

/// Centre used per unique size: the inverse-variance weighted mean, or the
/// plain median (preferred with the nugget emulator, where the weighted
/// mean's variance bookkeeping does not apply).
enum class CoalesceCenter { weighted_mean, median };

struct CoalescedObservations {
    std::vector<int> unique_sizes;  // strictly increasing
    std::vector<double> means;
    std::vector<double> variances;

    std::size_t size() const { return unique_sizes.size(); }
};

CoalescedObservations coalesce(const ObservationSet& obs,
                               CoalesceVariance variance_rule = CoalesceVariance::reciprocal,
                               CoalesceCenter center = CoalesceCenter::weighted_mean);

namespace detail {
struct PosteriorBuilder;
}

/// Posterior of the surrogate after one Bayes-linear update on the
/// coalesced data. Immutable; mu/psi evaluations are pure.
class EmulatorPosterior {
public:
    double mu(double n) const;
    /// Posterior variance, clamped to 0 within numerical tolerance.
    double psi(double n) const;

    /// Best observed (coalesced) cost; the EI baseline for the standard
    /// emulator. The nugget variant uses min_i mu(n_i) instead.
    double improvement_baseline() const { return baseline_; }
    double d_minus() const { return d_minus_; }

    const GPConfig& config() const { return config_; }
    const CoalescedObservations& data() const { return data_; }
    double jitter_applied() const { return jitter_; }

private:
    friend struct detail::PosteriorBuilder;
    GPConfig config_;
    CoalescedObservations data_;
    std::function<double(double)> kappa_;  // empty for the standard emulator
    Eigen::LLT<Eigen::MatrixXd> factor_;
    Eigen::VectorXd weights_;  // (K + D)^{-1} (d - m)
    double d_minus_ = 0.0;
    double baseline_ = 0.0;
    double jitter_ = 0.0;

    double prior_var(double n) const;
    Eigen::VectorXd kvec(double n) const;
};

/// Standard emulator: observation variances on the diagonal.
EmulatorPosterior posterior(const ObservationSet& obs, const GPConfig& config);

/// Same update from already-coalesced data (any variance rule applied by
/// the caller).
EmulatorPosterior posterior_from_coalesced(const CoalescedObservations& data,
                                           const GPConfig& config);

/// Nugget emulator: a monotone-decreasing irreducible variance kappa(n)
/// replaces the coalesced variances on the diagonal and adds to the prior
/// variance at every size. kappa must be positive on 1..N.
EmulatorPosterior posterior_with_nugget(const ObservationSet& obs, const GPConfig& config,
                                        const std::function<double(double)>& kappa,
                                        CoalesceCenter center = CoalesceCenter::weighted_mean);

/// Expected improvement below the baseline at size n; the psi = 0 limit is
/// max(0, baseline - mu(n)).
double expected_improvement(double n, const EmulatorPosterior& post);

/// The EI formula itself, E[max(0, baseline - L)] for L ~ N(mu, variance),
/// in terms of gap = baseline - mu.
double expected_improvement_value(double gap, double variance);

/// argmax of EI over the candidates; ties break toward the smallest size.
int next_point_ei(const EmulatorPosterior& post, const std::vector<int>& candidates);

/// Sizes whose posterior cost beats mu(n_star) with probability >= 1-alpha:
/// Phi((mu(n_star) - mu(n)) / sqrt(psi(n))) >= 1 - alpha, with the psi = 0
/// limit resolved by direct comparison. Not a credible set.
ErrorSet error_set(const EmulatorPosterior& post, int n_star, double alpha,
                   const std::vector<int>& grid);

struct EmulationRunConfig {
    GPConfig gp;
    std::vector<int> initial_design;
    int max_iterations = 100;       // acquisition cap on top of the tau rule
    std::vector<int> candidates;    // empty: default 1000-point grid
    bool refit_prior = true;        // re-estimate prior theta from data each round
    std::uint64_t seed = 0;
};

struct EmulationIteration {
    int iter = 0;
    int n_acquired = 0;
    double d = 0.0;
    double variance = 0.0;
    double max_ei = 0.0;      // the value that triggered this acquisition
    int n_star = 0;           // argmin mu after the update
    double mu_at_n_star = 0.0;
};

struct EmulationRunResult {
    OHSResult result;  // method = emulation, uncertainty = error set
    ObservationSet design;
    GPConfig final_config;  // prior theta after the last refit
    std::vector<EmulationIteration> trace;
    std::vector<int> candidates;

    void trace_to_csv(const std::string& path) const;
    /// Writes `n,mu,psi` over the candidate grid for plotting.
    void mu_curve_to_csv(const std::string& path) const;

    /// Posterior at the final design (rebuilt on demand).
    EmulatorPosterior final_posterior() const;
};

/// Algorithm: acquire at the EI argmax, re-coalesce, re-estimate the
/// posterior (refitting the prior mean parameters from the coalesced data
/// when refit_prior is set, falling back to the last valid theta), until
/// max EI <= tau or the iteration cap. Deterministic given (seed, oracle).
EmulationRunResult run_emulation_algorithm(const CostOracle& oracle,
                                           const EmulationRunConfig& config);

}  // namespace ohs
