#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ohs/confidence.hpp"

namespace ohs {

/// External cost estimator: n -> (estimate of k2(n), sampling variance).
using CostOracle = std::function<std::pair<double, double>(int)>;

/// Greedy step of the sequential parametric design: among the candidates,
/// pick the size whose addition minimizes the Monte Carlo estimate of the
/// expected OHS confidence-interval width, the expectation taken over the
/// new observation drawn from the current fitted model with variance
/// sigma_new. Draws whose refit has no interior optimum are excluded; a
/// candidate with more than half its draws failing is invalid, and if every
/// candidate is invalid the choice falls back to uniform (reported via
/// `fallback`).
struct NextPointChoice {
    int n = 0;
    double expected_width = 0.0;
    bool fallback = false;
};

NextPointChoice next_point_parametric(const ObservationSet& obs, const ThetaFit& fit,
                                      const std::vector<int>& candidates, double sigma_new,
                                      int mc_draws, std::uint64_t seed);

struct ParametricRunConfig {
    std::vector<int> initial_design;  // explicit initial sizes; when empty,
    int initial_random = 5;           // draw this many uniformly from the range
    int range_lo = 1;                 // sampling range for random sizes
    int range_hi = 0;                 // 0 means N
    int total_points = 25;            // final |n| including the initial design
    double alpha = 0.1;
    std::vector<int> candidates;      // empty: default grid thinned to 50
    int mc_draws = 100;
    double random_fraction = 0.0;     // chance an acquisition is uniform instead of greedy
    double sigma_new = 0.0;           // planning variance; 0: mean of observed variances
    bool refresh_final = false;       // re-estimate every design point before the final fit
    std::uint64_t seed = 0;
    // Known problem constants (with optional standard errors for the CIs).
    double k1 = 0.0, N = 0.0;
    double k1_se = 0.0, N_se = 0.0;
};

struct ParametricAcquisition {
    int iteration = 0;
    int n = 0;
    double value = 0.0;
    double variance = 0.0;
    bool greedy = false;
    bool fallback = false;
    double expected_width = 0.0;  // NaN for random picks
    double n_star_hat = 0.0;      // estimate after this acquisition (NaN if undefined)
};

struct ParametricRunResult {
    OHSResult result;  // method = parametric, uncertainty = asymptotic CI for n*
    ThetaFit fit;
    AsymptoticCis cis;
    ObservationSet design;
    std::vector<ParametricAcquisition> trace;

    void trace_to_csv(const std::string& path) const;
};

/// Full sequential loop: seed the design, acquire until total_points,
/// optionally refresh all estimates, then fit and report the OHS with its
/// asymptotic interval. Deterministic given (seed, oracle).
ParametricRunResult run_parametric_algorithm(const CostOracle& oracle,
                                             const ParametricRunConfig& config);

}  // namespace ohs
