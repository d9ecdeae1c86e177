#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ohs/errors.hpp"

namespace ohs {

/// Inputs of the dominance-horizon bounds: drift magnitude/mass (gamma1,
/// kappa1), intervention magnitude/mass (gamma2, kappa2), the Lipschitz
/// constant of the risk function in time (alpha_lip) and of the covariate
/// distribution in total variation (alpha2).
struct DominanceBoundInputs {
    double gamma1 = 0.0;
    double kappa1 = 0.0;
    double gamma2 = 0.0;
    double kappa2 = 0.0;
    double alpha_lip = 0.0;
    double alpha2 = 0.0;

    void validate() const {
        if (!(gamma1 > 0.0 && gamma2 > 0.0 && alpha_lip >= 0.0 && alpha2 >= 0.0))
            throw DomainError("dominance bounds: gammas must be > 0, alphas >= 0");
        if (!(kappa1 > 0.0 && kappa1 <= 1.0 && kappa2 > 0.0 && kappa2 <= 1.0))
            throw DomainError("dominance bounds: kappas must lie in (0,1]");
    }
};

/// Time horizons below which the holdout-updated score dominates both the
/// stale and the naively updated score, in mean-absolute-error (first) and
/// mean-squared-error (second) terms. Degenerate no-drift limits return
/// +infinity.
std::pair<double, double> dominance_delta_bounds(const DominanceBoundInputs& inputs);

struct PopulationConfig {
    int population_size = 20000;
    int n_visible = 22;
    int n_latent = 1;
    int timepoints_per_epoch = 10;
    int epochs = 5;
    double treat_fraction = 0.1;
    double intervention_effect = 0.5;  // multiplies positive-risk contributions by 1-this
    double drift_scale = 1.0;          // Lipschitz bound of each coefficient per epoch
    int holdout_size = 2500;           // for the holdout-update strategy
    std::uint64_t seed = 0;

    int timepoints() const { return timepoints_per_epoch * epochs; }

    void validate() const {
        if (population_size < 1) throw DomainError("population config: population_size >= 1");
        if (n_visible < 1 || n_latent < 0)
            throw DomainError("population config: covariate counts invalid");
        if (timepoints_per_epoch < 1 || epochs < 1)
            throw DomainError("population config: timepoints_per_epoch and epochs >= 1");
        if (!(treat_fraction > 0.0 && treat_fraction < 1.0))
            throw DomainError("population config: treat_fraction in (0,1)");
        if (!(intervention_effect >= 0.0 && intervention_effect <= 1.0))
            throw DomainError("population config: intervention_effect in [0,1]");
        if (!(drift_scale >= 0.0)) throw DomainError("population config: drift_scale >= 0");
        if (holdout_size < 1 || holdout_size >= population_size)
            throw DomainError("population config: holdout_size in 1..population_size-1");
    }
};

enum class StrategyKind { no_update, naive_update, holdout_update };

const char* strategy_name(StrategyKind kind);

/// Per-timepoint total post-intervention risk for the three updating
/// strategies on a shared population realization. Deterministic given the
/// config seed.
struct DominanceTraces {
    std::vector<int> timepoint;
    std::vector<double> no_update;
    std::vector<double> naive_update;
    std::vector<double> holdout_update;
    std::vector<int> holdout_timepoints;  // final timepoint of each epoch
    bool holdout_intervention_audit_ok = true;
    int stabilized_fits = 0;

    /// Long format `t,strategy,cost`.
    void to_csv(const std::string& path) const;
};

DominanceTraces simulate_dominance(const PopulationConfig& config);

/// The emergent-OHS study: a fixed population, a logistic learner trained
/// on n samples, scored on the rest under the 0 / 0.5 / 1 cost map at the
/// treat-fraction threshold.
struct CostStructureConfig {
    int population_size = 5000;
    int n_covariates = 7;
    bool interactions = false;  // nonlinear ground truth (learner stays linear)
    double treat_fraction = 0.1;
    std::vector<int> holdout_grid;  // defaults to 30 sizes over 100..4000
    int replicates = 20;
    std::uint64_t seed = 0;
};

struct CostStructureResult {
    std::vector<int> grid;
    std::vector<double> k2_mean;
    std::vector<double> k2_sd;
    double k1_mean = 0.0;
    double k1_sd = 0.0;
    int replicates = 0;

    /// `n,k2_mean,k2_sd,replicates`.
    void to_csv(const std::string& path) const;
    /// Total-cost curve l(n) = k1*n + k2(n)*(N-n) on the grid.
    std::vector<double> ell_curve(double N) const;
};

CostStructureResult simulate_cost_structure(const CostStructureConfig& config);

}  // namespace ohs
