#include "ohs/drift_sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ohs/csv.hpp"
#include "ohs/math_util.hpp"
#include "ohs/logistic.hpp"
#include "ohs/rng.hpp"

namespace ohs {

std::pair<double, double> dominance_delta_bounds(const DominanceBoundInputs& in) {
    in.validate();
    const double inf = std::numeric_limits<double>::infinity();

    auto l1_term = [&](double gamma, double kappa) {
        const double denom = 2.0 * in.alpha_lip + gamma * in.alpha2;
        return denom > 0.0 ? gamma * kappa / denom : inf;
    };
    const double delta_l1 = std::min(l1_term(in.gamma1, in.kappa1),
                                     l1_term(in.gamma2, in.kappa2));

    // As printed: (sqrt(A^2 + 4*alpha2*gamma^2*kappa) - A) / (2*alpha^2)
    // with A = 2*alpha^2 + alpha2*gamma^2. Vanishing alpha makes the
    // horizon unbounded.
    auto l2_term = [&](double gamma, double kappa) {
        const double denom = 2.0 * in.alpha_lip * in.alpha_lip;
        if (denom <= 0.0) return inf;
        const double A = denom + in.alpha2 * gamma * gamma;
        return (std::sqrt(A * A + 4.0 * in.alpha2 * gamma * gamma * kappa) - A) / denom;
    };
    const double delta_l2 = std::min(l2_term(in.gamma1, in.kappa1),
                                     l2_term(in.gamma2, in.kappa2));
    return {delta_l1, delta_l2};
}

const char* strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::no_update: return "no_update";
        case StrategyKind::naive_update: return "naive_update";
        case StrategyKind::holdout_update: return "holdout_update";
    }
    return "unknown";
}

namespace {

// Smooth coefficient paths: squared-exponential temporal correlation with
// length-scale one epoch, sampled on the timepoint grid, then rescaled so
// every per-step increment respects the drift_scale Lipschitz bound
// (measured in epoch time).
Eigen::MatrixXd sample_drift_paths(int n_coef, int timepoints, int per_epoch,
                                   double drift_scale, Rng& rng) {
    Eigen::MatrixXd paths = Eigen::MatrixXd::Zero(n_coef, timepoints);
    if (drift_scale <= 0.0 || timepoints < 2) return paths;

    Eigen::MatrixXd K(timepoints, timepoints);
    for (int i = 0; i < timepoints; ++i) {
        for (int j = 0; j < timepoints; ++j) {
            const double dt = static_cast<double>(i - j) / per_epoch;
            K(i, j) = std::exp(-dt * dt);
        }
        K(i, i) += 1e-10;
    }
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(K).matrixL();

    const double step_epochs = 1.0 / per_epoch;
    for (int c = 0; c < n_coef; ++c) {
        Eigen::VectorXd z(timepoints);
        for (int t = 0; t < timepoints; ++t) z[t] = rng.normal();
        Eigen::VectorXd path = drift_scale * (L * z);
        double max_slope = 0.0;
        for (int t = 1; t < timepoints; ++t)
            max_slope = std::max(max_slope, std::abs(path[t] - path[t - 1]) / step_epochs);
        if (max_slope > drift_scale) path *= drift_scale / max_slope;
        paths.row(c) = path.transpose();
    }
    return paths;
}

struct World {
    PopulationConfig cfg;
    int n_cov;                   // visible + latent
    Eigen::VectorXd base_coef;   // length n_cov
    double base_intercept;
    Eigen::MatrixXd drift;       // n_cov x timepoints

    Eigen::VectorXd coef_at(int t) const { return base_coef + drift.col(t); }

    // Mixed clinical-style covariates: every fourth visible one is a rare
    // binary flag, every third a wide-scale continuous marker, the rest
    // standard normal. The latent covariate is standard normal.
    void realize_covariates(Eigen::MatrixXd& X, Rng& rng) const {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (int j = 0; j < n_cov; ++j) {
                if (j < cfg.n_visible && j % 4 == 3)
                    X(i, j) = rng.uniform() < 0.06 ? 1.0 : 0.0;
                else if (j < cfg.n_visible && j % 3 == 2)
                    X(i, j) = rng.normal(0.0, 1.8);
                else
                    X(i, j) = rng.normal();
            }
        }
    }

    // True risk for rows of X (all covariates).
    Eigen::VectorXd risk(const Eigen::MatrixXd& X, int t) const {
        Eigen::VectorXd eta = (X * coef_at(t)).array() + base_intercept;
        return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    }
};

// Apply the intervention in place: shrink every covariate whose true-risk
// contribution is positive, visible and latent alike.
void intervene_row(Eigen::MatrixXd& X, Eigen::Index row, const Eigen::VectorXd& coef,
                   double effect) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (coef[j] * X(row, j) > 0.0) X(row, j) *= (1.0 - effect);
}

std::vector<Eigen::Index> top_fraction(const Eigen::VectorXd& scores,
                                       const std::vector<Eigen::Index>& eligible,
                                       double fraction) {
    auto count = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(eligible.size())));
    count = std::min(count, eligible.size());
    std::vector<Eigen::Index> order(eligible);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                      order.end(), [&](Eigen::Index a, Eigen::Index b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    order.resize(count);
    return order;
}

}  // namespace

void DominanceTraces::to_csv(const std::string& path) const {
    // Long format with a textual strategy column; written directly since
    // the shared writer is numeric-only.
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace CSV: " + path);
    out << "t,strategy,cost\n";
    for (std::size_t i = 0; i < timepoint.size(); ++i) {
        out << timepoint[i] << ",no_update," << format_double(no_update[i]) << "\n";
        out << timepoint[i] << ",naive_update," << format_double(naive_update[i]) << "\n";
        out << timepoint[i] << ",holdout_update," << format_double(holdout_update[i])
            << "\n";
    }
}

DominanceTraces simulate_dominance(const PopulationConfig& config) {
    config.validate();
    const int T = config.timepoints();
    const int n_cov = config.n_visible + config.n_latent;
    const int pop = config.population_size;

    Rng coef_rng(derive_seed(config.seed, 1));
    World world;
    world.cfg = config;
    world.n_cov = n_cov;
    world.base_coef.resize(n_cov);
    // Risk factors are predominantly risk-increasing, with rare strong
    // binary flags concentrating tail risk; the intercept keeps the top
    // decile under the steep part of the link, where better ranking
    // genuinely lowers post-intervention totals.
    for (int j = 0; j < config.n_visible; ++j) {
        if (j % 4 == 3)
            world.base_coef[j] = 1.6;
        else
            world.base_coef[j] = 0.05 + std::abs(coef_rng.normal(0.0, 0.35));
    }
    for (int j = config.n_visible; j < n_cov; ++j)
        world.base_coef[j] = 1.2;
    world.base_intercept = -3.6;

    Rng drift_rng(derive_seed(config.seed, 2));
    world.drift = sample_drift_paths(n_cov, T, config.timepoints_per_epoch,
                                     config.drift_scale, drift_rng);

    DominanceTraces traces;
    traces.timepoint.resize(T);
    traces.no_update.resize(T);
    traces.naive_update.resize(T);
    traces.holdout_update.resize(T);

    // Initial score: a pre-deployment sample at t = 0, outcomes realized
    // with no intervention in place.
    LogisticModel initial;
    {
        Rng rng(derive_seed(config.seed, 3));
        Eigen::MatrixXd X(pop, n_cov);
        world.realize_covariates(X, rng);
        const Eigen::VectorXd risk = world.risk(X, 0);
        Eigen::VectorXd y(pop);
        for (int i = 0; i < pop; ++i) y[i] = rng.bernoulli(risk[i]) ? 1.0 : 0.0;
        initial = fit_logistic(X.leftCols(config.n_visible), y);
        if (initial.stabilized) ++traces.stabilized_fits;
    }

    struct StrategyState {
        StrategyKind kind;
        LogisticModel score;
    };
    std::vector<StrategyState> strategies{{StrategyKind::no_update, initial},
                                          {StrategyKind::naive_update, initial},
                                          {StrategyKind::holdout_update, initial}};

    for (int t = 0; t < T; ++t) {
        traces.timepoint[t] = t;
        const bool holdout_tp = (t % config.timepoints_per_epoch) ==
                                config.timepoints_per_epoch - 1;
        if (holdout_tp) traces.holdout_timepoints.push_back(t);

        // Shared covariate realization and outcome uniforms across
        // strategies, so identical policies give identical traces.
        Rng pop_rng(derive_seed(config.seed, 100 + t));
        Eigen::MatrixXd X(pop, n_cov);
        world.realize_covariates(X, pop_rng);
        std::vector<double> outcome_u(pop);
        for (int i = 0; i < pop; ++i) outcome_u[i] = pop_rng.uniform();

        // Holdout membership for this timepoint (used on holdout
        // timepoints only).
        std::vector<Eigen::Index> holdout_members;
        if (holdout_tp) {
            Rng hs_rng(derive_seed(config.seed, 5000 + t));
            std::vector<Eigen::Index> all(pop);
            std::iota(all.begin(), all.end(), 0);
            for (int i = 0; i < config.holdout_size; ++i) {
                const auto j = static_cast<Eigen::Index>(
                    hs_rng.uniform_int(i, pop - 1));
                std::swap(all[i], all[j]);
            }
            holdout_members.assign(all.begin(), all.begin() + config.holdout_size);
            std::sort(holdout_members.begin(), holdout_members.end());
        }

        const Eigen::VectorXd true_coef = world.coef_at(t);
        for (auto& strat : strategies) {
            const bool uses_holdout =
                strat.kind == StrategyKind::holdout_update && holdout_tp;

            std::vector<char> is_holdout(pop, 0);
            if (uses_holdout)
                for (Eigen::Index i : holdout_members) is_holdout[static_cast<std::size_t>(i)] = 1;

            const Eigen::VectorXd scores =
                strat.score.predict_all(X.leftCols(config.n_visible));
            std::vector<Eigen::Index> eligible;
            eligible.reserve(pop);
            for (int i = 0; i < pop; ++i)
                if (!is_holdout[i]) eligible.push_back(i);
            const std::vector<Eigen::Index> treated =
                top_fraction(scores, eligible, config.treat_fraction);

            Eigen::MatrixXd X_post = X;
            for (Eigen::Index i : treated) {
                if (uses_holdout && is_holdout[static_cast<std::size_t>(i)])
                    traces.holdout_intervention_audit_ok = false;
                intervene_row(X_post, i, true_coef, config.intervention_effect);
            }

            const Eigen::VectorXd post_risk = world.risk(X_post, t);
            const double cost = post_risk.sum();
            switch (strat.kind) {
                case StrategyKind::no_update: traces.no_update[t] = cost; break;
                case StrategyKind::naive_update: traces.naive_update[t] = cost; break;
                case StrategyKind::holdout_update: traces.holdout_update[t] = cost; break;
            }

            // Epoch-boundary refits from this timepoint's recorded data:
            // recorded covariates are the pre-intervention measurements.
            if (holdout_tp && strat.kind != StrategyKind::no_update) {
                Eigen::VectorXd y(pop);
                for (int i = 0; i < pop; ++i)
                    y[i] = outcome_u[static_cast<std::size_t>(i)] < post_risk[i] ? 1.0 : 0.0;
                if (strat.kind == StrategyKind::naive_update) {
                    LogisticModel refit = fit_logistic(X.leftCols(config.n_visible), y);
                    if (refit.stabilized) ++traces.stabilized_fits;
                    strat.score = refit;
                } else {
                    Eigen::MatrixXd Xh(config.holdout_size, config.n_visible);
                    Eigen::VectorXd yh(config.holdout_size);
                    for (int r = 0; r < config.holdout_size; ++r) {
                        Xh.row(r) = X.row(holdout_members[static_cast<std::size_t>(r)])
                                        .head(config.n_visible);
                        yh[r] = y[holdout_members[static_cast<std::size_t>(r)]];
                    }
                    LogisticModel refit = fit_logistic(Xh, yh);
                    if (refit.stabilized) ++traces.stabilized_fits;
                    strat.score = refit;
                }
            }
        }
    }
    return traces;
}

void CostStructureResult::to_csv(const std::string& path) const {
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        rows.push_back({static_cast<double>(grid[i]), k2_mean[i], k2_sd[i],
                        static_cast<double>(replicates)});
    write_csv(path, {"n", "k2_mean", "k2_sd", "replicates"}, rows);
}

std::vector<double> CostStructureResult::ell_curve(double N) const {
    std::vector<double> ell(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        ell[i] = k1_mean * grid[i] + k2_mean[i] * (N - grid[i]);
    return ell;
}

CostStructureResult simulate_cost_structure(const CostStructureConfig& config) {
    if (config.population_size < 10)
        throw DomainError("cost structure: population too small");
    if (config.replicates < 1) throw DomainError("cost structure: replicates >= 1");

    std::vector<int> grid = config.holdout_grid;
    if (grid.empty()) {
        for (int i = 0; i < 30; ++i)
            grid.push_back(100 + i * (4000 - 100) / 29);
    }
    for (int n : grid)
        if (n < 10 || n >= config.population_size)
            throw DomainError("cost structure: grid entry outside 10..population-1");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const int p = config.n_covariates;
    // Fixed ground-truth coefficients; the interaction terms are invisible
    // to the linear learner.
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = (j % 2 == 0 ? 1.0 : -1.0) * (0.9 - 0.1 * j);
    const double intercept = -1.9;

    std::vector<std::vector<double>> k2_by_grid(grid.size());
    std::vector<double> k1s;

    for (int rep = 0; rep < config.replicates; ++rep) {
        Rng rng(derive_seed(config.seed, 7000 + rep));
        const int pop = config.population_size;
        Eigen::MatrixXd X(pop, p);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();

        Eigen::VectorXd eta = (X * beta).array() + intercept;
        if (config.interactions) {
            for (int i = 0; i < pop; ++i)
                eta[i] += 0.7 * X(i, 0) * X(i, 1) - 0.6 * X(i, 2) * X(i, 3) +
                          0.5 * X(i, 4) * X(i, 5);
        }
        Eigen::VectorXd risk =
            eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
        Eigen::VectorXd y(pop);
        for (int i = 0; i < pop; ++i) y[i] = rng.bernoulli(risk[i]) ? 1.0 : 0.0;

        // Baseline: risk-score-free care treats a uniformly random
        // treat_fraction, so per-sample expected cost is
        // 0.5*pi + (1-pi)*prevalence.
        k1s.push_back(0.5 * config.treat_fraction +
                      (1.0 - config.treat_fraction) * y.mean());

        std::vector<int> perm(pop);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = pop - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_int(0, i));
            std::swap(perm[i], perm[j]);
        }

        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const int n = grid[gi];
            Eigen::MatrixXd Xtr(n, p);
            Eigen::VectorXd ytr(n);
            for (int i = 0; i < n; ++i) {
                Xtr.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
                ytr[i] = y[perm[static_cast<std::size_t>(i)]];
            }
            const LogisticModel model = fit_logistic(Xtr, ytr);

            const int m = pop - n;
            Eigen::MatrixXd Xte(m, p);
            Eigen::VectorXd yte(m);
            for (int i = 0; i < m; ++i) {
                Xte.row(i) = X.row(perm[static_cast<std::size_t>(n + i)]);
                yte[i] = y[perm[static_cast<std::size_t>(n + i)]];
            }
            const Eigen::VectorXd scores = model.predict_all(Xte);

            std::vector<Eigen::Index> all(m);
            std::iota(all.begin(), all.end(), 0);
            const std::vector<Eigen::Index> treated =
                top_fraction(scores, all, config.treat_fraction);
            std::vector<char> is_treated(m, 0);
            for (Eigen::Index i : treated) is_treated[static_cast<std::size_t>(i)] = 1;

            double cost = 0.0;
            for (int i = 0; i < m; ++i)
                cost += is_treated[i] ? 0.5 : (yte[i] > 0.5 ? 1.0 : 0.0);
            k2_by_grid[gi].push_back(cost / m);
        }
    }

    CostStructureResult res;
    res.grid = grid;
    res.replicates = config.replicates;
    res.k1_mean = mean(k1s);
    res.k1_sd = sample_sd(k1s);
    res.k2_mean.resize(grid.size());
    res.k2_sd.resize(grid.size());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        res.k2_mean[gi] = mean(k2_by_grid[gi]);
        res.k2_sd[gi] = sample_sd(k2_by_grid[gi]);
    }
    return res;
}

}  // namespace ohs
