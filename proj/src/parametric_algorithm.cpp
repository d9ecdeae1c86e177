#include "ohs/parametric_algorithm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ohs/csv.hpp"
#include "ohs/gradients.hpp"
#include "ohs/math_util.hpp"
#include "ohs/parallel.hpp"
#include "ohs/rng.hpp"

namespace ohs {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Unclipped half-width of the asymptotic n* interval; the planning loop
// compares widths, so boundary clipping would only blur the criterion.
double halfwidth_n(const ThetaFit& fit, double alpha) {
    const CostParameters params = fit.params();
    const GradientVector beta = ohs_gradient(params);
    double qf = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) qf += beta.d[r] * fit.covariance[r][c] * beta.d[c];
    qf += beta.d[3] * beta.d[3] * fit.k1_se * fit.k1_se;
    qf += beta.d[4] * beta.d[4] * fit.N_se * fit.N_se;
    if (!(qf >= -1e-12) || !std::isfinite(qf))
        throw CovarianceInvalidError("next_point: invalid quadratic form");
    return z_two_sided(alpha) * std::sqrt(std::max(qf, 0.0));
}

FitOptions warm_options() {
    FitOptions fast;
    fast.starts = 1;
    fast.max_iterations = 60;
    fast.throw_on_failure = false;
    return fast;
}

}  // namespace

NextPointChoice next_point_parametric(const ObservationSet& obs, const ThetaFit& fit,
                                      const std::vector<int>& candidates, double sigma_new,
                                      int mc_draws, std::uint64_t seed) {
    if (candidates.empty()) throw DomainError("next_point_parametric: no candidates");
    if (mc_draws < 1) throw DomainError("next_point_parametric: mc_draws must be >= 1");
    if (!(sigma_new > 0.0)) throw DomainError("next_point_parametric: sigma_new must be > 0");

    const double alpha = 0.1;  // width comparisons are level-independent up to z_alpha
    const double sigma2 = sigma_new * sigma_new;
    const FitOptions fast = warm_options();

    std::vector<double> expected(candidates.size(), kNaN);
    parallel_for(candidates.size(), [&](std::size_t ci) {
        const int cand = candidates[ci];
        double width_sum = 0.0;
        int ok = 0;
        for (int d = 0; d < mc_draws; ++d) {
            Rng rng(derive_seed(seed, ci * static_cast<std::size_t>(mc_draws) + d));
            const double draw = rng.normal(k2_power_law(cand, fit.theta), sigma_new);
            ObservationSet augmented = obs;
            augmented.push(cand, draw, sigma2);
            try {
                ThetaFit refit = fit_power_law(augmented, fit.theta, fast);
                if (!refit.converged) continue;
                refit.with_known(fit.k1, fit.N, fit.k1_se, fit.N_se);
                width_sum += 2.0 * halfwidth_n(refit, alpha);
                ++ok;
            } catch (const Error&) {
                // Failed draw (no interior OHS or invalid covariance): excluded.
            }
        }
        if (ok * 2 > mc_draws) expected[ci] = width_sum / ok;
    });

    NextPointChoice choice;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (std::isfinite(expected[ci]) && expected[ci] < best) {
            best = expected[ci];
            choice.n = candidates[ci];
            choice.expected_width = expected[ci];
        }
    }
    if (!std::isfinite(best)) {
        // Every candidate failed: fall back to a uniform pick.
        Rng rng(derive_seed(seed, 0x5eed));
        choice.n = candidates[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<long long>(candidates.size()) - 1))];
        choice.expected_width = kNaN;
        choice.fallback = true;
    }
    return choice;
}

void ParametricRunResult::trace_to_csv(const std::string& path) const {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (const auto& rec : trace) {
        rows.push_back({static_cast<double>(rec.iteration), static_cast<double>(rec.n),
                        rec.value, rec.variance, rec.greedy ? 1.0 : 0.0,
                        rec.fallback ? 1.0 : 0.0, rec.expected_width, rec.n_star_hat});
    }
    write_csv(path, {"iter", "n", "value", "variance", "greedy", "fallback",
                     "expected_width", "n_star_hat"},
              rows);
}

ParametricRunResult run_parametric_algorithm(const CostOracle& oracle,
                                             const ParametricRunConfig& config) {
    if (!(config.N >= 2.0)) throw DomainError("run_parametric_algorithm: N must be >= 2");
    if (!(config.k1 > 0.0)) throw DomainError("run_parametric_algorithm: k1 must be > 0");
    const int range_hi = config.range_hi > 0 ? config.range_hi : static_cast<int>(config.N);
    if (range_hi <= config.range_lo)
        throw DomainError("run_parametric_algorithm: empty sampling range");

    Rng rng(derive_seed(config.seed, 0));

    ParametricRunResult out;
    std::vector<int> initial = config.initial_design;
    if (initial.empty()) {
        for (int i = 0; i < config.initial_random; ++i)
            initial.push_back(static_cast<int>(rng.uniform_int(config.range_lo, range_hi)));
    }
    {
        std::set<int> distinct(initial.begin(), initial.end());
        if (distinct.size() < 3)
            throw DomainError(
                "run_parametric_algorithm: initial design needs >= 3 distinct sizes");
    }

    for (std::size_t i = 0; i < initial.size(); ++i) {
        const auto [value, variance] = oracle(initial[i]);
        out.design.push(initial[i], value, variance);
        out.trace.push_back(ParametricAcquisition{
            -static_cast<int>(initial.size() - i), initial[i], value, variance, false,
            false, kNaN, kNaN});
    }

    std::vector<int> candidates = config.candidates;
    if (candidates.empty()) {
        // Default: the shared evaluation grid thinned to 50 points over the
        // sampling range.
        const auto grid = default_grid(static_cast<double>(range_hi) + 1.0, 50);
        for (int g : grid)
            if (g >= config.range_lo) candidates.push_back(g);
        if (candidates.empty()) candidates.push_back(config.range_lo);
    }

    ThetaFit fit;
    bool have_fit = false;
    auto try_fit = [&](bool final_pass) {
        FitOptions opts;  // full multi-start; one fit per acquisition is cheap
        opts.throw_on_failure = final_pass;
        ThetaFit f = have_fit ? fit_power_law(out.design, fit.theta, opts)
                              : fit_power_law(out.design, std::nullopt, opts);
        f.with_known(config.k1, config.N, config.k1_se, config.N_se);
        if (f.converged) {
            fit = f;
            have_fit = true;
        }
        return f.converged;
    };

    int iteration = 0;
    while (static_cast<int>(out.design.size()) < config.total_points) {
        ++iteration;
        const bool go_random =
            config.random_fraction > 0.0 && rng.uniform() < config.random_fraction;

        ParametricAcquisition rec;
        rec.iteration = iteration;
        rec.expected_width = kNaN;

        bool fit_ok = false;
        try {
            fit_ok = try_fit(false);
        } catch (const Error&) {
            fit_ok = false;
        }

        if (go_random || !fit_ok) {
            rec.n = static_cast<int>(rng.uniform_int(config.range_lo, range_hi));
            rec.greedy = false;
        } else {
            double sigma_new = config.sigma_new;
            if (!(sigma_new > 0.0)) {
                double acc = 0.0;
                for (double v : out.design.variances) acc += v;
                sigma_new = std::sqrt(acc / static_cast<double>(out.design.size()));
            }
            const NextPointChoice choice = next_point_parametric(
                out.design, fit, candidates, sigma_new, config.mc_draws,
                derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(iteration)));
            rec.n = choice.n;
            rec.greedy = !choice.fallback;
            rec.fallback = choice.fallback;
            rec.expected_width = choice.expected_width;
        }

        const auto [value, variance] = oracle(rec.n);
        rec.value = value;
        rec.variance = variance;
        out.design.push(rec.n, value, variance);

        rec.n_star_hat = kNaN;
        try {
            if (try_fit(false))
                rec.n_star_hat = static_cast<double>(find_ohs_root(fit.params()).n_star);
        } catch (const Error&) {
        }
        out.trace.push_back(rec);
    }

    if (config.refresh_final) {
        // Fresh estimates at every design point, guarding against
        // regression-to-the-mean from width-driven selection.
        for (std::size_t i = 0; i < out.design.size(); ++i) {
            const auto [value, variance] = oracle(out.design.sizes[i]);
            out.design.values[i] = value;
            out.design.variances[i] = variance;
        }
    }

    try {
        try_fit(true);
        if (!have_fit)
            throw FitFailureError("run_parametric_algorithm: final fit did not converge");
        out.fit = fit;
        out.cis = asymptotic_ci(fit, config.alpha);
        const OHSResult root = find_ohs_root(fit.params());
        out.result = root;
        out.result.method = OHSResult::Method::parametric;
        out.result.uncertainty = out.cis.ci_n;
    } catch (const Error& e) {
        throw AlgorithmFailureError(
            std::string("run_parametric_algorithm: final estimation failed after ") +
            std::to_string(out.design.size()) + " acquisitions: " + e.what());
    }
    return out;
}

}  // namespace ohs
