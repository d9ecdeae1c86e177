#include "ohs/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ohs/csv.hpp"
#include "ohs/math_util.hpp"
#include "ohs/power_law_fit.hpp"

namespace ohs {

CoalescedObservations coalesce(const ObservationSet& obs, CoalesceVariance variance_rule,
                               CoalesceCenter center) {
    obs.validate();
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < obs.size(); ++i) groups[obs.sizes[i]].push_back(i);

    CoalescedObservations out;
    out.unique_sizes.reserve(groups.size());
    out.means.reserve(groups.size());
    out.variances.reserve(groups.size());
    for (const auto& [n, idx] : groups) {
        double precision = 0.0, weighted = 0.0;
        for (std::size_t i : idx) {
            const double w = 1.0 / obs.variances[i];
            precision += w;
            weighted += w * obs.values[i];
        }
        double centre = weighted / precision;
        if (center == CoalesceCenter::median) {
            std::vector<double> vals;
            vals.reserve(idx.size());
            for (std::size_t i : idx) vals.push_back(obs.values[i]);
            centre = median(std::move(vals));
        }
        out.unique_sizes.push_back(n);
        out.means.push_back(centre);
        out.variances.push_back(variance_rule == CoalesceVariance::reciprocal
                                    ? 1.0 / precision
                                    : precision);
    }
    return out;
}

// One factorization of the (K + D) system shared by mu and psi, with jitter
// escalation; squared-exponential systems go numerically singular once
// design points crowd within the length-scale.
struct detail::PosteriorBuilder {
    static EmulatorPosterior build(const CoalescedObservations& data, const GPConfig& config,
                                   const std::vector<double>& diagonal,
                                   std::function<double(double)> kappa,
                                   bool baseline_from_mu);
};

namespace {
inline EmulatorPosterior build(const CoalescedObservations& data, const GPConfig& config,
                               const std::vector<double>& diagonal,
                               std::function<double(double)> kappa, bool baseline_from_mu) {
    return detail::PosteriorBuilder::build(data, config, diagonal, std::move(kappa),
                                           baseline_from_mu);
}
}  // namespace

double EmulatorPosterior::prior_var(double n) const {
    double v = config_.sigma_u2;
    if (kappa_) v += kappa_(n);
    return v;
}

Eigen::VectorXd EmulatorPosterior::kvec(double n) const {
    const auto m = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd k(m);
    for (Eigen::Index i = 0; i < m; ++i)
        k[i] = config_.kernel(n, data_.unique_sizes[static_cast<std::size_t>(i)]);
    return k;
}

double EmulatorPosterior::mu(double n) const {
    if (data_.size() == 0) return config_.prior_mean(n);
    return config_.prior_mean(n) + kvec(n).dot(weights_);
}

double EmulatorPosterior::psi(double n) const {
    const double prior = prior_var(n);
    if (data_.size() == 0) return prior;
    const Eigen::VectorXd k = kvec(n);
    const Eigen::VectorXd v = factor_.matrixL().solve(k);
    double out = prior - v.squaredNorm();
    if (out < -1e-8 * config_.sigma_u2)
        throw ConditioningError("emulator: posterior variance " + std::to_string(out) +
                                " below tolerance; the kernel system needs jitter");
    // Magnitudes inside the cancellation noise of the subtraction count as
    // converged; snapping them lets the psi = 0 limit conventions apply.
    if (out < 1e-12 * config_.sigma_u2) out = 0.0;
    return out;
}

EmulatorPosterior detail::PosteriorBuilder::build(const CoalescedObservations& data,
                                                  const GPConfig& config,
                                                  const std::vector<double>& diagonal,
                                                  std::function<double(double)> kappa,
                                                  bool baseline_from_mu) {
    EmulatorPosterior post;
    post.config_ = config;
    post.data_ = data;
    post.kappa_ = std::move(kappa);

    const auto m = static_cast<Eigen::Index>(data.size());
    if (m == 0) {
        post.d_minus_ = std::numeric_limits<double>::infinity();
        post.baseline_ = post.d_minus_;
        return post;
    }

    Eigen::MatrixXd A(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k = config.kernel(data.unique_sizes[static_cast<std::size_t>(i)],
                                           data.unique_sizes[static_cast<std::size_t>(j)]);
            A(i, j) = k;
            A(j, i) = k;
        }
        A(i, i) += diagonal[static_cast<std::size_t>(i)];
    }

    Eigen::VectorXd resid(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        resid[i] = data.means[idx] - config.prior_mean(data.unique_sizes[idx]);
    }

    const double jitters[] = {0.0, 1e-8, 1e-6, 1e-4};
    bool ok = false;
    for (double j : jitters) {
        Eigen::MatrixXd Aj = A;
        if (j > 0.0) Aj.diagonal().array() += j * config.sigma_u2;
        post.factor_.compute(Aj);
        if (post.factor_.info() == Eigen::Success) {
            post.jitter_ = j * config.sigma_u2;
            ok = true;
            break;
        }
    }
    if (!ok)
        throw ConditioningError(
            "emulator: kernel system not positive definite even with jitter 1e-4*sigma_u2");

    post.weights_ = post.factor_.solve(resid);
    post.d_minus_ = *std::min_element(data.means.begin(), data.means.end());
    if (baseline_from_mu) {
        double best = std::numeric_limits<double>::infinity();
        for (int n : data.unique_sizes) best = std::min(best, post.mu(n));
        post.baseline_ = best;
    } else {
        post.baseline_ = post.d_minus_;
    }
    return post;
}

EmulatorPosterior posterior(const ObservationSet& obs, const GPConfig& config) {
    config.validate();
    const CoalescedObservations data = coalesce(obs);
    return build(data, config, data.variances, nullptr, false);
}

EmulatorPosterior posterior_from_coalesced(const CoalescedObservations& data,
                                           const GPConfig& config) {
    config.validate();
    for (double v : data.variances)
        if (!(v > 0.0)) throw DomainError("posterior_from_coalesced: variances must be > 0");
    return build(data, config, data.variances, nullptr, false);
}

EmulatorPosterior posterior_with_nugget(const ObservationSet& obs, const GPConfig& config,
                                        const std::function<double(double)>& kappa,
                                        CoalesceCenter center) {
    config.validate();
    if (!kappa) throw DomainError("posterior_with_nugget: kappa required");
    const CoalescedObservations data = coalesce(obs, CoalesceVariance::reciprocal, center);
    std::vector<double> diag(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double k = kappa(data.unique_sizes[i]);
        if (!(k > 0.0))
            throw DomainError("posterior_with_nugget: kappa must be positive on 1..N");
        diag[i] = k;
    }
    return build(data, config, diag, kappa, true);
}

double expected_improvement_value(double gap, double variance) {
    if (variance <= 0.0) return std::max(0.0, gap);
    const double sd = std::sqrt(variance);
    const double z = gap / sd;
    return gap * normal_cdf(z) + sd * normal_pdf(z);
}

double expected_improvement(double n, const EmulatorPosterior& post) {
    return expected_improvement_value(post.improvement_baseline() - post.mu(n), post.psi(n));
}

int next_point_ei(const EmulatorPosterior& post, const std::vector<int>& candidates) {
    if (candidates.empty()) throw DomainError("next_point_ei: no candidates");
    std::vector<int> sorted(candidates);
    std::sort(sorted.begin(), sorted.end());
    int best_n = sorted.front();
    double best_ei = -std::numeric_limits<double>::infinity();
    for (int n : sorted) {
        const double ei = expected_improvement(n, post);
        if (ei > best_ei) {  // strict: ties stay with the smallest size
            best_ei = ei;
            best_n = n;
        }
    }
    return best_n;
}

ErrorSet error_set(const EmulatorPosterior& post, int n_star, double alpha,
                   const std::vector<int>& grid) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("error_set: alpha must be in (0,1)");
    const double mu_star = post.mu(n_star);
    ErrorSet out;
    out.alpha = alpha;
    for (int n : grid) {
        const double variance = post.psi(n);
        bool member;
        if (variance <= 0.0) {
            member = post.mu(n) < mu_star;
        } else {
            const double p_better = normal_cdf((mu_star - post.mu(n)) / std::sqrt(variance));
            member = p_better >= 1.0 - alpha;
        }
        if (member) out.members.push_back(n);
    }
    std::sort(out.members.begin(), out.members.end());
    return out;
}

namespace {

// Prior-mean refit from coalesced total costs: transform back to the k2
// scale, k2(n) = (d - k1 n)/(N - n), with matching variances.
bool refit_prior_theta(const CoalescedObservations& data, GPConfig& config) {
    ObservationSet k2_obs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double n = data.unique_sizes[i];
        const double denom = config.prior_N - n;
        if (denom <= 0.0) continue;
        k2_obs.push(data.unique_sizes[i], (data.means[i] - config.prior_k1 * n) / denom,
                    std::max(data.variances[i] / (denom * denom), 1e-300));
    }
    if (k2_obs.distinct_sizes() < 3) return false;
    FitOptions opts;
    opts.starts = 2;
    opts.max_iterations = 120;
    opts.throw_on_failure = false;
    try {
        const ThetaFit fit = fit_power_law(k2_obs, config.prior_theta, opts);
        if (!fit.converged) return false;
        config.prior_theta = fit.theta;
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

void EmulationRunResult::trace_to_csv(const std::string& path) const {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.size());
    for (const auto& it : trace) {
        rows.push_back({static_cast<double>(it.iter), static_cast<double>(it.n_acquired),
                        it.d, it.variance, it.max_ei, static_cast<double>(it.n_star),
                        it.mu_at_n_star});
    }
    write_csv(path,
              {"iter", "n_acquired", "d", "variance", "max_EI", "n_star", "mu_at_n_star"},
              rows);
}

EmulatorPosterior EmulationRunResult::final_posterior() const {
    return posterior(design, final_config);
}

void EmulationRunResult::mu_curve_to_csv(const std::string& path) const {
    const EmulatorPosterior post = final_posterior();
    std::vector<std::vector<double>> rows;
    rows.reserve(candidates.size());
    for (int n : candidates)
        rows.push_back({static_cast<double>(n), post.mu(n), post.psi(n)});
    write_csv(path, {"n", "mu", "psi"}, rows);
}

EmulationRunResult run_emulation_algorithm(const CostOracle& oracle,
                                           const EmulationRunConfig& config) {
    config.gp.validate();
    if (config.initial_design.empty())
        throw DomainError("run_emulation_algorithm: initial design needs >= 1 point");
    if (config.max_iterations < 0)
        throw DomainError("run_emulation_algorithm: max_iterations must be >= 0");

    EmulationRunResult out;
    out.candidates =
        config.candidates.empty() ? default_grid(config.gp.prior_N) : config.candidates;
    out.final_config = config.gp;

    for (int n : config.initial_design) {
        const auto [d, variance] = oracle(n);
        out.design.push(n, d, variance);
    }

    auto rebuild = [&]() -> EmulatorPosterior {
        const CoalescedObservations data = coalesce(out.design);
        if (config.refit_prior) refit_prior_theta(data, out.final_config);
        return build(data, out.final_config, data.variances, nullptr, false);
    };

    auto argmin_mu = [&](const EmulatorPosterior& post) {
        int best_n = out.candidates.front();
        double best = std::numeric_limits<double>::infinity();
        for (int n : out.candidates) {
            const double m = post.mu(n);
            if (m < best) {
                best = m;
                best_n = n;
            }
        }
        return std::pair<int, double>(best_n, best);
    };

    EmulatorPosterior post = rebuild();
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        int best_n = out.candidates.front();
        double max_ei = -std::numeric_limits<double>::infinity();
        for (int n : out.candidates) {
            const double ei = expected_improvement(n, post);
            if (ei > max_ei) {
                max_ei = ei;
                best_n = n;
            }
        }
        // Stopping rule: acquire only while the best expected improvement
        // exceeds tau.
        if (!(max_ei > config.gp.tau)) break;

        const auto [d, variance] = oracle(best_n);
        out.design.push(best_n, d, variance);
        post = rebuild();

        const auto [n_star, mu_star] = argmin_mu(post);
        out.trace.push_back(
            EmulationIteration{iter, best_n, d, variance, max_ei, n_star, mu_star});
    }

    const auto [n_star, mu_star] = argmin_mu(post);
    out.result.n_star = n_star;
    out.result.min_cost = mu_star;
    out.result.method = OHSResult::Method::emulation;
    out.result.uncertainty = error_set(post, n_star, config.gp.alpha, out.candidates);
    return out;
}

}  // namespace ohs
