#include "ohs/power_law_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ohs/errors.hpp"

namespace ohs {

namespace {

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double softplus_inv(double y) {
    if (y > 30.0) return y;
    return std::log(std::expm1(std::max(y, 1e-300)));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Transformed {
    double b_upper;

    PowerLawTheta theta(const Eigen::Vector3d& u) const {
        return PowerLawTheta{std::exp(u[0]), b_upper * sigmoid(u[1]), softplus(u[2])};
    }

    Eigen::Vector3d inverse(const PowerLawTheta& th) const {
        const double b_frac = std::clamp(th.b / b_upper, 1e-9, 1.0 - 1e-9);
        return {std::log(std::max(th.a, 1e-300)),
                std::log(b_frac / (1.0 - b_frac)),
                softplus_inv(std::max(th.c, 1e-12))};
    }

    // d(a,b,c)/d(u1,u2,u3), diagonal.
    Eigen::Vector3d jacobian_diag(const Eigen::Vector3d& u) const {
        const double s = sigmoid(u[1]);
        return {std::exp(u[0]), b_upper * s * (1.0 - s), sigmoid(u[2])};
    }
};

struct Problem {
    const std::vector<int>& n;
    const std::vector<double>& v;
    std::vector<double> inv_sd;  // 1/sigma_i

    double chi2(const PowerLawTheta& th) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const double r = (v[i] - k2_power_law(n[i], th)) * inv_sd[i];
            acc += r * r;
        }
        return acc;
    }
};

// Variable projection: for fixed b the model is linear in (a, c), so the
// weighted least-squares solution is exact. Profiling over b on a log grid
// with golden refinement gives a near-global starting point for the damped
// Gauss-Newton polish, which matters because the badly scaled small-n
// observations make cold starts stall.
PowerLawTheta varpro_profile(const Problem& prob, double b_lo, double b_hi,
                             double* chi2_out) {
    auto solve_ac = [&](double b, double& a, double& c) {
        double sxx = 0, sx = 0, sw = 0, sxv = 0, sv = 0;
        for (std::size_t i = 0; i < prob.n.size(); ++i) {
            const double w = prob.inv_sd[i] * prob.inv_sd[i];
            const double x = std::pow(prob.n[i], -b);
            sxx += w * x * x;
            sx += w * x;
            sw += w;
            sxv += w * x * prob.v[i];
            sv += w * prob.v[i];
        }
        const double det = sxx * sw - sx * sx;
        if (std::abs(det) < 1e-300) {
            a = 1e-12;
            c = std::max(sv / std::max(sw, 1e-300), 1e-12);
            return;
        }
        a = (sxv * sw - sx * sv) / det;
        c = (sxx * sv - sx * sxv) / det;
        if (c < 0.0) {  // constrained refit on the c = 0 face
            c = 0.0;
            a = sxv / std::max(sxx, 1e-300);
        }
        if (a <= 0.0) {  // non-decreasing data; keep a vanishing slope
            a = 1e-12;
            c = std::max(sv / std::max(sw, 1e-300), 1e-12);
        }
    };
    auto profile_chi2 = [&](double b) {
        double a, c;
        solve_ac(b, a, c);
        return prob.chi2(PowerLawTheta{a, b, std::max(c, 0.0)});
    };

    const double log_lo = std::log(b_lo), log_hi = std::log(b_hi);
    double best_b = b_lo, best_chi2 = std::numeric_limits<double>::infinity();
    const int grid_points = 48;
    for (int i = 0; i < grid_points; ++i) {
        const double b = std::exp(log_lo + (log_hi - log_lo) * i / (grid_points - 1));
        const double chi2 = profile_chi2(b);
        if (chi2 < best_chi2) {
            best_chi2 = chi2;
            best_b = b;
        }
    }
    // Golden-section refinement around the best grid cell.
    const double step = (log_hi - log_lo) / (grid_points - 1);
    double lo = std::max(log_lo, std::log(best_b) - step);
    double hi = std::min(log_hi, std::log(best_b) + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = profile_chi2(std::exp(x1)), f2 = profile_chi2(std::exp(x2));
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = profile_chi2(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = profile_chi2(std::exp(x2));
        }
    }
    best_b = std::exp(0.5 * (lo + hi));
    double a, c;
    solve_ac(best_b, a, c);
    PowerLawTheta th{std::max(a, 1e-12), best_b, std::max(c, 0.0)};
    if (chi2_out) *chi2_out = prob.chi2(th);
    return th;
}

// Single Levenberg-damped Gauss-Newton run from u0. Returns chi2 achieved;
// updates u0 in place.
double run_lm(const Problem& prob, const Transformed& tf, Eigen::Vector3d& u,
              int max_iterations) {
    const std::size_t m = prob.n.size();
    double lambda = 1e-3;
    PowerLawTheta th = tf.theta(u);
    double chi2 = prob.chi2(th);

    for (int iter = 0; iter < max_iterations; ++iter) {
        // Weighted Jacobian and residual in u-coordinates.
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        const Eigen::Vector3d du = tf.jacobian_diag(u);
        for (std::size_t i = 0; i < m; ++i) {
            const double nb = std::pow(prob.n[i], -th.b);
            const double model = th.a * nb + th.c;
            const double r = (prob.v[i] - model) * prob.inv_sd[i];
            Eigen::Vector3d g;  // d model / d (a,b,c)
            g[0] = nb;
            g[1] = -th.a * std::log(static_cast<double>(prob.n[i])) * nb;
            g[2] = 1.0;
            const Eigen::Vector3d gu = (g.array() * du.array()).matrix() * prob.inv_sd[i];
            JtJ.noalias() += gu * gu.transpose();
            Jtr.noalias() += gu * r;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::Matrix3d damped = JtJ;
            for (int k = 0; k < 3; ++k)
                damped(k, k) += lambda * std::max(JtJ(k, k), 1e-12);
            const Eigen::Vector3d step = damped.ldlt().solve(Jtr);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::Vector3d u_new = u + step;
            const PowerLawTheta th_new = tf.theta(u_new);
            const double chi2_new = prob.chi2(th_new);
            if (std::isfinite(chi2_new) && chi2_new <= chi2) {
                const double rel_drop = (chi2 - chi2_new) / std::max(chi2, 1e-300);
                const double step_norm = step.norm() / (1.0 + u.norm());
                u = u_new;
                th = th_new;
                chi2 = chi2_new;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel_drop < 1e-14 || step_norm < 1e-13) return chi2;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) return chi2;  // damping saturated; local stall
    }
    return chi2;
}

}  // namespace

ThetaFit fit_power_law(const ObservationSet& obs, std::optional<PowerLawTheta> init,
                       const FitOptions& options) {
    obs.validate();
    if (obs.distinct_sizes() < 3)
        throw InsufficientDataError("fit_power_law: need at least 3 distinct sizes");

    Problem prob{obs.sizes, obs.values, {}};
    prob.inv_sd.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i)
        prob.inv_sd[i] = 1.0 / std::sqrt(obs.variances[i]);

    const Transformed tf{options.b_upper};
    const double b_lo = 1e-3, b_hi = options.b_upper * 0.999;

    double best_chi2 = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_u = Eigen::Vector3d::Zero();
    auto polish_from = [&](const PowerLawTheta& start) {
        Eigen::Vector3d u = tf.inverse(start);
        const double chi2 = run_lm(prob, tf, u, options.max_iterations);
        if (std::isfinite(chi2) && chi2 < best_chi2) {
            best_chi2 = chi2;
            best_u = u;
        }
    };

    if (init) polish_from(*init);

    // Warm single-start mode trusts the supplied starting point unless the
    // result looks far from a plausible optimum, in which case the profile
    // initializer rescues it.
    const std::size_t dof_guess = obs.size() > 3 ? obs.size() - 3 : 1;
    const bool warm_only = init && options.starts <= 1;
    if (!warm_only || !(best_chi2 < 10.0 * static_cast<double>(dof_guess))) {
        double varpro_chi2 = 0.0;
        const PowerLawTheta varpro = varpro_profile(prob, b_lo, b_hi, &varpro_chi2);
        polish_from(varpro);
        const double perturb[][3] = {{3.0, 1.4, 0.5}, {0.33, 0.7, 1.5}, {10.0, 2.0, 0.1},
                                     {0.1, 0.5, 2.0}};
        int extra = options.starts - (init ? 2 : 1);
        for (int s = 0; s < extra && s < 4; ++s) {
            const auto& p = perturb[s];
            polish_from(PowerLawTheta{
                std::clamp(varpro.a * p[0], 1e-10, 1e14),
                std::clamp(varpro.b * p[1], b_lo, b_hi),
                std::max(varpro.c * p[2], 1e-10)});
        }
    }

    if (!std::isfinite(best_chi2)) {
        if (options.throw_on_failure)
            throw FitFailureError("fit_power_law: no start produced a finite objective");
        ThetaFit failed;
        failed.converged = false;
        failed.objective = best_chi2;
        failed.residual_report = "no start produced a finite objective";
        return failed;
    }

    ThetaFit fit;
    fit.theta = tf.theta(best_u);
    fit.objective = best_chi2;
    fit.converged = true;

    // Boundary diagnostics: b pinned near its bounds means the decay rate is
    // not identified by the data (for example, constant observations).
    const double b_frac = fit.theta.b / options.b_upper;
    if (b_frac > 0.995 || fit.theta.b < 1e-4) {
        fit.boundary_warning = true;
        fit.residual_report += "b at bound (decay rate unidentifiable); ";
    }

    // Covariance in (a,b,c) from the weighted normal matrix at the optimum.
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double nb = std::pow(obs.sizes[i], -fit.theta.b);
        Eigen::Vector3d g;
        g[0] = nb;
        g[1] = -fit.theta.a * std::log(static_cast<double>(obs.sizes[i])) * nb;
        g[2] = 1.0;
        g *= prob.inv_sd[i];
        info.noalias() += g * g.transpose();
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(info);
    Eigen::Matrix3d cov;
    if (lu.isInvertible()) {
        cov = lu.inverse();
    } else {
        // Singular information: report pseudo-inverse variances and flag.
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(info,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Vector3d inv_sv = Eigen::Vector3d::Zero();
        for (int k = 0; k < 3; ++k)
            if (svd.singularValues()[k] > 1e-12 * svd.singularValues()[0])
                inv_sv[k] = 1.0 / svd.singularValues()[k];
        cov = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
        fit.boundary_warning = true;
        fit.residual_report += "singular information matrix (pseudo-inverse covariance); ";
    }
    for (int r = 0; r < 3; ++r)
        for (int cidx = 0; cidx < 3; ++cidx) fit.covariance[r][cidx] = cov(r, cidx);

    // Weighted residual summary.
    const std::size_t dof = obs.size() > 3 ? obs.size() - 3 : 1;
    fit.residual_report += "chi2=" + std::to_string(best_chi2) +
                           " dof=" + std::to_string(dof);
    return fit;
}

}  // namespace ohs
