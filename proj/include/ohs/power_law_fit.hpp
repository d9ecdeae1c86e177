#pragma once

#include <array>
#include <optional>
#include <string>

#include "ohs/cost_model.hpp"
#include "ohs/observations.hpp"

namespace ohs {

/// Result of weighted maximum-likelihood power-law estimation under
/// value_i ~ N(k2(n_i; theta), sigma_i^2) with known variances.
/// `covariance` is the 3x3 block for (a,b,c) from the inverse weighted
/// Gauss-Newton normal matrix at the optimum (the effective-sample-size
/// scaling is already folded in). k1 and N enter with user-supplied
/// standard errors, zero when known exactly; cross-covariances with theta
/// are taken as zero.
struct ThetaFit {
    PowerLawTheta theta;
    std::array<std::array<double, 3>, 3> covariance{};  // (a,b,c)
    double k1 = 0.0, k1_se = 0.0;
    double N = 0.0, N_se = 0.0;
    bool converged = false;
    bool boundary_warning = false;
    double objective = 0.0;  // weighted sum of squared residuals at optimum
    std::string residual_report;

    CostParameters params() const { return CostParameters{N, k1, theta}; }

    ThetaFit& with_known(double k1_value, double N_value, double k1_se_value = 0.0,
                         double N_se_value = 0.0) {
        k1 = k1_value;
        N = N_value;
        k1_se = k1_se_value;
        N_se = N_se_value;
        return *this;
    }
};

struct FitOptions {
    int starts = 5;          // method-of-moments init plus perturbations
    int max_iterations = 200;
    double b_upper = 10.0;   // b constrained to (0, b_upper]
    bool throw_on_failure = true;
};

/// Weighted nonlinear least squares for k2(n) = a*n^(-b) + c, fitted in
/// unconstrained coordinates (a = e^u1, b = b_upper*logistic(u2),
/// c = softplus(u3)) by Levenberg-damped Gauss-Newton with multi-start.
ThetaFit fit_power_law(const ObservationSet& obs,
                       std::optional<PowerLawTheta> init = std::nullopt,
                       const FitOptions& options = {});

}  // namespace ohs
