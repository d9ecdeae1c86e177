#pragma once

#include <cmath>

#include "ohs/errors.hpp"

namespace ohs {

/// Parameters of the power-law per-sample cost rate
///     k2(n) = a * n^(-b) + c,
/// which is strictly decreasing and strictly convex on n > 0.
struct PowerLawTheta {
    double a = 1.0;  // cost scale, > 0
    double b = 1.0;  // decay exponent, > 0
    double c = 0.0;  // asymptotic cost rate, >= 0

    void validate() const {
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("power law: a must be > 0");
        if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("power law: b must be > 0");
        if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("power law: c must be >= 0");
    }
};

inline double k2_power_law(double n, const PowerLawTheta& theta) {
    if (!(n > 0.0)) throw DomainError("k2_power_law: n must be > 0");
    return theta.a * std::pow(n, -theta.b) + theta.c;
}

inline double k2_power_law_deriv(double n, const PowerLawTheta& theta) {
    if (!(n > 0.0)) throw DomainError("k2_power_law_deriv: n must be > 0");
    return -theta.a * theta.b * std::pow(n, -theta.b - 1.0);
}

/// Gaussian bump added to the power law to mimic a double-descent learning
/// curve: height * exp(-((n - center)/width)^2 / 2).
struct GaussianBump {
    double height = 0.0;
    double center = 0.0;
    double width = 1.0;

    void validate() const {
        if (!(width > 0.0)) throw DomainError("double descent bump: width must be > 0");
    }

    double operator()(double n) const {
        const double z = (n - center) / width;
        return height * std::exp(-0.5 * z * z);
    }

    double deriv(double n) const {
        const double z = (n - center) / width;
        return -(*this)(n)*z / width;
    }
};

/// The bump used in the synthetic comparison study: height 1e4/sqrt(2*pi),
/// centered at 4e4 with width 8e3.
GaussianBump reference_bump();

inline double k2_double_descent(double n, const PowerLawTheta& theta, const GaussianBump& bump) {
    bump.validate();
    return k2_power_law(n, theta) + bump(n);
}

inline double k2_double_descent_deriv(double n, const PowerLawTheta& theta,
                                      const GaussianBump& bump) {
    bump.validate();
    return k2_power_law_deriv(n, theta) + bump.deriv(n);
}

}  // namespace ohs
