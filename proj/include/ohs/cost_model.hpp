#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ohs/power_law.hpp"

namespace ohs {

/// Core inputs of every OHS computation: total sample count N, baseline
/// per-sample cost rate k1, and the power-law parameters of k2.
struct CostParameters {
    double N = 0.0;   // total samples per deployment period, >= 2
    double k1 = 0.0;  // baseline cost rate, > 0
    PowerLawTheta theta;

    void validate() const {
        if (!(N >= 2.0)) throw DomainError("cost parameters: N must be >= 2");
        if (!(k1 > 0.0)) throw DomainError("cost parameters: k1 must be > 0");
        theta.validate();
    }
};

/// A per-sample cost-rate curve k2 over (0, N]. Tabulated curves interpolate
/// linearly between knots and clamp outside the knot range; k2 at n = 0 is
/// available only when a knot sits at 0.
class CostCurve {
public:
    enum class Kind { power_law, double_descent, tabulated };

    static CostCurve from_power_law(const PowerLawTheta& theta);
    static CostCurve from_double_descent(const PowerLawTheta& theta, const GaussianBump& bump);
    static CostCurve from_table(std::vector<double> n_knots, std::vector<double> k2_knots);
    /// Load a tabulated curve from CSV with header `n,k2`.
    static CostCurve from_csv(const std::string& path);

    double operator()(double n) const;
    bool has_derivative() const { return static_cast<bool>(deriv_); }
    double derivative(double n) const;

    Kind kind() const { return kind_; }
    /// Finite value at n = 0 when the curve defines one.
    std::optional<double> value_at_zero() const { return at_zero_; }

private:
    Kind kind_ = Kind::power_law;
    std::function<double(double)> eval_;
    std::function<double(double)> deriv_;
    std::optional<double> at_zero_;
};

/// Total cost of holding out n of N samples: l(n) = k1*n + k2(n)*(N - n).
/// At n = 0 this is k2(0)*N when the curve defines k2(0), +infinity
/// otherwise (power-law curves diverge there). At n = N the curve is not
/// consulted and the value is exactly k1*N.
double total_cost(double n, double N, double k1, const CostCurve& curve);
double total_cost(double n, const CostParameters& params);

/// Derivative of total cost: l'(n) = (k1 - k2(n)) + k2'(n)*(N - n),
/// defined on (0, N]. Requires a curve with a derivative.
double cost_derivative(double n, double N, double k1, const CostCurve& curve);
double cost_derivative(double n, const CostParameters& params);

}  // namespace ohs
