#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace ohs {

inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal density.
inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

/// Standard normal CDF via erfc (accurate in both tails).
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Standard normal quantile. Acklam's rational approximation polished with
/// one Halley step; |error| < 1e-15 over (0,1).
double normal_quantile(double p);

/// Two-sided z value: Phi^{-1}(1 - alpha/2).
inline double z_two_sided(double alpha) { return normal_quantile(1.0 - 0.5 * alpha); }

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

inline double sample_sd(const std::vector<double>& v) { return std::sqrt(sample_variance(v)); }

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double p);

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace ohs
