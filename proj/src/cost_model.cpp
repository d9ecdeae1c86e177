#include "ohs/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ohs/csv.hpp"
#include "ohs/math_util.hpp"

namespace ohs {

GaussianBump reference_bump() {
    return GaussianBump{1e4 / std::sqrt(2.0 * kPi), 4e4, 8e3};
}

CostCurve CostCurve::from_power_law(const PowerLawTheta& theta) {
    theta.validate();
    CostCurve c;
    c.kind_ = Kind::power_law;
    c.eval_ = [theta](double n) { return k2_power_law(n, theta); };
    c.deriv_ = [theta](double n) { return k2_power_law_deriv(n, theta); };
    return c;
}

CostCurve CostCurve::from_double_descent(const PowerLawTheta& theta, const GaussianBump& bump) {
    theta.validate();
    bump.validate();
    CostCurve c;
    c.kind_ = Kind::double_descent;
    c.eval_ = [theta, bump](double n) { return k2_double_descent(n, theta, bump); };
    c.deriv_ = [theta, bump](double n) { return k2_double_descent_deriv(n, theta, bump); };
    return c;
}

CostCurve CostCurve::from_table(std::vector<double> n_knots, std::vector<double> k2_knots) {
    if (n_knots.size() != k2_knots.size())
        throw DomainError("tabulated curve: n and k2 lengths differ");
    if (n_knots.size() < 2) throw DomainError("tabulated curve: need at least 2 knots");
    for (std::size_t i = 0; i < n_knots.size(); ++i) {
        if (!std::isfinite(n_knots[i]) || !std::isfinite(k2_knots[i]))
            throw DomainError("tabulated curve: non-finite knot");
        if (i > 0 && !(n_knots[i] > n_knots[i - 1]))
            throw DomainError("tabulated curve: n knots must be strictly ascending");
        if (n_knots[i] < 0.0) throw DomainError("tabulated curve: n knots must be >= 0");
    }

    CostCurve c;
    c.kind_ = Kind::tabulated;
    if (n_knots.front() == 0.0) c.at_zero_ = k2_knots.front();
    auto xs = std::make_shared<std::vector<double>>(std::move(n_knots));
    auto ys = std::make_shared<std::vector<double>>(std::move(k2_knots));
    c.eval_ = [xs, ys](double n) {
        const auto& x = *xs;
        const auto& y = *ys;
        if (n <= x.front()) return y.front();
        if (n >= x.back()) return y.back();
        const auto it = std::upper_bound(x.begin(), x.end(), n);
        const std::size_t hi = static_cast<std::size_t>(it - x.begin());
        const std::size_t lo = hi - 1;
        const double t = (n - x[lo]) / (x[hi] - x[lo]);
        return y[lo] * (1.0 - t) + y[hi] * t;
    };
    return c;
}

CostCurve CostCurve::from_csv(const std::string& path) {
    const CsvTable table = read_csv(path, {"n", "k2"});
    std::vector<double> ns, k2s;
    ns.reserve(table.rows.size());
    k2s.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ns.push_back(row[0]);
        k2s.push_back(row[1]);
    }
    return from_table(std::move(ns), std::move(k2s));
}

double CostCurve::operator()(double n) const {
    if (!(n > 0.0)) throw DomainError("cost curve: n must be > 0");
    return eval_(n);
}

double CostCurve::derivative(double n) const {
    if (!deriv_)
        throw UnsupportedError("cost curve: derivative unavailable for this curve kind");
    if (!(n > 0.0)) throw DomainError("cost curve: n must be > 0");
    return deriv_(n);
}

double total_cost(double n, double N, double k1, const CostCurve& curve) {
    if (!(n >= 0.0 && n <= N)) throw DomainError("total_cost: n must lie in [0, N]");
    if (n == N) return k1 * N;
    if (n == 0.0) {
        const auto k20 = curve.value_at_zero();
        if (!k20) return std::numeric_limits<double>::infinity();
        return *k20 * N;
    }
    return k1 * n + curve(n) * (N - n);
}

double total_cost(double n, const CostParameters& params) {
    params.validate();
    return total_cost(n, params.N, params.k1, CostCurve::from_power_law(params.theta));
}

double cost_derivative(double n, double N, double k1, const CostCurve& curve) {
    if (!(n > 0.0 && n <= N)) throw DomainError("cost_derivative: n must lie in (0, N]");
    return (k1 - curve(n)) + curve.derivative(n) * (N - n);
}

double cost_derivative(double n, const CostParameters& params) {
    params.validate();
    return cost_derivative(n, params.N, params.k1, CostCurve::from_power_law(params.theta));
}

}  // namespace ohs
