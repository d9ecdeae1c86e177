#include "ohs/ohs_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ohs {

std::vector<int> default_grid(double N, int points) {
    const long long hi = static_cast<long long>(N) - 1;
    if (hi < 1) throw DomainError("default_grid: N must be >= 2");
    if (points < 1) throw DomainError("default_grid: points must be >= 1");
    std::vector<int> grid;
    grid.reserve(static_cast<std::size_t>(points));
    if (points == 1) {
        grid.push_back(1);
        return grid;
    }
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        long long n = 1 + std::llround(t * static_cast<double>(hi - 1));
        n = std::clamp<long long>(n, 1, hi);
        grid.push_back(static_cast<int>(n));
    }
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

OHSResult find_ohs_grid(double N, double k1, const CostCurve& curve,
                        const std::vector<int>& grid) {
    if (grid.empty()) throw DomainError("find_ohs_grid: empty grid");
    int best_n = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int n : grid) {
        if (n < 1 || n > N - 1)
            throw DomainError("find_ohs_grid: grid entry outside 1..N-1");
        const double cost = total_cost(n, N, k1, curve);
        if (cost < best_cost || (cost == best_cost && n > best_n)) {
            best_cost = cost;
            best_n = n;
        }
    }
    return OHSResult{best_n, best_cost, OHSResult::Method::grid, std::nullopt};
}

double ohs_continuous_root(const CostParameters& params) {
    params.validate();
    const double N = params.N;
    const double k1 = params.k1;
    const PowerLawTheta& th = params.theta;

    if (k1 <= th.c) {
        throw NoInteriorOhsError(
            NoInteriorOhsError::Diagnosis::k2_dominates,
            "no interior OHS: k1 <= c, so the risk score never beats baseline care "
            "(assumption 3 fails; holding out the whole population is degenerate)");
    }
    // Crossing point of k2 with k1: M = (a/(k1-c))^(1/b). Beyond N the curve
    // stays above k1 on the whole domain.
    const double M = std::pow(th.a / (k1 - th.c), 1.0 / th.b);
    if (M >= N) {
        throw NoInteriorOhsError(
            NoInteriorOhsError::Diagnosis::k2_dominates,
            "no interior OHS: k2(n) > k1 for every n <= N, so the score cannot pay for "
            "itself within this population (crossing point M >= N)");
    }

    const CostCurve curve = CostCurve::from_power_law(th);
    auto lprime = [&](double n) { return cost_derivative(n, N, k1, curve); };
    // l''(n) = k2''(n)(N-n) - 2 k2'(n), positive on the whole domain.
    auto lsecond = [&](double n) {
        const double k2dd = th.a * th.b * (th.b + 1.0) * std::pow(n, -th.b - 2.0);
        return k2dd * (N - n) - 2.0 * k2_power_law_deriv(n, th);
    };

    double lo = 1.0, hi = N - 1.0;
    const double flo = lprime(lo), fhi = lprime(hi);

    double root;
    if (flo >= 0.0) {
        // Cost already increasing at n = 1: the continuous optimum sits at or
        // below the smallest admissible size.
        return 1.0;
    }
    if (fhi <= 0.0) {
        return N - 1.0;
    }
    // l' is monotonically increasing here, so bisection converges.
    const double rel_tol = 1e-8;
    for (int iter = 0; iter < 200 && (hi - lo) > rel_tol * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (lprime(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    root = 0.5 * (lo + hi);
    // Newton polish to near machine precision (the derivative work in the
    // parametric module differences this root, so bisection tolerance alone
    // is not enough).
    for (int iter = 0; iter < 4; ++iter) {
        const double step = lprime(root) / lsecond(root);
        const double next = root - step;
        if (!(next > 1.0 && next < N - 1.0)) break;
        root = next;
        if (std::abs(step) < 1e-13 * root) break;
    }
    return root;
}

OHSResult find_ohs_root(const CostParameters& params) {
    const double root = ohs_continuous_root(params);
    const double N = params.N;

    const long long floor_n = std::clamp<long long>(
        static_cast<long long>(std::floor(root)), 1, static_cast<long long>(N) - 1);
    const long long ceil_n = std::clamp<long long>(
        static_cast<long long>(std::ceil(root)), 1, static_cast<long long>(N) - 1);
    const double cost_floor = total_cost(static_cast<double>(floor_n), params);
    const double cost_ceil = total_cost(static_cast<double>(ceil_n), params);

    OHSResult result;
    result.method = OHSResult::Method::root;
    if (cost_ceil <= cost_floor) {  // ties prefer the larger size
        result.n_star = static_cast<int>(ceil_n);
        result.min_cost = cost_ceil;
    } else {
        result.n_star = static_cast<int>(floor_n);
        result.min_cost = cost_floor;
    }
    return result;
}

}  // namespace ohs
