#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ohs/cost_model.hpp"

namespace ohs {

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;  // coverage probability in (0,1)
    enum class Kind { asymptotic, bootstrap } kind = Kind::asymptotic;
};

/// Sizes whose posterior cost is plausibly below the estimated minimum, at
/// probability >= 1 - alpha. Not a credible set for the optimum.
struct ErrorSet {
    std::vector<int> members;
    double alpha = 0.0;
};

struct OHSResult {
    int n_star = 0;       // in 1..N-1
    double min_cost = 0;  // cost at n_star under the reporting model
    enum class Method { grid, root, parametric, emulation } method = Method::grid;
    std::optional<std::variant<ConfidenceInterval, ErrorSet>> uncertainty;
};

/// Default evaluation grid: 1000 evenly spaced integers over [1, N-1],
/// deduplicated (fewer when N - 1 < 1000).
std::vector<int> default_grid(double N, int points = 1000);

/// Exhaustive search over an explicit grid of holdout sizes. Ties break
/// toward larger n: overshooting the optimum costs at most linearly.
OHSResult find_ohs_grid(double N, double k1, const CostCurve& curve,
                        const std::vector<int>& grid);

/// Interior optimum of the power-law cost model via bisection on the sign
/// change of l'(n) over [1, N-1]. l' is monotone under the model
/// assumptions, so bisection is globally convergent. Returns the integer
/// neighbour of the continuous root with the smaller cost (larger n wins
/// ties). Throws NoInteriorOhsError when k1 <= c or the crossing point of
/// k2 with k1 falls at or beyond N.
OHSResult find_ohs_root(const CostParameters& params);

/// The continuous stationary point of l underlying find_ohs_root, polished
/// to near machine precision with Newton steps. The gradient and
/// confidence-interval machinery differentiates this quantity.
double ohs_continuous_root(const CostParameters& params);

}  // namespace ohs
