#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ohs/cost_model.hpp"
#include "ohs/observations.hpp"

namespace ohs {

/// Empirical verdicts on the cost-model assumptions, from k2 sampled on a
/// grid of sizes. Assumption 1 (k1 independent of n) is not checkable from
/// these inputs and is reported as assumed.
struct AssumptionReport {
    bool a1_holds = true;  // assumed, see note above
    bool a2_holds = false; // k2 monotonically decreasing
    bool a3_holds = false; // crossing point M with k2(M) <= k1 < k2 before M
    bool a4_holds = false; // discrete convexity of k2
    bool a5_holds = false; // (N-M)/N * (k1 - k2(M)) > k1 - k2(0)

    std::optional<int> crossing_m;            // first size with k2 <= k1
    std::optional<int> a2_first_violation;    // grid index of first increase
    std::optional<int> a4_first_violation;    // grid index of first concavity
    int a2_violations = 0;
    int a4_violations = 0;
    std::string notes;
};

/// Check assumptions on explicit (size, k2) samples. Duplicated sizes must
/// be aggregated beforehand. At least 3 distinct sizes are required.
AssumptionReport check_assumptions(const std::vector<int>& sizes,
                                   const std::vector<double>& k2_values, double k1, double N);

/// From noisy observations: duplicates are combined by inverse-variance
/// weighted mean first.
AssumptionReport check_assumptions(const ObservationSet& obs, double k1, double N);

/// From a curve evaluated on a grid.
AssumptionReport check_assumptions(const CostCurve& curve, const std::vector<int>& grid,
                                   double k1, double N);

}  // namespace ohs
