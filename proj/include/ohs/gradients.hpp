#pragma once

#include <array>

#include "ohs/cost_model.hpp"

namespace ohs {

/// Partial derivatives with respect to the full parameter vector
/// (a, b, c, k1, N), in that order everywhere covariances appear.
struct GradientVector {
    std::array<double, 5> d{};

    double wrt_a() const { return d[0]; }
    double wrt_b() const { return d[1]; }
    double wrt_c() const { return d[2]; }
    double wrt_k1() const { return d[3]; }
    double wrt_N() const { return d[4]; }
};

/// Closed-form partials of the continuous optimum n*(a,b,c,k1,N) for the
/// power-law cost model, evaluated at the stationary point. Signs follow
/// the implicit-function-theorem derivative (they match central finite
/// differences of n*, which is how the tests pin them down).
GradientVector ohs_gradient(const CostParameters& params);

/// Closed-form partials of the minimum cost l(n*). By the envelope theorem
/// these equal the plain partials of l at fixed n = n*.
GradientVector mincost_gradient(const CostParameters& params);

}  // namespace ohs
