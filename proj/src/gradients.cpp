#include "ohs/gradients.hpp"

#include <cmath>

#include "ohs/ohs_search.hpp"

namespace ohs {

GradientVector ohs_gradient(const CostParameters& params) {
    const double n = ohs_continuous_root(params);
    const double a = params.theta.a, b = params.theta.b;
    const double N = params.N;
    const double logn = std::log(n);
    const double denom = b * (b + 1.0) * N - b * (b - 1.0) * n;

    GradientVector g;
    g.d[0] = (b * N * n - (b - 1.0) * n * n) / (a * denom);
    // The derivative with respect to b carries the implicit-function-theorem
    // minus sign, consistent with the other four components.
    g.d[1] = -(N * n * (b * logn - 1.0) - n * n * ((b - 1.0) * logn - 1.0)) / denom;
    g.d[2] = std::pow(n, b + 2.0) / (a * denom);
    g.d[3] = -std::pow(n, b + 2.0) / (a * denom);
    g.d[4] = b * n / denom;
    return g;
}

GradientVector mincost_gradient(const CostParameters& params) {
    const double n = ohs_continuous_root(params);
    const double a = params.theta.a, b = params.theta.b, c = params.theta.c;
    const double N = params.N;
    const double nb = std::pow(n, -b);

    GradientVector g;
    g.d[0] = (N - n) * nb;
    g.d[1] = -std::log(n) * (N - n) * a * nb;
    g.d[2] = N - n;
    g.d[3] = n;
    g.d[4] = a * nb + c;
    return g;
}

}  // namespace ohs
