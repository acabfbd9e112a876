#pragma once

#include <vector>

namespace hestonvi {

struct QuadRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Jacobi rule for the weight (1 - t)^alpha (1 + t)^beta on
/// [-1, 1], computed by Golub-Welsch. alpha, beta > -1.
QuadRule gauss_jacobi(int n, double alpha, double beta);

/// n-point Gauss-Legendre rule on [lo, hi].
QuadRule gauss_legendre(int n, double lo, double hi);

/// Rule for the integral of y^{p} g(y) over (0, h), p > -1; the weight
/// y^{p} is built into the returned weights and the nodes avoid y = 0.
QuadRule gauss_power(int n, double p, double h);

} // namespace hestonvi
