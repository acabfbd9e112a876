#pragma once

#include "hestonvi/params.hpp"

#include <vector>

namespace hestonvi {

/// A special-function value with a flag raised when it comes from a route
/// of reduced accuracy (asymptotic M, or U with b >= 1).
struct KummerValue
{
    double value = 0.0;
    bool accuracy_warning = false;
};

/// Confluent hypergeometric M(a, b, z), z >= 0. Power series up to z = 30,
/// leading asymptotic expansion beyond (flagged). ParamError when b is a
/// non-positive integer or z < 0.
KummerValue kummer_m_ex(double a, double b, double z);
inline double kummer_m(double a, double b, double z) { return kummer_m_ex(a, b, z).value; }

/// Tricomi U(a, b, z), z > 0, a >= 0. Non-integer b and small z use the
/// two-M connection formula; otherwise the Laplace integral (a > 0).
/// The flag is raised for b >= 1.
KummerValue kummer_u_ex(double a, double b, double z);
inline double kummer_u(double a, double b, double z) { return kummer_u_ex(a, b, z).value; }

/// z^b U_z(a, b, z) for 0 < b < 1 from the differentiated connection formula,
/// usable down to very small z.
double kummer_u_scaled_derivative(double a, double b, double z);

/// -a Gamma(b) / Gamma(a + 1): the z -> 0 limit of z^b U_z(a, b, z), 0 < b < 1.
double kummer_u_trace_limit(double a, double b);

struct CirBranches
{
    double m_branch = 0.0; ///< M(a, beta, mu y)
    double u_branch = 0.0; ///< U(a, beta, mu y)
    bool accuracy_warning = false;
};

/// The two solutions of the CIR generator equation B u = 0, a = r / kappa.
CirBranches cir_homogeneous(const HestonParams& params, double y);

enum class CirBranch { M, U };

/// y^beta u'(y) for the chosen branch at level y > 0.
double cir_trace_level(const HestonParams& params, CirBranch branch, double y);

/// lim_{y -> 0} y^beta u'(y) on the U-branch: -mu^{1-beta} a Gamma(beta) / Gamma(a + 1), 0 < beta < 1.
double cir_trace_constant(const HestonParams& params);

struct NormGrowth
{
    std::vector<double> cutoffs; ///< inner cutoffs delta_k, decreasing
    std::vector<double> norms;   ///< squared truncated norm on (delta_k, Y)
    bool finite = false;         ///< increments decay geometrically
};

struct BoundaryClassification
{
    double beta = 0.0;
    NormGrowth u_h1, u_h2, m_h1, m_h2;
};

/// Truncated weighted H1 and H2 norms of both branches on (delta, Y) with
/// shrinking delta; a norm is called finite when the increments between
/// successive cutoffs shrink by a fixed factor.
BoundaryClassification classify_boundary(const HestonParams& params, double Y = 1.0);

struct CirSolve
{
    std::vector<double> y;
    std::vector<double> u;
    double max_rel_error = 0.0; ///< against M(a, beta, mu y) / M(a, beta, mu Y)
};

/// Piecewise-linear Galerkin solve of B u = 0 on (0, Y] in the weight
/// y^{beta-1} e^{-mu y}, u(Y) = 1, no condition at y = 0.
CirSolve solve_cir_1d(const HestonParams& params, double Y, int nodes = 512, double grading = 2.0);

} // namespace hestonvi
