#pragma once

#include "hestonvi/field.hpp"
#include "hestonvi/params.hpp"
#include "hestonvi/quadrature.hpp"

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace hestonvi {

/// y^{beta-1} e^{-gamma |x| - mu y}; throws DomainError for y <= 0.
double weight(double x, double y, const DerivedConstants& c);

/// Axis-aligned rectangle (x_lo, x_hi) x (0, y_max). The bottom edge is the
/// degenerate boundary; the other three edges carry Dirichlet data.
/// Infinite x bounds and y_max <= 0 are replaced by truncate_domain.
struct Domain
{
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();
    double y_max = 0.0;
};

struct TruncationReport
{
    Domain domain;
    double total_mass = 0.0;     ///< weight integral over the untruncated domain
    double discarded_mass = 0.0; ///< part of it outside the truncated box
};

/// Cuts infinite x edges where e^{-gamma |x|} < 1e-10 and sets an unset
/// y_max to 20 max(1, beta) / mu.
TruncationReport truncate_domain(const Domain& domain, const DerivedConstants& c);

/// Tensor grid carrying per-cell quadrature rules for the weight.
/// Nodes are numbered y-major: index(i, j) = j * nx + i.
struct WeightedGrid
{
    Domain domain;
    DerivedConstants consts;
    double grading = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> x;
    std::vector<double> y;
    /// Rules on each x cell with e^{-gamma |x|} folded into the weights.
    std::vector<QuadRule> x_rules;
    /// Rules on each y cell with y^{beta-1} e^{-mu y} folded into the weights.
    std::vector<QuadRule> y_rules;
    /// Sign of x on each x cell (a node sits at x = 0 when it is interior).
    std::vector<double> x_sign;
    /// Integral of each nodal hat function against the weight.
    std::vector<double> node_weights;

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    bool is_dirichlet(int i, int j) const { return i == 0 || i == nx - 1 || j == ny - 1; }
    bool is_dirichlet(int k) const { return is_dirichlet(k % nx, k / nx); }
    double total_weight() const;

    /// Integral of F against the weight over the grid's rectangle.
    double integrate(const std::function<double(double, double)>& F) const;
};

using GridPtr = std::shared_ptr<const WeightedGrid>;

/// Builds the grid with y_j = y_max (j / (ny - 1))^grading. The first y cell
/// uses a Gauss-Jacobi rule for y^{beta-1}, all others Gauss-Legendre.
GridPtr build_grid(const Domain& domain, int nx, int ny, double grading, const DerivedConstants& c,
                   int quad_points = 8);

struct GridFunction
{
    GridPtr grid;
    Eigen::VectorXd values;

    GridFunction() = default;
    GridFunction(GridPtr g, Eigen::VectorXd v);
    explicit GridFunction(GridPtr g, double c = 0.0);

    double at(int i, int j) const { return values(grid->index(i, j)); }
};

/// Nodal samples of u.
GridFunction interpolate(const GridPtr& grid, const Field& u);

/// Finite-difference derivatives at every node: centered on the interior,
/// one-sided second order at the edges.
struct NodalDerivatives
{
    Eigen::VectorXd ux, uy, uxx, uxy, uyy;
};
NodalDerivatives fd_derivatives(const GridFunction& u);

double norm_L2w(const GridFunction& u);
double norm_H1w(const GridFunction& u);
double norm_H2w(const GridFunction& u);

/// Integral over x of |y^beta (rho u_x + sigma u_y)| e^{-gamma |x|} on the grid
/// row at y_level (which must be a node row with y > 0).
double trace_neumann(const GridFunction& u, const HestonParams& params, double y_level);

struct HardyResult
{
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    bool holds = false;
};

/// Checks the weighted Hardy inequality
///   int_0^Y |v|^p y^{beta-p} dy <= |p / (beta - p + 1)|^p int_0^Y |v'|^p y^beta dy.
/// `breaks` lists interior points where v' may jump. Y may be infinite.
HardyResult hardy_check(const Profile& v, double beta, double p,
                        const std::vector<double>& breaks = {},
                        double Y = std::numeric_limits<double>::infinity(), double tol = 1e-6);

/// Logarithmic cutoff: zero for |y| <= eps / N and one for |y| >= eps / 2.
class LogCutoff
{
public:
    LogCutoff(double N, double eps, double delta = 0.02);

    Jet1 operator()(double y) const;
    /// Integral over the real line of |psi'|^2 |y|^beta.
    double energy(double beta) const;
    /// max |chi'| log N, the constant c of the decay bound.
    double measured_c() const;
    /// The decay bound c^2 2^{2-beta} (beta-1)^{-1} (log N)^{-2} eps^{beta-1}
    /// for beta > 1 and 2 c^2 / log N for beta = 1; NaN for beta < 1.
    double bound(double beta) const;

    double N() const { return N_; }
    double eps() const { return eps_; }

private:
    double N_, eps_, delta_, logN_;
    double phi(double s) const;
    double dphi(double s) const;
    double ddphi(double s) const;
};

} // namespace hestonvi
