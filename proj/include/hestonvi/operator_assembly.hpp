#pragma once

#include "hestonvi/field.hpp"
#include "hestonvi/params.hpp"
#include "hestonvi/weighted_space.hpp"

#include <Eigen/SparseCore>

#include <ostream>
#include <string>
#include <vector>

namespace hestonvi {

using SpMat = Eigen::SparseMatrix<double>;

/// Strong form of A applied to u at (x, y).
double apply_A(const Field& u, double x, double y, const HestonParams& p);

/// Divergence form
///   -1/2 y^{1-beta} [(y^beta (u_x + rho sigma u_y))_x + (y^beta (rho sigma u_x + sigma^2 u_y))_y]
///   - b1 u_x + (y/2) u_x + kappa y u_y + r u,
/// with the y-derivative of y^beta expanded by hand.
double apply_A_divergence(const Field& u, double x, double y, const HestonParams& p);

/// A u + lambda (1 + y) u.
double apply_A_lambda(const Field& u, double x, double y, const HestonParams& p, double lambda);

/// The closure x, y -> (A u)(x, y); only the value slot of the jet is set.
Field image_A(const Field& u, const HestonParams& p);

struct AssemblyOptions
{
    /// Algebraic upwinding of the convection part together with a lumped
    /// (1 + y) mass, which makes the coercive matrix an M-matrix.
    bool upwind = false;
};

/// Galerkin matrices of the bilinear form on bilinear elements. Row index is
/// the test function, column index the trial function, so a(u, v) = v' A u.
struct DiscreteForm
{
    GridPtr grid;
    HestonParams params;
    DerivedConstants consts;
    AssemblyOptions options;

    SpMat matrix_a;        ///< a(., .), upwinded when options.upwind
    SpMat matrix_mass;     ///< (., .) in L2 of the weight
    SpMat matrix_mass_1py; ///< ((1 + y) ., .)
    SpMat matrix_gram_v;   ///< inner product of the V norm
    Eigen::VectorXd lumped_1py; ///< row sums of matrix_mass_1py
    std::vector<char> dirichlet_mask;
    std::vector<std::string> warnings;

    /// a_lambda = A + lambda (1 + y) mass; lumped mass when upwinding.
    SpMat coercive(double lambda) const;

    double form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return v.dot(matrix_a * u); }
    double norm_V(const Eigen::VectorXd& u) const;
    double norm_H(const Eigen::VectorXd& u) const;
    double norm_H_1py(const Eigen::VectorXd& u) const;
};

/// Assembles every matrix on the grid. b1 != 0 is accepted with a warning.
DiscreteForm assemble(const GridPtr& grid, const HestonParams& params, AssemblyOptions options = {});

/// Writes "row col value" lines, one per stored entry, column-major order.
void write_coordinate(std::ostream& os, const SpMat& m);

/// |(A u, v) - a_h(I u, I v)|, with the first term integrated from closures
/// and the second from the assembled matrix on nodal interpolants.
double check_integration_by_parts(const Field& u, const Field& v, const GridPtr& grid,
                                  const HestonParams& params);

struct CommutatorCheck
{
    double lhs = 0.0;        ///< a_h(I(phi u), I(phi u)) - a_h(I u, I(phi^2 u))
    double rhs = 0.0;        ///< derivative-free integrals of u against the weight
    double commutator = 0.0; ///< ([A, phi] u, phi u) from closures
    double bound_norm = 0.0; ///< || y^{1/2} (|D phi| + |D phi|^{1/2}) u ||^2
    double defect = 0.0;     ///< |lhs - rhs|
};

CommutatorCheck commutator_identity_check(const Field& u, const Field& phi, const GridPtr& grid,
                                          const HestonParams& params);

} // namespace hestonvi
