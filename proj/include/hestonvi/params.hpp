#pragma once

#include "hestonvi/field.hpp"

#include <optional>

namespace hestonvi {

/// Constant coefficients of the Heston operator
///   Av = -(y/2)(v_xx + 2 rho sigma v_xy + sigma^2 v_yy) - (r - q - y/2) v_x
///        - kappa (theta - y) v_y + r v.
struct HestonParams
{
    double sigma = 1.0;
    double rho = 0.0;
    double kappa = 1.0;
    double theta = 1.0;
    double r = 0.0;
    double q = 0.0;
};

/// Checks the ellipticity and sign conditions, throwing CoefficientError
/// naming the first violated one. A negative sigma is canonicalized to a
/// positive one with rho flipped, which leaves the operator unchanged.
/// The dividend-yield sign check can be relaxed for parameter sets produced
/// by a coordinate change.
HestonParams validate(const HestonParams& params, bool require_nonnegative_q = true);

/// Every constant derived from the coefficients that the weighted theory uses.
struct DerivedConstants
{
    double beta = 0.0;   ///< 2 kappa theta / sigma^2
    double mu = 0.0;     ///< 2 kappa / sigma^2
    double a1 = 0.0;     ///< kappa rho / sigma - 1/2
    double b1 = 0.0;     ///< r - q - kappa theta rho / sigma
    double nu0 = 0.0;    ///< ellipticity modulus of y^{-1} A
    double C1 = 0.0;     ///< diagonal continuity constant
    double C2 = 0.0;     ///< Garding constant
    double C3 = 0.0;
    double C4 = 0.0;
    double C5 = 0.0;     ///< continuity constant, C6 + C7
    double C6 = 0.0;
    double C7 = 0.0;
    double gamma0 = 0.0; ///< largest admissible weight exponent, C2 / (2 C3)
    double gamma = 0.0;  ///< weight exponent in use, 0 < gamma <= gamma0
    double lambda0 = 0.0;
    double nu1 = 0.0;
};

/// Evaluates the constants. gamma defaults to gamma0; an override must lie
/// in (0, gamma0] or a PreconditionError is thrown.
DerivedConstants derive_constants(const HestonParams& params,
                                  std::optional<double> gamma = std::nullopt);

/// Composite affine change of variables
///   x' = x_scale (x + m y),   y' = a y,   f' = f_scale f,
/// with the dependent variable left unscaled. `transformed` holds the
/// coefficients of the operator in the primed variables.
///
/// Structure-preserving affine changes multiply b1 by a positive factor, so
/// b1 vanishes in the new system exactly when it vanishes in the old one.
/// `b1_residual` is the b1 of `transformed`, and `normalized` says whether it
/// is below 1e-12 (1 + |r| + |q|).
struct CoordinateChange
{
    double a = 1.0;
    double m = 0.0;
    double x_scale = 1.0;
    double f_scale = 1.0;
    HestonParams original;
    HestonParams transformed;
    double b1_residual = 0.0;
    bool normalized = true;

    bool is_identity() const { return a == 1.0 && m == 0.0 && x_scale == 1.0 && f_scale == 1.0; }
};

/// Applies the b1-reduction recipe. Returns the identity when b1 is already
/// zero. Uses the pure y-scaling a = sqrt(kappa theta rho / ((r - q) sigma))
/// when rho / ((r - q) sigma) > 0. Otherwise it shears by the first m in
/// {1, 2, 4, ..., 2^20} that gives a positive correlation and drift
/// difference, rescales x to restore the y/2 drift coefficient, and then
/// y-scales. Throws NormalizationError if no m qualifies.
CoordinateChange normalize_b1(const HestonParams& params);

/// The function u expressed in the primed coordinates of `change`.
Field map_function(const CoordinateChange& change, const Field& u);

/// A source term expressed in the primed coordinates, including the factor
/// by which the equation is multiplied.
Field map_source(const CoordinateChange& change, const Field& f);

} // namespace hestonvi
