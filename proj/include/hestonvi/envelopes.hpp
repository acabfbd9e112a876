#pragma once

#include "hestonvi/field.hpp"
#include "hestonvi/params.hpp"
#include "hestonvi/weighted_space.hpp"

#include <string>
#include <vector>

namespace hestonvi {

/// Source-bound coefficients of
///   n = c0 + c2 y + c3 (1+y) e^{l x} + c4 (1+y) e^{k y},
///   N = C0 + C2 y + C3 (1+y) e^{L x} + C4 (1+y) e^{K y},
/// and the derived envelope coefficients of
///   m = d0 + d2 y + d3 e^{l x} + d4 e^{k y},  M = D0 + D2 y + D3 e^{L x} + D4 e^{K y}.
struct EnvelopeCoeffs
{
    double c0 = 0, c2 = 0, c3 = 0, c4 = 0;
    double C0 = 0, C2 = 0, C3 = 0, C4 = 0;
    double k = 0, K = 0, l = 0, L = 0;
    double d0 = 0, d2 = 0, d3 = 0, d4 = 0;
    double D0 = 0, D2 = 0, D3 = 0, D4 = 0;
};

struct EnvelopePair
{
    EnvelopeCoeffs coeffs;
    Field m, M; ///< lower and upper envelopes
    Field n, N; ///< source bounds with A m <= n and N <= A M
};

struct EnvelopeOptions
{
    /// Enforce 2k < mu, 2K < mu, 2l < gamma, 2L < gamma for every term in use.
    bool require_integrability = true;
};

/// Solves for d_i, D_i. Throws SideConditionError naming the first failed
/// inequality and EnvelopeError when the ordering c_i <= C_i, k <= K, l <= L
/// or the resulting d_i <= D_i fails.
EnvelopePair derive_envelopes(const EnvelopeCoeffs& in, const HestonParams& params, const DerivedConstants& c,
                              EnvelopeOptions options = {});

struct Violation
{
    std::string name;
    double worst = 0.0; ///< max over sampled nodes of (lhs - rhs)^+
    bool holds() const { return worst <= 0.0; }
};

struct AdmissibilityReport
{
    std::vector<Violation> checks; ///< m<=M, Am<=f, f<=AM, m<=g on Gamma_1, g<=M on Gamma_1, psi<=M
    bool l2_integrable = false;    ///< (1+y)^2 M, (1+y)^2 m in L^2 of the weight on the half-plane
    bool lq_integrable = false;    ///< (1+y)^{1/2} M, (1+y)^{1/2} m in L^q, q = 4
    double q = 4.0;
    double l2_norm_M = 0.0;        ///< || (1+y)^2 M || on the truncated grid
    double lq_norm_M = 0.0;        ///< || (1+y)^{1/2} M ||_{L^4} on the truncated grid
    bool passed() const;
    double worst(const std::string& name) const;
};

AdmissibilityReport check_admissible_envelopes(const EnvelopePair& pair, const Field& f, const Field& g,
                                               const Field& psi, const GridPtr& grid, const HestonParams& params);

struct BarrierReport
{
    double min_A_phi_minus_A_g = 0.0;   ///< min of A phi - A g
    double min_A_m_phi_minus_2A_g = 0.0; ///< min of A(m + phi) - 2 A g
    double min_phi_minus_g_gamma1 = 0.0; ///< min of phi - g on Gamma_1 nodes
    double ratio_estimate = 0.0;        ///< 1.1 max (1+y)(M+phi-2g) / A(m+phi-2g)
    bool passed() const
    {
        return min_A_phi_minus_A_g >= 0.0 && min_A_m_phi_minus_2A_g > 0.0 && min_phi_minus_g_gamma1 >= 0.0;
    }
};

/// Throws BarrierError if A(m + phi - 2g) <= 0 at some node.
BarrierReport check_barrier(const Field& phi, const EnvelopePair& pair, const Field& g, const GridPtr& grid,
                            const HestonParams& params);

/// phi = psi0 - m, where psi0 is the upper envelope of the positive source
/// bound P (1 + y + (1+y) e^{L x} + (1+y) e^{K y}) with the pair's exponents.
/// For c_i <= 0 <= C_i this gives A phi >= 0, phi >= 0 and A(m + phi) > 0.
Field barrier_from_recipe(const EnvelopePair& pair, const HestonParams& params, const DerivedConstants& c,
                          double P = 1.0);

} // namespace hestonvi
