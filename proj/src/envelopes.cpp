#include "hestonvi/envelopes.hpp"

#include "hestonvi/errors.hpp"
#include "hestonvi/operator_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hestonvi {

namespace {

Field envelope(double a0, double a2, double a3, double e3, double a4, double e4)
{
    return Field::affine(a0, a2) + Field::exp_x(a3, e3) + Field::exp_y(a4, e4);
}

Field source_bound(double s0, double s2, double s3, double e3, double s4, double e4)
{
    const Field one_y = Field::affine(1.0, 1.0);
    return Field::affine(s0, s2) + one_y * Field::exp_x(s3, e3) + one_y * Field::exp_y(s4, e4);
}

struct Solved
{
    double a0, a2, a3, a4;
};

// One side of the construction; pick = min for the lower envelope, max for the upper.
Solved solve_side(double s0, double s2, double s3, double s4, double e3, double e4, const HestonParams& p,
                  const DerivedConstants& c, const EnvelopeOptions& opt, const char* tag, bool lower)
{
    auto fail = [tag](const std::string& what) { throw SideConditionError(std::string(tag) + ": " + what); };
    const double s2sig = p.sigma * p.sigma;
    Solved out{0, 0, 0, 0};

    if ((s0 != 0.0 || s2 != 0.0) && !(p.r > 0.0))
        fail("r > 0 required for a nonzero constant or linear coefficient");
    if (s2 != 0.0 && !(std::min(p.kappa, p.r) > 0.0))
        fail("min{kappa, r} > 0 required for a nonzero linear coefficient");
    out.a2 = s2 / (p.kappa + p.r);
    out.a0 = (s0 != 0.0 || s2 != 0.0) ? (s0 + s2 * p.kappa * p.theta / (p.kappa + p.r)) / p.r : 0.0;

    auto pick = [lower](double a, double b) { return lower ? std::min(a, b) : std::max(a, b); };

    if (s3 != 0.0) {
        if (!(e3 > 0.0 && e3 < 1.0))
            fail("0 < exponent < 1 required for the e^{x} term");
        const double t1 = p.r - e3 * (p.r - p.q);
        if (!(t1 > 0.0))
            fail("r > exponent (r - q) required for the e^{x} term");
        if (opt.require_integrability && !(2.0 * e3 < c.gamma))
            fail("2 * exponent < gamma required for the e^{x} term");
        out.a3 = pick(s3 / t1, 2.0 * s3 / (e3 * (1.0 - e3)));
    }
    if (s4 != 0.0) {
        const double lim = std::min(2.0 * p.kappa / s2sig, p.r / (p.kappa * p.theta));
        if (!(e4 > 0.0 && e4 < lim))
            fail("0 < exponent < min{2 kappa / sigma^2, r / (kappa theta)} required for the e^{y} term");
        if (opt.require_integrability && !(2.0 * e4 < c.mu))
            fail("2 * exponent < mu required for the e^{y} term");
        const double t1 = p.r - p.kappa * p.theta * e4;
        const double t2 = e4 * (p.kappa - s2sig * e4 / 2.0);
        out.a4 = pick(s4 / t1, s4 / t2);
    }
    return out;
}

} // namespace

EnvelopePair derive_envelopes(const EnvelopeCoeffs& in, const HestonParams& params, const DerivedConstants& c,
                              EnvelopeOptions options)
{
    const EnvelopeCoeffs& e = in;
    if (e.c0 > e.C0 || e.c2 > e.C2 || e.c3 > e.C3 || e.c4 > e.C4)
        throw EnvelopeError("source bounds must satisfy c_i <= C_i");
    if (e.k > e.K || e.l > e.L)
        throw EnvelopeError("exponents must satisfy k <= K and l <= L");

    const Solved lo = solve_side(e.c0, e.c2, e.c3, e.c4, e.l, e.k, params, c, options, "lower", true);
    const Solved hi = solve_side(e.C0, e.C2, e.C3, e.C4, e.L, e.K, params, c, options, "upper", false);

    EnvelopePair pair;
    pair.coeffs = e;
    EnvelopeCoeffs& o = pair.coeffs;
    o.d0 = lo.a0;
    o.d2 = lo.a2;
    o.d3 = lo.a3;
    o.d4 = lo.a4;
    o.D0 = hi.a0;
    o.D2 = hi.a2;
    o.D3 = hi.a3;
    o.D4 = hi.a4;
    if (o.d0 > o.D0 || o.d2 > o.D2 || o.d3 > o.D3 || o.d4 > o.D4)
        throw EnvelopeError("derived coefficients violate d_i <= D_i");

    pair.m = envelope(o.d0, o.d2, o.d3, o.l, o.d4, o.k);
    pair.M = envelope(o.D0, o.D2, o.D3, o.L, o.D4, o.K);
    pair.n = source_bound(o.c0, o.c2, o.c3, o.l, o.c4, o.k);
    pair.N = source_bound(o.C0, o.C2, o.C3, o.L, o.C4, o.K);
    return pair;
}

bool AdmissibilityReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Violation& v) { return v.holds(); });
}

double AdmissibilityReport::worst(const std::string& name) const
{
    for (const auto& v : checks)
        if (v.name == name)
            return v.worst;
    throw PreconditionError("no admissibility check named " + name);
}

AdmissibilityReport check_admissible_envelopes(const EnvelopePair& pair, const Field& f, const Field& g,
                                               const Field& psi, const GridPtr& grid, const HestonParams& params)
{
    const WeightedGrid& G = *grid;
    AdmissibilityReport rep;
    Violation mM{"m<=M"}, Amf{"Am<=f"}, fAM{"f<=AM"}, mg{"m<=g"}, gM{"g<=M"}, psiM{"psi<=M"};
    auto bump = [](Violation& v, double lhs, double rhs) { v.worst = std::max(v.worst, lhs - rhs); };

    for (int j = 0; j < G.ny; ++j) {
        for (int i = 0; i < G.nx; ++i) {
            const double x = G.x[i], y = G.y[j];
            const double m = pair.m(x, y), M = pair.M(x, y), fv = f(x, y);
            bump(mM, m, M);
            bump(Amf, apply_A(pair.m, x, y, params), fv);
            bump(fAM, fv, apply_A(pair.M, x, y, params));
            bump(psiM, psi(x, y), M);
            if (G.is_dirichlet(i, j)) {
                const double gv = g(x, y);
                bump(mg, m, gv);
                bump(gM, gv, M);
            }
        }
    }
    rep.checks = {mM, Amf, fAM, mg, gM, psiM};

    const EnvelopeCoeffs& e = pair.coeffs;
    const auto& c = G.consts;
    auto ok = [&](double factor) {
        bool good = true;
        if (e.d3 != 0.0)
            good = good && factor * e.l < c.gamma;
        if (e.D3 != 0.0)
            good = good && factor * e.L < c.gamma;
        if (e.d4 != 0.0)
            good = good && factor * e.k < c.mu;
        if (e.D4 != 0.0)
            good = good && factor * e.K < c.mu;
        return good;
    };
    rep.l2_integrable = ok(2.0);
    rep.lq_integrable = ok(rep.q);
    rep.l2_norm_M = std::sqrt(G.integrate([&](double x, double y) {
        const double v = (1.0 + y) * (1.0 + y) * pair.M(x, y);
        return v * v;
    }));
    rep.lq_norm_M = std::pow(G.integrate([&](double x, double y) {
                                 const double v = std::sqrt(1.0 + y) * pair.M(x, y);
                                 return std::pow(std::abs(v), rep.q);
                             }),
                             1.0 / rep.q);
    return rep;
}

BarrierReport check_barrier(const Field& phi, const EnvelopePair& pair, const Field& g, const GridPtr& grid,
                            const HestonParams& params)
{
    const WeightedGrid& G = *grid;
    BarrierReport rep;
    rep.min_A_phi_minus_A_g = std::numeric_limits<double>::infinity();
    rep.min_A_m_phi_minus_2A_g = std::numeric_limits<double>::infinity();
    rep.min_phi_minus_g_gamma1 = std::numeric_limits<double>::infinity();
    double ratio = -std::numeric_limits<double>::infinity();
    const Field mphi = pair.m + phi;
    for (int j = 0; j < G.ny; ++j) {
        for (int i = 0; i < G.nx; ++i) {
            const double x = G.x[i], y = G.y[j];
            const double Ag = apply_A(g, x, y, params);
            const double Aphi = apply_A(phi, x, y, params);
            const double Amphi = apply_A(mphi, x, y, params);
            rep.min_A_phi_minus_A_g = std::min(rep.min_A_phi_minus_A_g, Aphi - Ag);
            const double denom = Amphi - 2.0 * Ag;
            rep.min_A_m_phi_minus_2A_g = std::min(rep.min_A_m_phi_minus_2A_g, denom);
            if (!(denom > 0.0))
                throw BarrierError("A(m + phi - 2g) <= 0 at node (" + std::to_string(x) + ", "
                                   + std::to_string(y) + ")");
            const double num = (1.0 + y) * (pair.M(x, y) + phi(x, y) - 2.0 * g(x, y));
            ratio = std::max(ratio, num / denom);
            if (G.is_dirichlet(i, j))
                rep.min_phi_minus_g_gamma1 = std::min(rep.min_phi_minus_g_gamma1, phi(x, y) - g(x, y));
        }
    }
    rep.ratio_estimate = 1.1 * ratio;
    return rep;
}

Field barrier_from_recipe(const EnvelopePair& pair, const HestonParams& params, const DerivedConstants& c,
                          double P)
{
    const EnvelopeCoeffs& e = pair.coeffs;
    EnvelopeCoeffs pos;
    pos.C0 = P;
    pos.C2 = P;
    pos.C3 = e.L > 0.0 ? P : 0.0;
    pos.C4 = e.K > 0.0 ? P : 0.0;
    pos.L = e.L;
    pos.K = e.K;
    pos.l = e.L;
    pos.k = e.K;
    const EnvelopePair upper = derive_envelopes(pos, params, c, {false});
    return upper.M - pair.m;
}

} // namespace hestonvi
