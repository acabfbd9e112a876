#include "hestonvi/params.hpp"

#include "hestonvi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hestonvi {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double b1_of(const HestonParams& p)
{
    return p.r - p.q - p.kappa * p.theta * p.rho / p.sigma;
}

// y' = a y, equation multiplied by a.
HestonParams scale_y(const HestonParams& p, double a)
{
    return {p.sigma * a, p.rho, p.kappa * a, p.theta * a, p.r * a, p.q * a};
}

} // namespace

HestonParams validate(const HestonParams& params, bool require_nonnegative_q)
{
    HestonParams p = params;
    if (!std::isfinite(p.sigma) || p.sigma == 0.0)
        throw CoefficientError("sigma", "sigma != 0 required, got " + fmt(p.sigma));
    if (!std::isfinite(p.rho) || !(p.rho > -1.0 && p.rho < 1.0))
        throw CoefficientError("rho", "-1 < rho < 1 required, got " + fmt(p.rho));
    if (!std::isfinite(p.kappa) || !(p.kappa > 0.0))
        throw CoefficientError("kappa", "kappa > 0 required, got " + fmt(p.kappa));
    if (!std::isfinite(p.theta) || !(p.theta > 0.0))
        throw CoefficientError("theta", "theta > 0 required, got " + fmt(p.theta));
    if (!std::isfinite(p.r) || !(p.r >= 0.0))
        throw CoefficientError("r", "r >= 0 required, got " + fmt(p.r));
    if (!std::isfinite(p.q) || (require_nonnegative_q && !(p.q >= 0.0)))
        throw CoefficientError("q", "q >= 0 required, got " + fmt(p.q));
    if (p.sigma < 0.0) {
        p.sigma = -p.sigma;
        p.rho = -p.rho;
    }
    return p;
}

DerivedConstants derive_constants(const HestonParams& params, std::optional<double> gamma)
{
    const HestonParams& p = params;
    const double s2 = p.sigma * p.sigma;
    const double omr2 = 1.0 - p.rho * p.rho;

    DerivedConstants c;
    c.beta = 2.0 * p.kappa * p.theta / s2;
    c.mu = 2.0 * p.kappa / s2;
    c.a1 = p.kappa * p.rho / p.sigma - 0.5;
    c.b1 = b1_of(p);
    c.nu0 = std::min(1.0, omr2 * s2);
    c.C2 = std::min(s2 * omr2 / 2.0, omr2 / 2.0);
    c.C3 = std::max(std::abs(c.a1), std::abs(c.b1)) / 2.0
           + std::max(0.5, std::abs(p.rho) * p.sigma / 2.0);
    c.C4 = std::max(s2 * omr2 / 2.0, omr2 / 2.0);
    c.gamma0 = c.C2 / (2.0 * c.C3);

    if (gamma) {
        if (!(*gamma > 0.0) || *gamma > c.gamma0)
            throw PreconditionError("gamma must lie in (0, gamma0 = " + fmt(c.gamma0) + "], got "
                                    + fmt(*gamma));
        c.gamma = *gamma;
    } else {
        c.gamma = c.gamma0;
    }

    const double g = c.gamma;
    const double rs = std::abs(p.rho * p.sigma);
    c.C1 = std::max(c.C4 + g * c.C3, p.r + g * c.C3);
    c.C6 = std::abs(c.a1) + std::max(g / 2.0, g * rs / 2.0) + std::abs(c.b1);
    c.C7 = 0.5 + rs + s2 / 2.0 + p.r;
    c.C5 = c.C6 + c.C7;
    c.lambda0 = c.C2;
    c.nu1 = c.C2 / 2.0;
    return c;
}

CoordinateChange normalize_b1(const HestonParams& params)
{
    CoordinateChange ch;
    ch.original = params;
    ch.transformed = params;

    const double b1 = b1_of(params);
    const double tol = 1e-12 * (1.0 + std::abs(params.r) + std::abs(params.q));
    if (std::abs(b1) <= tol) {
        ch.b1_residual = b1;
        ch.normalized = true;
        return ch;
    }

    auto special = [](const HestonParams& p) {
        const double d = (p.r - p.q) * p.sigma;
        return d != 0.0 && p.rho / d > 0.0;
    };

    HestonParams base = params;
    if (!special(params)) {
        const HestonParams& p = params;
        const double s2 = p.sigma * p.sigma;
        double m = 1.0;
        bool found = false;
        double rho_bar = 0.0, drift = 0.0, xi = 1.0;
        for (int k = 0; k <= 20; ++k, m *= 2.0) {
            xi = 1.0 + 2.0 * p.rho * p.sigma * m + s2 * m * m;
            rho_bar = (p.rho * p.sigma + m * s2) / (p.sigma * std::sqrt(xi));
            drift = (p.r - p.q + p.kappa * p.theta * m) / xi;
            if (rho_bar > 0.0 && drift > 0.0) {
                found = true;
                break;
            }
        }
        if (!found) {
            std::string failing = rho_bar > 0.0 ? "rbar - qbar > 0" : "rhobar > 0";
            throw NormalizationError("no shear m in {1, 2, ..., 2^20} satisfies " + failing);
        }
        const double bx = (2.0 * p.kappa * m + 1.0) / xi;
        const double s = 1.0 / bx;
        const double sigma_bar = p.sigma / std::sqrt(xi);
        const double r_bar = p.r / xi;
        base.sigma = s * sigma_bar;
        base.rho = rho_bar;
        base.kappa = s * s * p.kappa / xi;
        base.theta = p.theta;
        base.r = s * s * r_bar;
        base.q = base.r - s * drift;
        ch.m = m;
        ch.x_scale = bx;
        ch.f_scale = s * s / xi;
    }

    if (special(base)) {
        const double a = std::sqrt(base.kappa * base.theta * base.rho / ((base.r - base.q) * base.sigma));
        ch.a = a;
        ch.f_scale *= a;
        base = scale_y(base, a);
    }

    ch.transformed = validate(base, false);
    ch.b1_residual = b1_of(ch.transformed);
    ch.normalized = std::abs(ch.b1_residual) <= tol;
    return ch;
}

Field map_function(const CoordinateChange& change, const Field& u)
{
    if (change.is_identity())
        return u;
    const double a = change.a, m = change.m, b = change.x_scale;
    return Field([a, m, b, u](double xp, double yp) {
        const double Y = yp / a;
        const double X = xp / b - m * Y;
        const Jet2 j = u.jet(X, Y);
        Jet2 o;
        o.v = j.v;
        o.x = j.x / b;
        o.y = (-m * j.x + j.y) / a;
        o.xx = j.xx / (b * b);
        o.xy = (-m * j.xx + j.xy) / (a * b);
        o.yy = (m * m * j.xx - 2.0 * m * j.xy + j.yy) / (a * a);
        return o;
    });
}

Field map_source(const CoordinateChange& change, const Field& f)
{
    return change.f_scale * map_function(change, f);
}

} // namespace hestonvi
