#include "hestonvi/cir_oracle.hpp"

#include "hestonvi/errors.hpp"
#include "hestonvi/quadrature.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hestonvi {

namespace {

constexpr double kSeriesLimit = 30.0;
constexpr double kConnectionLimit = 2.0;

bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::round(v); }
bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

// 1 / Gamma(x), zero at the poles.
double rgamma(double x) { return is_nonpositive_integer(x) ? 0.0 : 1.0 / std::tgamma(x); }

double m_series(double a, double b, double z)
{
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 100000; ++n) {
        term *= (a + n) * z / ((b + n) * (n + 1.0));
        sum += term;
        if (term == 0.0)
            break;
        // Stop once the terms are shrinking and negligible.
        if (n > z && std::abs(term) <= 1e-17 * std::abs(sum))
            break;
    }
    return sum;
}

double m_asymptotic(double a, double b, double z)
{
    // Gamma(b)/Gamma(a) e^z z^{a-b} sum_n (b-a)_n (1-a)_n / n! z^{-n}
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 200; ++n) {
        const double next = term * (b - a + n) * (1.0 - a + n) / ((n + 1.0) * z);
        if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-17 * std::abs(sum))
            break;
        term = next;
        sum += term;
    }
    return std::tgamma(b) * rgamma(a) * std::exp(z) * std::pow(z, a - b) * sum;
}

double u_connection(double a, double b, double z)
{
    return std::tgamma(1.0 - b) * rgamma(a - b + 1.0) * m_series(a, b, z)
           + std::tgamma(b - 1.0) * rgamma(a) * std::pow(z, 1.0 - b) * m_series(a - b + 1.0, 2.0 - b, z);
}

// Laplace integral after t = s^{1/a}, which removes the endpoint singularity.
double u_integral(double a, double b, double z)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [a, b, z](double s) {
        const double t = std::pow(s, 1.0 / a);
        const double v = std::exp(-z * t) * std::pow(1.0 + t, b - a - 1.0);
        return std::isfinite(v) ? v : 0.0;
    };
    const double I = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
    return I / std::tgamma(a + 1.0);
}

} // namespace

KummerValue kummer_m_ex(double a, double b, double z)
{
    if (is_nonpositive_integer(b))
        throw ParamError("Kummer M: b must not be a non-positive integer, got " + std::to_string(b));
    if (!(z >= 0.0))
        throw ParamError("Kummer M: z must be non-negative");
    if (z <= kSeriesLimit || is_nonpositive_integer(a))
        return {m_series(a, b, z), false};
    return {m_asymptotic(a, b, z), true};
}

KummerValue kummer_u_ex(double a, double b, double z)
{
    if (!(z > 0.0))
        throw ParamError("Kummer U: z must be positive");
    if (!(b > 0.0))
        throw ParamError("Kummer U: b must be positive");
    if (a < 0.0)
        throw ParamError("Kummer U: a must be non-negative");
    const bool warn = b >= 1.0;
    if (a == 0.0)
        return {1.0, warn};
    if (!is_integer(b) && z <= kConnectionLimit)
        return {u_connection(a, b, z), warn};
    return {u_integral(a, b, z), warn};
}

double kummer_u_scaled_derivative(double a, double b, double z)
{
    if (!(b > 0.0 && b < 1.0))
        throw ParamError("scaled U derivative needs 0 < b < 1");
    if (!(z > 0.0))
        throw ParamError("Kummer U: z must be positive");
    if (z > kConnectionLimit)
        return -a * std::pow(z, b) * kummer_u(a + 1.0, b + 1.0, z);
    const double c1 = std::tgamma(1.0 - b) * rgamma(a - b + 1.0);
    const double c2 = std::tgamma(b - 1.0) * rgamma(a);
    const double a2 = a - b + 1.0, b2 = 2.0 - b;
    const double dM = (a / b) * m_series(a + 1.0, b + 1.0, z);
    const double M2 = m_series(a2, b2, z);
    const double dM2 = (a2 / b2) * m_series(a2 + 1.0, b2 + 1.0, z);
    return c1 * std::pow(z, b) * dM + c2 * ((1.0 - b) * M2 + z * dM2);
}

double kummer_u_trace_limit(double a, double b) { return -a * std::tgamma(b) / std::tgamma(a + 1.0); }

CirBranches cir_homogeneous(const HestonParams& params, double y)
{
    if (!(y > 0.0))
        throw PreconditionError("cir_homogeneous needs y > 0");
    const DerivedConstants c = derive_constants(params);
    const double a = params.r / params.kappa, z = c.mu * y;
    const KummerValue m = kummer_m_ex(a, c.beta, z);
    const KummerValue u = kummer_u_ex(a, c.beta, z);
    return {m.value, u.value, m.accuracy_warning || u.accuracy_warning};
}

double cir_trace_level(const HestonParams& params, CirBranch branch, double y)
{
    const DerivedConstants c = derive_constants(params);
    const double a = params.r / params.kappa, b = c.beta, z = c.mu * y;
    const double scale = std::pow(c.mu, 1.0 - b);
    if (branch == CirBranch::M)
        return scale * std::pow(z, b) * (a / b) * kummer_m(a + 1.0, b + 1.0, z);
    if (b < 1.0)
        return scale * kummer_u_scaled_derivative(a, b, z);
    return -scale * a * std::pow(z, b) * kummer_u(a + 1.0, b + 1.0, z);
}

double cir_trace_constant(const HestonParams& params)
{
    const DerivedConstants c = derive_constants(params);
    if (!(c.beta > 0.0 && c.beta < 1.0))
        throw PreconditionError("the U-branch trace is finite only for 0 < beta < 1");
    return std::pow(c.mu, 1.0 - c.beta) * kummer_u_trace_limit(params.r / params.kappa, c.beta);
}

BoundaryClassification classify_boundary(const HestonParams& params, double Y)
{
    const DerivedConstants c = derive_constants(params);
    const double a = params.r / params.kappa, b = c.beta, mu = c.mu;
    BoundaryClassification out;
    out.beta = b;

    struct Derivs
    {
        double v, d1, d2;
    };
    auto branch_m = [&](double y) {
        const double z = mu * y;
        return Derivs{kummer_m(a, b, z), mu * (a / b) * kummer_m(a + 1, b + 1, z),
                      mu * mu * a * (a + 1) / (b * (b + 1)) * kummer_m(a + 2, b + 2, z)};
    };
    auto branch_u = [&](double y) {
        const double z = mu * y;
        return Derivs{kummer_u(a, b, z), -mu * a * kummer_u(a + 1, b + 1, z),
                      mu * mu * a * (a + 1) * kummer_u(a + 2, b + 2, z)};
    };

    const int K = 10;
    const QuadRule gl = gauss_legendre(24, 0.0, 1.0);
    auto growth = [&](auto&& F, bool second) {
        NormGrowth g;
        double total = 0.0;
        std::vector<double> inc;
        double hi = Y;
        for (int k = 1; k <= K; ++k) {
            const double lo = Y * std::pow(10.0, -k);
            // Integrate in t = log y over (log lo, log hi).
            const double tl = std::log(lo), th = std::log(hi);
            double part = 0.0;
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = tl + (th - tl) * gl.nodes[q];
                const double y = std::exp(t);
                const Derivs d = F(y);
                double integrand = d.v * d.v + y * d.d1 * d.d1;
                if (second)
                    integrand += y * y * d.d2 * d.d2;
                part += gl.weights[q] * (th - tl) * integrand * std::pow(y, b - 1.0) * std::exp(-mu * y) * y;
            }
            total += part;
            inc.push_back(part);
            g.cutoffs.push_back(lo);
            g.norms.push_back(total);
            hi = lo;
        }
        g.finite = true;
        for (int k = K - 3; k < K; ++k)
            g.finite = g.finite && inc[k] < 0.7 * inc[k - 1];
        return g;
    };
    out.u_h1 = growth(branch_u, false);
    out.u_h2 = growth(branch_u, true);
    out.m_h1 = growth(branch_m, false);
    out.m_h2 = growth(branch_m, true);
    return out;
}

CirSolve solve_cir_1d(const HestonParams& params, double Y, int nodes, double grading)
{
    if (nodes < 3)
        throw PreconditionError("solve_cir_1d needs at least 3 nodes");
    if (!(params.r > 0.0))
        throw PreconditionError("solve_cir_1d needs r > 0");
    const DerivedConstants c = derive_constants(params);
    const double s2 = 0.5 * params.sigma * params.sigma;
    const int n = nodes;
    CirSolve out;
    out.y.resize(n);
    for (int i = 0; i < n; ++i)
        out.y[i] = Y * std::pow(static_cast<double>(i) / (n - 1), grading);

    std::vector<Eigen::Triplet<double>> trip;
    const QuadRule first = gauss_power(10, c.beta - 1.0, out.y[1]);
    for (int e = 0; e + 1 < n; ++e) {
        const double y0 = out.y[e], y1 = out.y[e + 1], h = y1 - y0;
        QuadRule rule;
        if (e == 0) {
            rule = first;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                rule.weights[q] *= std::exp(-c.mu * rule.nodes[q]);
        } else {
            rule = gauss_legendre(10, y0, y1);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                rule.weights[q] *= std::pow(rule.nodes[q], c.beta - 1.0) * std::exp(-c.mu * rule.nodes[q]);
        }
        double loc[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double y = rule.nodes[q], w = rule.weights[q];
            const double phi[2] = {(y1 - y) / h, (y - y0) / h};
            const double dphi[2] = {-1.0 / h, 1.0 / h};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    loc[i][j] += w * (s2 * y * dphi[i] * dphi[j] + params.r * phi[i] * phi[j]);
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                trip.emplace_back(e + i, e + j, loc[i][j]);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    // Dirichlet row at y = Y.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs -= A.col(n - 1) * 1.0;
    A.prune([n](Eigen::Index r, Eigen::Index col, double) { return r != n - 1 && col != n - 1; });
    A.coeffRef(n - 1, n - 1) = 1.0;
    rhs(n - 1) = 1.0;
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
        throw LinearSolveError("1-D CIR system is singular");
    const Eigen::VectorXd u = lu.solve(rhs);

    const double a = params.r / params.kappa;
    const double mY = kummer_m(a, c.beta, c.mu * Y);
    out.u.assign(u.data(), u.data() + n);
    for (int i = 0; i < n; ++i) {
        const double exact = kummer_m(a, c.beta, c.mu * out.y[i]) / mY;
        out.max_rel_error = std::max(out.max_rel_error, std::abs(out.u[i] - exact) / std::abs(exact));
    }
    return out;
}

} // namespace hestonvi
