#include "hestonvi/weighted_space.hpp"

#include "hestonvi/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace hestonvi {

double weight(double x, double y, const DerivedConstants& c)
{
    if (!(y > 0.0))
        throw DomainError("weight: y must be positive");
    return std::pow(y, c.beta - 1.0) * std::exp(-c.gamma * std::abs(x) - c.mu * y);
}

namespace {

// Integral of e^{-g|x|} over (lo, hi); bounds may be infinite.
double exp_abs_integral(double lo, double hi, double g)
{
    auto prim = [g](double x) {
        // antiderivative of e^{-g|x|}, continuous at 0
        if (std::isinf(x))
            return x > 0 ? 1.0 / g : -1.0 / g;
        return x >= 0 ? (1.0 - std::exp(-g * x)) / g : -(1.0 - std::exp(g * x)) / g;
    };
    return prim(hi) - prim(lo);
}

std::vector<double> x_nodes(double lo, double hi, int nx)
{
    std::vector<double> x(nx);
    if (lo < 0.0 && hi > 0.0) {
        int left = static_cast<int>(std::lround((nx - 1) * (-lo) / (hi - lo)));
        left = std::clamp(left, 1, nx - 2);
        const int right = nx - 1 - left;
        for (int i = 0; i <= left; ++i)
            x[i] = lo * (1.0 - static_cast<double>(i) / left);
        for (int i = 1; i <= right; ++i)
            x[left + i] = hi * static_cast<double>(i) / right;
        x[left] = 0.0;
    } else {
        for (int i = 0; i < nx; ++i)
            x[i] = lo + (hi - lo) * static_cast<double>(i) / (nx - 1);
    }
    return x;
}

// Weights of the 1-D hat functions for per-cell rules.
std::vector<double> hat_weights(const std::vector<double>& nodes, const std::vector<QuadRule>& rules)
{
    std::vector<double> w(nodes.size(), 0.0);
    for (size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double h = nodes[c + 1] - nodes[c];
        for (size_t p = 0; p < rules[c].nodes.size(); ++p) {
            const double t = (rules[c].nodes[p] - nodes[c]) / h;
            w[c] += rules[c].weights[p] * (1.0 - t);
            w[c + 1] += rules[c].weights[p] * t;
        }
    }
    return w;
}

struct Stencil
{
    double a, b, c;
};

// Three-point weights for the first derivative at p[k] using p[i0..i0+2].
Stencil first_weights(const std::vector<double>& p, int i0, int k)
{
    const double x0 = p[i0], x1 = p[i0 + 1], x2 = p[i0 + 2], t = p[k];
    return {((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2)),
            ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2)),
            ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))};
}

Stencil second_weights(const std::vector<double>& p, int i0)
{
    const double x0 = p[i0], x1 = p[i0 + 1], x2 = p[i0 + 2];
    return {2.0 / ((x0 - x1) * (x0 - x2)), 2.0 / ((x1 - x0) * (x1 - x2)),
            2.0 / ((x2 - x0) * (x2 - x1))};
}

int stencil_start(int k, int n)
{
    return std::clamp(k - 1, 0, n - 3);
}

// Derivative along x (dir = 0) or y (dir = 1) of nodal values.
Eigen::VectorXd diff(const WeightedGrid& g, const Eigen::VectorXd& v, int dir, int order)
{
    Eigen::VectorXd out(v.size());
    const auto& p = dir == 0 ? g.x : g.y;
    const int n = dir == 0 ? g.nx : g.ny;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int k = dir == 0 ? i : j;
            const int s = stencil_start(k, n);
            const Stencil w = order == 1 ? first_weights(p, s, k) : second_weights(p, s);
            auto val = [&](int m) { return dir == 0 ? v(g.index(m, j)) : v(g.index(i, m)); };
            out(g.index(i, j)) = w.a * val(s) + w.b * val(s + 1) + w.c * val(s + 2);
        }
    }
    return out;
}

} // namespace

TruncationReport truncate_domain(const Domain& domain, const DerivedConstants& c)
{
    TruncationReport rep;
    Domain d = domain;
    const double X = std::log(1e10) / c.gamma;
    if (std::isinf(d.x_lo))
        d.x_lo = -X;
    if (std::isinf(d.x_hi))
        d.x_hi = X;
    if (!(d.x_hi > d.x_lo))
        throw PreconditionError("domain: x_lo < x_hi required");
    if (!(d.y_max > 0.0))
        d.y_max = 20.0 * std::max(1.0, c.beta) / c.mu;

    const double ymass_full = std::tgamma(c.beta) / std::pow(c.mu, c.beta);
    const double ymass_kept = boost::math::tgamma_lower(c.beta, c.mu * d.y_max) / std::pow(c.mu, c.beta);
    const double xfull = exp_abs_integral(domain.x_lo, domain.x_hi, c.gamma);
    const double xkept = exp_abs_integral(d.x_lo, d.x_hi, c.gamma);
    rep.domain = d;
    rep.total_mass = xfull * ymass_full;
    rep.discarded_mass = rep.total_mass - xkept * ymass_kept;
    return rep;
}

double WeightedGrid::total_weight() const
{
    double s = 0.0;
    for (double w : node_weights)
        s += w;
    return s;
}

double WeightedGrid::integrate(const std::function<double(double, double)>& F) const
{
    double total = 0.0;
    for (int j = 0; j + 1 < ny; ++j) {
        const QuadRule& ry = y_rules[j];
        for (int i = 0; i + 1 < nx; ++i) {
            const QuadRule& rx = x_rules[i];
            for (size_t q = 0; q < ry.nodes.size(); ++q)
                for (size_t p = 0; p < rx.nodes.size(); ++p)
                    total += rx.weights[p] * ry.weights[q] * F(rx.nodes[p], ry.nodes[q]);
        }
    }
    return total;
}

GridPtr build_grid(const Domain& domain, int nx, int ny, double grading, const DerivedConstants& c,
                   int quad_points)
{
    if (nx < 3 || ny < 3)
        throw PreconditionError("build_grid: nx, ny >= 3 required");
    if (!(grading > 0.0))
        throw PreconditionError("build_grid: grading must be positive");
    const Domain d = truncate_domain(domain, c).domain;

    auto g = std::make_shared<WeightedGrid>();
    g->domain = d;
    g->consts = c;
    g->grading = grading;
    g->nx = nx;
    g->ny = ny;
    g->x = x_nodes(d.x_lo, d.x_hi, nx);
    g->y.resize(ny);
    for (int j = 0; j < ny; ++j)
        g->y[j] = d.y_max * std::pow(static_cast<double>(j) / (ny - 1), grading);
    g->y[ny - 1] = d.y_max;

    for (int i = 0; i + 1 < nx; ++i) {
        if (!(g->x[i + 1] > g->x[i]))
            throw AssemblyError("build_grid: degenerate x cell");
        QuadRule r = gauss_legendre(quad_points, g->x[i], g->x[i + 1]);
        for (int p = 0; p < quad_points; ++p)
            r.weights[p] *= std::exp(-c.gamma * std::abs(r.nodes[p]));
        g->x_rules.push_back(std::move(r));
        const double mid = 0.5 * (g->x[i] + g->x[i + 1]);
        g->x_sign.push_back(mid > 0.0 ? 1.0 : (mid < 0.0 ? -1.0 : 0.0));
    }
    for (int j = 0; j + 1 < ny; ++j) {
        if (!(g->y[j + 1] > g->y[j]))
            throw AssemblyError("build_grid: degenerate y cell");
        QuadRule r;
        if (j == 0) {
            r = gauss_power(quad_points, c.beta - 1.0, g->y[1]);
            for (int q = 0; q < quad_points; ++q)
                r.weights[q] *= std::exp(-c.mu * r.nodes[q]);
        } else {
            r = gauss_legendre(quad_points, g->y[j], g->y[j + 1]);
            for (int q = 0; q < quad_points; ++q)
                r.weights[q] *= std::pow(r.nodes[q], c.beta - 1.0) * std::exp(-c.mu * r.nodes[q]);
        }
        g->y_rules.push_back(std::move(r));
    }

    const auto wx = hat_weights(g->x, g->x_rules);
    const auto wy = hat_weights(g->y, g->y_rules);
    g->node_weights.resize(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            g->node_weights[g->index(i, j)] = wx[i] * wy[j];
    return g;
}

GridFunction::GridFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v))
{
    if (values.size() != grid->size())
        throw PreconditionError("GridFunction: value count does not match grid");
}

GridFunction::GridFunction(GridPtr g, double c)
    : grid(std::move(g)), values(Eigen::VectorXd::Constant(grid->size(), c))
{}

GridFunction interpolate(const GridPtr& grid, const Field& u)
{
    Eigen::VectorXd v(grid->size());
    for (int j = 0; j < grid->ny; ++j)
        for (int i = 0; i < grid->nx; ++i)
            v(grid->index(i, j)) = u(grid->x[i], grid->y[j]);
    return GridFunction(grid, std::move(v));
}

NodalDerivatives fd_derivatives(const GridFunction& u)
{
    const WeightedGrid& g = *u.grid;
    NodalDerivatives d;
    d.ux = diff(g, u.values, 0, 1);
    d.uy = diff(g, u.values, 1, 1);
    d.uxx = diff(g, u.values, 0, 2);
    d.uyy = diff(g, u.values, 1, 2);
    d.uxy = diff(g, d.uy, 0, 1);
    return d;
}

double norm_L2w(const GridFunction& u)
{
    const auto& w = u.grid->node_weights;
    double s = 0.0;
    for (int k = 0; k < u.values.size(); ++k)
        s += w[k] * u.values(k) * u.values(k);
    return std::sqrt(s);
}

double norm_H1w(const GridFunction& u)
{
    const WeightedGrid& g = *u.grid;
    const NodalDerivatives d = fd_derivatives(u);
    double s = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        const double y = g.y[k / g.nx];
        const double v = u.values(k);
        s += g.node_weights[k] * (y * (d.ux(k) * d.ux(k) + d.uy(k) * d.uy(k)) + (1.0 + y) * v * v);
    }
    return std::sqrt(s);
}

double norm_H2w(const GridFunction& u)
{
    const WeightedGrid& g = *u.grid;
    const NodalDerivatives d = fd_derivatives(u);
    double s = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        const double y = g.y[k / g.nx];
        const double v = u.values(k);
        const double hess = d.uxx(k) * d.uxx(k) + 2.0 * d.uxy(k) * d.uxy(k) + d.uyy(k) * d.uyy(k);
        const double grad = d.ux(k) * d.ux(k) + d.uy(k) * d.uy(k);
        s += g.node_weights[k] * (y * y * hess + (1.0 + y) * (1.0 + y) * grad + (1.0 + y) * v * v);
    }
    return std::sqrt(s);
}

double trace_neumann(const GridFunction& u, const HestonParams& params, double y_level)
{
    const WeightedGrid& g = *u.grid;
    const auto it = std::min_element(g.y.begin(), g.y.end(), [y_level](double a, double b) {
        return std::abs(a - y_level) < std::abs(b - y_level);
    });
    const int j = static_cast<int>(it - g.y.begin());
    if (j == 0 || std::abs(g.y[j] - y_level) > 1e-9 * std::max(1.0, g.domain.y_max))
        throw PreconditionError("trace_neumann: level must be a grid row with y > 0");

    const double y = g.y[j];
    const double yb = std::pow(y, g.consts.beta);
    std::vector<double> h(g.nx);
    const int sj = stencil_start(j, g.ny);
    const Stencil wy = first_weights(g.y, sj, j);
    for (int i = 0; i < g.nx; ++i) {
        const int si = stencil_start(i, g.nx);
        const Stencil wx = first_weights(g.x, si, i);
        const double ux = wx.a * u.at(si, j) + wx.b * u.at(si + 1, j) + wx.c * u.at(si + 2, j);
        const double uy = wy.a * u.at(i, sj) + wy.b * u.at(i, sj + 1) + wy.c * u.at(i, sj + 2);
        h[i] = std::abs(yb * (params.rho * ux + params.sigma * uy));
    }
    double total = 0.0;
    for (int i = 0; i + 1 < g.nx; ++i) {
        const double dx = g.x[i + 1] - g.x[i];
        const QuadRule& r = g.x_rules[i];
        for (size_t p = 0; p < r.nodes.size(); ++p) {
            const double t = (r.nodes[p] - g.x[i]) / dx;
            total += r.weights[p] * ((1.0 - t) * h[i] + t * h[i + 1]);
        }
    }
    return total;
}

namespace {

double integrate_half_line(const std::function<double(double)>& f, std::vector<double> cuts, double Y)
{
    using namespace boost::math::quadrature;
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [Y](double c) { return !(c > 0.0 && c < Y); }),
               cuts.end());
    std::sort(cuts.begin(), cuts.end());
    if (std::isinf(Y) && cuts.empty())
        cuts.push_back(1.0);

    tanh_sinh<double> ts;
    double total = 0.0;
    double lo = 0.0;
    for (double c : cuts) {
        total += ts.integrate(f, lo, c, 1e-12);
        lo = c;
    }
    if (std::isinf(Y)) {
        exp_sinh<double> es;
        total += es.integrate(f, lo, std::numeric_limits<double>::infinity(), 1e-12);
    } else {
        total += ts.integrate(f, lo, Y, 1e-12);
    }
    return total;
}

} // namespace

HardyResult hardy_check(const Profile& v, double beta, double p, const std::vector<double>& breaks,
                        double Y, double tol)
{
    if (beta == p - 1.0)
        throw PreconditionError("hardy_check: beta = p - 1 is excluded");
    HardyResult res;
    res.constant = std::pow(std::abs(p / (beta - p + 1.0)), p);
    // Integrands are zeroed where v underflows against the power of y.
    auto lhs_f = [&](double y) {
        const double a = std::abs(v(y).v);
        const double f = a == 0.0 ? 0.0 : std::pow(a, p) * std::pow(y, beta - p);
        return std::isfinite(f) ? f : 0.0;
    };
    auto rhs_f = [&](double y) {
        const double a = std::abs(v(y).d);
        const double f = a == 0.0 ? 0.0 : std::pow(a, p) * std::pow(y, beta);
        return std::isfinite(f) ? f : 0.0;
    };
    res.lhs = integrate_half_line(lhs_f, breaks, Y);
    res.rhs = res.constant * integrate_half_line(rhs_f, breaks, Y);
    res.holds = res.lhs <= res.rhs * (1.0 + tol) + 1e-300;
    return res;
}

namespace {

double f_exp(double t)
{
    return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

double smooth_step(double t)
{
    if (t <= 0.0)
        return 0.0;
    if (t >= 1.0)
        return 1.0;
    const double a = f_exp(t), b = f_exp(1.0 - t);
    return a / (a + b);
}

double smooth_step_d(double t)
{
    if (t <= 0.0 || t >= 1.0)
        return 0.0;
    const double a = f_exp(t), b = f_exp(1.0 - t);
    const double da = a / (t * t), db = b / ((1.0 - t) * (1.0 - t));
    return (da * b + a * db) / ((a + b) * (a + b));
}

double smooth_step_integral(double t)
{
    if (t <= 0.0)
        return 0.0;
    if (t > 1.0)
        return 0.5 + (t - 1.0);
    static const QuadRule ref = gauss_legendre(30, 0.0, 1.0);
    double s = 0.0;
    for (size_t k = 0; k < ref.nodes.size(); ++k)
        s += ref.weights[k] * smooth_step(t * ref.nodes[k]);
    return s * t;
}

} // namespace

LogCutoff::LogCutoff(double N, double eps, double delta)
    : N_(N), eps_(eps), delta_(delta), logN_(std::log(N))
{
    if (!(N > 4.0))
        throw PreconditionError("log_cutoff: N > 4 required");
    if (!(eps > 0.0))
        throw PreconditionError("log_cutoff: eps > 0 required");
    if (!(delta > 0.0 && delta < 0.5))
        throw PreconditionError("log_cutoff: delta in (0, 1/2) required");
}

double LogCutoff::phi(double s) const
{
    const double c = 1.0 / (1.0 - delta_);
    if (s <= 0.0)
        return 0.0;
    if (s >= 1.0)
        return 1.0;
    if (s < delta_)
        return c * delta_ * smooth_step_integral(s / delta_);
    if (s <= 1.0 - delta_)
        return c * (0.5 * delta_ + s - delta_);
    return 1.0 - c * delta_ * smooth_step_integral((1.0 - s) / delta_);
}

double LogCutoff::dphi(double s) const
{
    const double c = 1.0 / (1.0 - delta_);
    return c * smooth_step(s / delta_) * smooth_step((1.0 - s) / delta_);
}

double LogCutoff::ddphi(double s) const
{
    const double c = 1.0 / (1.0 - delta_);
    return c / delta_
           * (smooth_step_d(s / delta_) * smooth_step((1.0 - s) / delta_)
              - smooth_step(s / delta_) * smooth_step_d((1.0 - s) / delta_));
}

Jet1 LogCutoff::operator()(double y) const
{
    Jet1 j;
    const double ay = std::abs(y);
    if (ay == 0.0)
        return j;
    const double D = logN_ - std::log(2.0);
    const double t = std::log(ay) - std::log(eps_);
    const double s = (logN_ + t) / D;
    const double c1 = dphi(s) / D;
    const double c2 = ddphi(s) / (D * D);
    j.v = phi(s);
    j.d = c1 / y;
    j.dd = (c2 - c1) / (y * y);
    return j;
}

double LogCutoff::energy(double beta) const
{
    // Substituting y = eps e^t: int |psi'|^2 y^beta dy = eps^{beta-1} int chi'(t)^2 e^{(beta-1) t} dt.
    using boost::math::quadrature::gauss_kronrod;
    const double D = logN_ - std::log(2.0);
    auto f = [&](double s) {
        const double chi = dphi(s) / D;
        const double t = s * D - logN_;
        return chi * chi * std::exp((beta - 1.0) * t) * D;
    };
    double total = 0.0;
    const double cuts[4] = {0.0, delta_, 1.0 - delta_, 1.0};
    for (int k = 0; k < 3; ++k)
        total += gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 10, 1e-14);
    return 2.0 * std::pow(eps_, beta - 1.0) * total;
}

double LogCutoff::measured_c() const
{
    const double c = 1.0 / (1.0 - delta_);
    return c * logN_ / (logN_ - std::log(2.0));
}

double LogCutoff::bound(double beta) const
{
    const double c = measured_c();
    if (beta > 1.0)
        return c * c * std::pow(2.0, 2.0 - beta) / ((beta - 1.0) * logN_ * logN_) * std::pow(eps_, beta - 1.0);
    if (beta == 1.0)
        return 2.0 * c * c / logN_;
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace hestonvi
