#include "hestonvi/operator_assembly.hpp"

#include "hestonvi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hestonvi {

double apply_A(const Field& u, double x, double y, const HestonParams& p)
{
    const Jet2 j = u.jet(x, y);
    return -0.5 * y * (j.xx + 2.0 * p.rho * p.sigma * j.xy + p.sigma * p.sigma * j.yy)
           - (p.r - p.q - 0.5 * y) * j.x - p.kappa * (p.theta - y) * j.y + p.r * j.v;
}

double apply_A_divergence(const Field& u, double x, double y, const HestonParams& p)
{
    const Jet2 j = u.jet(x, y);
    const double beta = 2.0 * p.kappa * p.theta / (p.sigma * p.sigma);
    const double rs = p.rho * p.sigma, s2 = p.sigma * p.sigma;
    const double b1 = p.r - p.q - p.kappa * p.theta * p.rho / p.sigma;
    const double yb = std::pow(y, beta);
    const double flux_x_x = yb * (j.xx + rs * j.xy);
    const double flux_y_y = beta * std::pow(y, beta - 1.0) * (rs * j.x + s2 * j.y) + yb * (rs * j.xy + s2 * j.yy);
    return -0.5 * std::pow(y, 1.0 - beta) * (flux_x_x + flux_y_y) - b1 * j.x + 0.5 * y * j.x
           + p.kappa * y * j.y + p.r * j.v;
}

double apply_A_lambda(const Field& u, double x, double y, const HestonParams& p, double lambda)
{
    return apply_A(u, x, y, p) + lambda * (1.0 + y) * u(x, y);
}

Field image_A(const Field& u, const HestonParams& p)
{
    return Field([u, p](double x, double y) { return Jet2{apply_A(u, x, y, p)}; });
}

namespace {

using Tab = double[2][2];

// Per-cell 1-D integrals of the linear shape functions.
struct XTables
{
    Tab E0{}; // X_a X_b
    Tab E1{}; // X_a' X_b
    Tab E2{}; // X_a' X_b'
};

struct YTables
{
    Tab F0{}; // Y_a Y_b
    Tab F1{}; // Y_a Y_b y
    Tab G0{}; // Y_a' Y_b
    Tab G1{}; // Y_a' Y_b y
    Tab H1{}; // Y_a' Y_b' y
};

void shape(double lo, double hi, double t, double val[2], double der[2])
{
    const double h = hi - lo;
    const double s = (t - lo) / h;
    val[0] = 1.0 - s;
    val[1] = s;
    der[0] = -1.0 / h;
    der[1] = 1.0 / h;
}

XTables x_tables(const WeightedGrid& g, int i)
{
    XTables t;
    const QuadRule& r = g.x_rules[i];
    for (size_t p = 0; p < r.nodes.size(); ++p) {
        double v[2], d[2];
        shape(g.x[i], g.x[i + 1], r.nodes[p], v, d);
        const double w = r.weights[p];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                t.E0[a][b] += w * v[a] * v[b];
                t.E1[a][b] += w * d[a] * v[b];
                t.E2[a][b] += w * d[a] * d[b];
            }
    }
    return t;
}

YTables y_tables(const WeightedGrid& g, int j)
{
    YTables t;
    const QuadRule& r = g.y_rules[j];
    for (size_t q = 0; q < r.nodes.size(); ++q) {
        double v[2], d[2];
        const double y = r.nodes[q];
        shape(g.y[j], g.y[j + 1], y, v, d);
        const double w = r.weights[q];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                t.F0[a][b] += w * v[a] * v[b];
                t.F1[a][b] += w * v[a] * v[b] * y;
                t.G0[a][b] += w * d[a] * v[b];
                t.G1[a][b] += w * d[a] * v[b] * y;
                t.H1[a][b] += w * d[a] * d[b] * y;
            }
    }
    return t;
}

SpMat from_triplets(int n, std::vector<Eigen::Triplet<double>>& trip)
{
    SpMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

// Discrete upwinding: adds D with d_ij = -max(0, a_ij, a_ji) off the diagonal
// and zero row sums.
SpMat upwinded(const SpMat& A)
{
    const int n = static_cast<int>(A.rows());
    const SpMat At = A.transpose();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros() + n);
    std::vector<double> diag(n, 0.0);
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            trip.emplace_back(i, j, it.value());
            if (i == j)
                continue;
            const double aji = At.coeff(i, j);
            const double d = -std::max({0.0, it.value(), aji});
            if (d != 0.0) {
                trip.emplace_back(i, j, d);
                diag[i] -= d;
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (diag[i] != 0.0)
            trip.emplace_back(i, i, diag[i]);
    return from_triplets(n, trip);
}

} // namespace

SpMat DiscreteForm::coercive(double lambda) const
{
    if (options.upwind) {
        SpMat m = matrix_a;
        for (int i = 0; i < m.rows(); ++i)
            m.coeffRef(i, i) += lambda * lumped_1py(i);
        return m;
    }
    SpMat m = matrix_a + lambda * matrix_mass_1py;
    m.makeCompressed();
    return m;
}

double DiscreteForm::norm_V(const Eigen::VectorXd& u) const
{
    return std::sqrt(std::max(0.0, u.dot(matrix_gram_v * u)));
}

double DiscreteForm::norm_H(const Eigen::VectorXd& u) const
{
    return std::sqrt(std::max(0.0, u.dot(matrix_mass * u)));
}

double DiscreteForm::norm_H_1py(const Eigen::VectorXd& u) const
{
    return std::sqrt(std::max(0.0, u.dot(matrix_mass_1py * u)));
}

DiscreteForm assemble(const GridPtr& grid, const HestonParams& params, AssemblyOptions options)
{
    const WeightedGrid& g = *grid;
    DiscreteForm form;
    form.grid = grid;
    form.params = params;
    form.consts = g.consts;
    form.options = options;

    const HestonParams& p = params;
    const DerivedConstants& c = g.consts;
    if (std::abs(c.b1) > 1e-12 * (1.0 + std::abs(p.r) + std::abs(p.q)))
        form.warnings.push_back("b1 != 0: the Garding constants assume the Dirichlet structure of Gamma_1");

    const double rs = p.rho * p.sigma, s2 = p.sigma * p.sigma;
    std::vector<XTables> xt;
    std::vector<YTables> yt;
    for (int i = 0; i + 1 < g.nx; ++i)
        xt.push_back(x_tables(g, i));
    for (int j = 0; j + 1 < g.ny; ++j)
        yt.push_back(y_tables(g, j));

    const size_t cells = static_cast<size_t>(g.nx - 1) * (g.ny - 1);
    std::vector<Eigen::Triplet<double>> ta, tm, tm1, tv;
    ta.reserve(16 * cells);
    tm.reserve(16 * cells);
    tm1.reserve(16 * cells);
    tv.reserve(16 * cells);

    for (int j = 0; j + 1 < g.ny; ++j) {
        const YTables& Y = yt[j];
        for (int i = 0; i + 1 < g.nx; ++i) {
            const XTables& X = xt[i];
            const double sg = g.x_sign[i];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const int trial = g.index(i + a, j + b);
                    for (int cc = 0; cc < 2; ++cc)
                        for (int d = 0; d < 2; ++d) {
                            const int test = g.index(i + cc, j + d);
                            const double diffusion =
                                0.5 * X.E2[a][cc] * Y.F1[b][d] + 0.5 * rs * X.E1[cc][a] * Y.G1[b][d]
                                + 0.5 * rs * X.E1[a][cc] * Y.G1[d][b] + 0.5 * s2 * X.E0[a][cc] * Y.H1[b][d];
                            const double weight_drift =
                                -0.5 * c.gamma * sg * (X.E1[a][cc] * Y.F1[b][d] + rs * X.E0[a][cc] * Y.G1[b][d]);
                            const double drift = -X.E1[a][cc] * (c.a1 * Y.F1[b][d] + c.b1 * Y.F0[b][d]);
                            const double mass = X.E0[a][cc] * Y.F0[b][d];
                            const double mass1 = X.E0[a][cc] * (Y.F0[b][d] + Y.F1[b][d]);
                            ta.emplace_back(test, trial, diffusion + weight_drift + drift + p.r * mass);
                            tm.emplace_back(test, trial, mass);
                            tm1.emplace_back(test, trial, mass1);
                            tv.emplace_back(test, trial,
                                            X.E2[a][cc] * Y.F1[b][d] + X.E0[a][cc] * Y.H1[b][d] + mass1);
                        }
                }
        }
    }

    const int n = g.size();
    form.matrix_a = from_triplets(n, ta);
    form.matrix_mass = from_triplets(n, tm);
    form.matrix_mass_1py = from_triplets(n, tm1);
    form.matrix_gram_v = from_triplets(n, tv);
    form.lumped_1py = form.matrix_mass_1py * Eigen::VectorXd::Ones(n);
    if (options.upwind)
        form.matrix_a = upwinded(form.matrix_a);

    form.dirichlet_mask.assign(n, 0);
    for (int k = 0; k < n; ++k)
        form.dirichlet_mask[k] = g.is_dirichlet(k) ? 1 : 0;
    return form;
}

void write_coordinate(std::ostream& os, const SpMat& m)
{
    os.precision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

double check_integration_by_parts(const Field& u, const Field& v, const GridPtr& grid, const HestonParams& params)
{
    const double strong = grid->integrate([&](double x, double y) { return apply_A(u, x, y, params) * v(x, y); });
    const DiscreteForm form = assemble(grid, params);
    const double weak = form.form(interpolate(grid, u).values, interpolate(grid, v).values);
    return std::abs(strong - weak);
}

CommutatorCheck commutator_identity_check(const Field& u, const Field& phi, const GridPtr& grid,
                                          const HestonParams& params)
{
    const DiscreteForm form = assemble(grid, params);
    const DerivedConstants& c = grid->consts;
    const double rs = params.rho * params.sigma, s2 = params.sigma * params.sigma;

    const Eigen::VectorXd pu = interpolate(grid, phi * u).values;
    const Eigen::VectorXd uu = interpolate(grid, u).values;
    const Eigen::VectorXd p2u = interpolate(grid, phi * phi * u).values;

    CommutatorCheck out;
    out.lhs = form.form(pu, pu) - form.form(uu, p2u);
    out.rhs = grid->integrate([&](double x, double y) {
        const Jet2 f = phi.jet(x, y);
        const double w = u(x, y);
        const double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        return (0.5 * y * (f.x * f.x + 2.0 * rs * f.x * f.y + s2 * f.y * f.y)
                - 0.5 * c.gamma * y * f.v * (f.x + rs * f.y) * sg - (c.a1 * y + c.b1) * f.v * f.x)
               * w * w;
    });
    const Field pu_field = phi * u;
    out.commutator = grid->integrate([&](double x, double y) {
        const double comm = apply_A(pu_field, x, y, params) - phi(x, y) * apply_A(u, x, y, params);
        return comm * pu_field(x, y);
    });
    out.bound_norm = grid->integrate([&](double x, double y) {
        const Jet2 f = phi.jet(x, y);
        const double gn = std::sqrt(f.x * f.x + f.y * f.y);
        const double t = (gn + std::sqrt(gn)) * u(x, y);
        return y * t * t;
    });
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace hestonvi
