#include "hestonvi/operator_assembly.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace hestonvi;

namespace {

const double kPi = 3.14159265358979323846;

Field sin_exp()
{
    return Field([](double x, double y) {
        const double s = std::sin(x), c = std::cos(x), e = std::exp(-y);
        return Jet2{s * e, c * e, -s * e, -s * e, -c * e, s * e};
    });
}

// y (1 - y/Y)^2 cos^2(pi x / (2 X)), vanishing on x = +-X and y = Y.
Field ibp_test(double X, double Y)
{
    return Field([X, Y](double x, double y) {
        const double k = kPi / (2.0 * X);
        const double cx = std::cos(k * x), sx = std::sin(k * x);
        const double bx = cx * cx, bxd = -2.0 * k * cx * sx, bxdd = -2.0 * k * k * (cx * cx - sx * sx);
        const double t = 1.0 - y / Y;
        const double fy = y * t * t, fyd = t * t - 2.0 * y * t / Y, fydd = -4.0 * t / Y + 2.0 * y / (Y * Y);
        return Jet2{bx * fy, bxd * fy, bx * fyd, bxdd * fy, bxd * fyd, bx * fydd};
    });
}

// Smooth bump supported in the disc of radius R around (x0, y0).
Field bump(double x0, double y0, double R)
{
    return Field([x0, y0, R](double x, double y) {
        const double dx = x - x0, dy = y - y0;
        const double s = (dx * dx + dy * dy) / (R * R);
        Jet2 j;
        if (s >= 1.0)
            return j;
        const double e = std::exp(-1.0 / (1.0 - s));
        // d/ds of e^{-1/(1-s)} = -e/(1-s)^2 ; chain rule in x and y
        const double g1 = -e / ((1.0 - s) * (1.0 - s));
        const double g2 = e * (1.0 / std::pow(1.0 - s, 4) - 2.0 / std::pow(1.0 - s, 3));
        const double sx = 2.0 * dx / (R * R), sy = 2.0 * dy / (R * R), sxx = 2.0 / (R * R);
        j.v = e;
        j.x = g1 * sx;
        j.y = g1 * sy;
        j.xx = g2 * sx * sx + g1 * sxx;
        j.xy = g2 * sx * sy;
        j.yy = g2 * sy * sy + g1 * sxx;
        return j;
    });
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("strong form on closed-form functions")
{
    const HestonParams p{0.9, -0.4, 1.3, 0.6, 0.07, 0.02};
    for (double y : {0.01, 0.5, 3.0}) {
        for (double x : {-1.0, 0.0, 2.0}) {
            CHECK(apply_A(Field::constant(2.5), x, y, p) == doctest::Approx(p.r * 2.5));
            const double d0 = 1.5, d2 = -0.7;
            CHECK(apply_A(Field::affine(d0, d2), x, y, p)
                  == doctest::Approx((p.r * d0 - d2 * p.kappa * p.theta) + (p.kappa + p.r) * d2 * y));
            const double L = 0.3;
            CHECK(apply_A(Field::exp_x(1.0, L), x, y, p)
                  == doctest::Approx((p.r - L * (p.r - p.q)) * std::exp(L * x)
                                     + 0.5 * y * L * (1.0 - L) * std::exp(L * x)));
            const double K = 0.2;
            CHECK(apply_A(Field::exp_y(1.0, K), x, y, p)
                  == doctest::Approx((p.r - p.kappa * p.theta * K) * std::exp(K * y)
                                     + y * K * (p.kappa - p.sigma * p.sigma * K / 2.0) * std::exp(K * y)));
            CHECK(apply_A_lambda(Field::constant(1.0), x, y, p, 0.5) == doctest::Approx(p.r + 0.5 * (1.0 + y)));
        }
    }
}

TEST_CASE("strong and divergence forms agree")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(1e-3, 5.0);
    const Field y2([](double, double y) { return Jet2{y * y, 0, 2 * y, 0, 0, 2}; });
    const HestonParams pb{1.0, 0.5, 1.0, 0.5, 0.25, 0.0}; // beta = 1, b1 = 0
    CHECK(rel(apply_A(y2, 0.0, 1.0, pb), apply_A_divergence(y2, 0.0, 1.0, pb)) < 1e-10);
    for (const HestonParams& p : {HestonParams{0.5, -0.6, 2.0, 0.3, 0.05, 0.01},
                                  HestonParams{1.5, 0.2, 0.7, 1.1, 0.1, 0.2}}) {
        for (int k = 0; k < 100; ++k) {
            const double x = ux(rng), y = uy(rng);
            CHECK(rel(apply_A(sin_exp(), x, y, p), apply_A_divergence(sin_exp(), x, y, p)) < 1e-10);
        }
    }
}

TEST_CASE("assembled matrices: constants, symmetry, positivity")
{
    const HestonParams p{0.8, 0.3, 1.0, 0.4, 0.1, 0.05};
    const auto c = derive_constants(p);
    const auto g = build_grid({-2.0, 2.0, 4.0}, 17, 17, 2.0, c);
    const auto f = assemble(g, p);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(g->size());
    CHECK(f.form(one, one) == doctest::Approx(p.r * g->total_weight()).epsilon(1e-12));
    // a(1, v) = r (1, v) for every v
    const Eigen::VectorXd rowsum = f.matrix_a * one;
    for (int k = 0; k < g->size(); ++k)
        CHECK(rowsum(k) == doctest::Approx(p.r * g->node_weights[k]).epsilon(1e-10).scale(1e-14));
    CHECK((SpMat(f.matrix_mass.transpose()) - f.matrix_mass).norm() < 1e-14);
    CHECK((SpMat(f.matrix_a.transpose()) - f.matrix_a).norm() > 1e-6);
    CHECK(!f.warnings.empty());

    Eigen::MatrixXd M(f.matrix_mass);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(one.dot(f.matrix_mass * one) == doctest::Approx(g->total_weight()).epsilon(1e-12));
}

TEST_CASE("upwinded coercive matrix is an M-matrix")
{
    const HestonParams p{0.8, -0.5, 1.0, 0.4, 0.1, 0.05};
    const auto c = derive_constants(p);
    const auto g = build_grid({-2.0, 2.0, 4.0}, 13, 13, 2.0, c);
    const auto f = assemble(g, p, {true});
    const SpMat L = f.coercive(c.lambda0);
    Eigen::VectorXd rs = Eigen::VectorXd::Zero(g->size());
    for (int k = 0; k < L.outerSize(); ++k)
        for (SpMat::InnerIterator it(L, k); it; ++it) {
            if (it.row() != it.col())
                CHECK(it.value() <= 0.0);
            rs(it.row()) += it.value();
        }
    CHECK(rs.minCoeff() > 0.0);
}

TEST_CASE("discrete form on grid functions vs closure integrals")
{
    const HestonParams p{0.6, 0.2, 1.0, 0.2, 0.1, 0.0};
    const auto c = derive_constants(p);
    const auto g = build_grid({-1.5, 1.5, 3.0}, 33, 33, 2.0, c);
    CHECK(check_integration_by_parts(Field(), sin_exp(), g, p) == 0.0);
}

TEST_CASE("integration by parts defect converges")
{
    for (double beta_target : {0.5, 1.5}) {
        HestonParams p{0.6, 0.2, 1.0, 0.0, 0.1, 0.03};
        p.theta = beta_target * p.sigma * p.sigma / (2.0 * p.kappa);
        const auto c = derive_constants(p);
        const double X = 1.5, Y = 3.0;
        const Field u = ibp_test(X, Y);
        const Field v = sin_exp() * ibp_test(X, Y) + ibp_test(X, Y);
        std::vector<double> d;
        for (int n : {17, 33, 65})
            d.push_back(check_integration_by_parts(u, v, build_grid({-X, X, Y}, n, n, 1.0, c), p));
        CHECK(std::log2(d[0] / d[1]) >= 1.5);
        CHECK(std::log2(d[1] / d[2]) >= 1.5);
    }
}

TEST_CASE("energy identity and commutator")
{
    const HestonParams p{0.7, -0.3, 1.0, 0.3, 0.1, 0.02};
    const auto c = derive_constants(p);
    const Field u([](double x, double y) {
        const double e = std::exp(-y), cx = std::cos(x), sx = std::sin(x);
        return Jet2{e * cx, -e * sx, -e * cx, -e * cx, e * sx, e * cx};
    });
    const Field phi = bump(0.2, 1.2, 0.9);
    std::vector<double> d;
    CommutatorCheck last;
    for (int n : {33, 65, 129}) {
        last = commutator_identity_check(u, phi, build_grid({-2.0, 2.0, 3.0}, n, n, 1.0, c), p);
        d.push_back(last.defect);
    }
    CHECK(std::log2(d[0] / d[1]) >= 1.5);
    CHECK(std::log2(d[1] / d[2]) >= 1.5);
    CHECK(last.commutator == doctest::Approx(last.rhs).epsilon(1e-8));
    CHECK(last.bound_norm > 0.0);

    const auto zero = commutator_identity_check(u, Field(), build_grid({-2.0, 2.0, 3.0}, 9, 9, 1.0, c), p);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    const auto one = commutator_identity_check(u, Field::constant(1.0), build_grid({-2.0, 2.0, 3.0}, 9, 9, 1.0, c), p);
    CHECK(std::abs(one.lhs) < 1e-13);
    CHECK(one.rhs == 0.0);
}

TEST_CASE("Garding, coercivity and continuity on random discrete functions")
{
    // b1 = 0: r - q = kappa theta rho / sigma
    HestonParams p{0.8, 0.4, 1.2, 0.5, 0.0, 0.0};
    p.r = 0.3;
    p.q = p.r - p.kappa * p.theta * p.rho / p.sigma;
    const auto c = derive_constants(validate(p));
    CHECK(std::abs(c.b1) < 1e-14);
    const auto g = build_grid({-2.0, 2.0, 4.0}, 17, 17, 2.0, c);
    const auto f = assemble(g, p);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd v(g->size()), w(g->size());
        for (int i = 0; i < g->size(); ++i) {
            v(i) = g->is_dirichlet(i) ? 0.0 : U(rng);
            w(i) = g->is_dirichlet(i) ? 0.0 : U(rng);
        }
        const double nv = f.norm_V(v), nw = f.norm_V(w), h1 = f.norm_H_1py(v);
        const double av = f.form(v, v);
        CHECK(av >= 0.5 * c.C2 * nv * nv - c.C2 * h1 * h1 - 1e-6 * (std::abs(av) + nv * nv));
        const double alam = av + c.lambda0 * h1 * h1;
        CHECK(alam >= c.nu1 * nv * nv - 1e-6 * (alam + nv * nv));
        CHECK(std::abs(f.form(v, w)) <= c.C5 * nv * nw * (1.0 + 1e-6));
    }
}
