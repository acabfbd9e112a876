#include "hestonvi/errors.hpp"
#include "hestonvi/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hestonvi;

namespace {

HestonParams base_params() { return validate({0.4, -0.5, 1.5, 0.1, 0.05, 0.0}); }

struct Setup
{
    HestonParams p;
    DerivedConstants c;
    GridPtr grid;
    DiscreteForm form;
};

Setup make_setup(int n, bool upwind, HestonParams p = base_params(), double X = 2.0, double Y = 1.5)
{
    Setup s;
    s.p = p;
    s.c = derive_constants(p);
    s.grid = build_grid({-X, X, Y}, n, n, 1.0, s.c);
    s.form = assemble(s.grid, p, {upwind});
    return s;
}

GridFunction put(const GridPtr& g) { return interpolate(g, Field::put_payoff(1.0)); }

// Smooth nonnegative bump f with random centre and amplitude.
GridFunction random_bump(const GridPtr& g, std::mt19937& rng, double shift = 0.0)
{
    std::uniform_real_distribution<double> cx(-1.5, 1.5), cy(0.1, 1.2), amp(0.1, 2.0);
    const double x0 = cx(rng), y0 = cy(rng), a = amp(rng);
    return interpolate(g, Field([=](double x, double y) {
        const double e = a * std::exp(-(x - x0) * (x - x0) - (y - y0) * (y - y0)) + shift;
        return Jet2{e, 0, 0, 0, 0, 0};
    }));
}

} // namespace

TEST_CASE("coercive solve reproduces constants")
{
    for (bool upwind : {false, true}) {
        auto s = make_setup(17, upwind);
        const double lam = s.c.lambda0, cval = 2.5;
        const auto f = interpolate(s.grid, Field::affine(cval * (s.p.r + lam), cval * lam));
        const auto rep = solve_coercive(s.form, lam, f, GridFunction(s.grid, cval));
        CHECK((rep.solution.values.array() - cval).abs().maxCoeff() < 1e-10);
        CHECK(rep.complementarity_residual < 1e-9);
        for (auto [y, t] : rep.trace_levels)
            CHECK(t < 1e-8);
    }
}

TEST_CASE("coercive solve preserves sign and obeys the a priori bound")
{
    auto up = make_setup(17, true);
    auto gal = make_setup(17, false);
    std::mt19937 rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto f = random_bump(up.grid, rng);
        const auto rep = solve_coercive(up.form, up.c.lambda0, f, GridFunction(up.grid, 0.0));
        CHECK(rep.solution.values.minCoeff() >= -1e-12);

        const auto rg = solve_coercive(gal.form, gal.c.lambda0, f, GridFunction(gal.grid, 0.0));
        const double lhs = gal.form.norm_V(rg.solution.values);
        const double rhs = gal.form.norm_H(f.values) / gal.c.nu1;
        CHECK(lhs <= rhs * (1.0 + 1e-6));
    }
    CHECK_THROWS_AS(solve_coercive(up.form, 0.5 * up.c.lambda0, GridFunction(up.grid, 0.0),
                                   GridFunction(up.grid, 0.0)),
                    PreconditionError);
}

TEST_CASE("penalty load and monotonicity of the penalization")
{
    auto s = make_setup(9, false);
    const int k = s.grid->index(4, 4);
    GridFunction u(s.grid, 0.0), psi(s.grid, 0.0);
    psi.values(k) = 0.3;
    const auto pl = penalty_load(s.form, u, psi, 0.1);
    const double w = (s.form.matrix_mass * Eigen::VectorXd::Ones(s.grid->size()))(k);
    CHECK(pl(k) == doctest::Approx(-3.0 * w));

    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    const GridFunction ps = interpolate(s.grid, Field::put_payoff(1.0));
    for (int t = 0; t < 100; ++t) {
        GridFunction a(s.grid), b(s.grid);
        a.values = Eigen::VectorXd::NullaryExpr(s.grid->size(), [&] { return nd(rng); });
        b.values = Eigen::VectorXd::NullaryExpr(s.grid->size(), [&] { return nd(rng); });
        const double ip = (penalty_load(s.form, a, ps, 0.01) - penalty_load(s.form, b, ps, 0.01))
                              .dot(a.values - b.values);
        CHECK(ip >= -1e-12);
    }
}

TEST_CASE("inactive obstacle leaves the zero solution")
{
    auto s = make_setup(17, false);
    const GridFunction zero(s.grid, 0.0), low(s.grid, -1.0);
    PenaltyConfig cfg;
    const auto pen = solve_penalized(s.form, cfg, zero, low, zero, 1e-3);
    CHECK(pen.solution.values.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(pen.penalty_norm == 0.0);
    const auto vi = solve_vi_coercive(s.form, cfg, zero, low, zero);
    CHECK(vi.solution.values.cwiseAbs().maxCoeff() < 1e-14);
    for (const auto& rec : vi.eps_history)
        CHECK(rec.penalty_norm == 0.0);
}

TEST_CASE("penalty norm bound is linear in eps for a smooth obstacle")
{
    auto s = make_setup(33, false);
    const double Y = s.grid->y.back();
    // Smooth obstacle vanishing on Gamma_1.
    const Field psi_f([Y](double x, double y) {
        const double ex = std::exp(-x * x), t = 1.0 - y / Y;
        const double v = 0.4 * ex * t * t - 0.05;
        return Jet2{v, -2.0 * x * 0.4 * ex * t * t, -0.8 * ex * t / Y, 0.4 * (4 * x * x - 2) * ex * t * t,
                    2.0 * x * 0.8 * ex * t / Y, 0.8 * ex / (Y * Y)};
    });
    const GridFunction psi = interpolate(s.grid, psi_f), zero(s.grid, 0.0);
    const double lam = s.c.lambda0;
    const GridFunction Apsi = interpolate(s.grid, image_A(psi_f, s.p));
    const GridFunction psi1py = interpolate(s.grid, Field::affine(1.0, 1.0) * psi_f);
    const double bound = s.form.norm_H(Apsi.values) + lam * s.form.norm_H(psi1py.values);
    PenaltyConfig cfg;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const auto rep = solve_penalized(s.form, cfg, zero, psi, zero, eps);
        CHECK(rep.penalty_norm > 0.0);
        CHECK(rep.penalty_norm <= 1.5 * eps * bound);
    }
}

TEST_CASE("coercive VI agrees with projected SOR and converges linearly in eps")
{
    auto s = make_setup(25, true);
    const double lam = s.c.lambda0;
    const Field psi_f([](double, double y) { return Jet2{0.5 - y, 0, -1, 0, 0, 0}; });
    const GridFunction psi = interpolate(s.grid, psi_f), zero(s.grid, 0.0);
    GridFunction g = psi;
    g.values = g.values.cwiseMax(0.0);
    PenaltyConfig cfg;
    cfg.eps_sequence = {1e-2, 1e-3, 1e-4, 1e-5};
    const auto vi = solve_vi_coercive(s.form, cfg, zero, psi, g);
    const auto oracle = lcp_psor(s.form, lam, zero, psi, g, 1.6, 1e-10);
    CHECK(s.form.norm_H(vi.solution.values - oracle.values) <= 1e-6);
    CHECK(vi.complementarity_residual < 1e-9);
    std::vector<double> eps, pn, vd;
    for (const auto& rec : vi.eps_history) {
        eps.push_back(rec.eps);
        pn.push_back(rec.penalty_norm);
        vd.push_back(s.form.norm_V(rec.solution.values - oracle.values));
    }
    CHECK(loglog_slope(eps, pn) >= 0.9);
    CHECK(loglog_slope(eps, vd) >= 0.45);
}

TEST_CASE("projected SOR with a far obstacle matches the linear solve")
{
    auto s = make_setup(17, true);
    std::mt19937 rng(2);
    const auto f = random_bump(s.grid, rng);
    const GridFunction zero(s.grid, 0.0), low(s.grid, -1e6);
    const auto lin = solve_coercive(s.form, s.c.lambda0, f, zero);
    const auto ps = lcp_psor(s.form, s.c.lambda0, f, low, zero, 1.6, 1e-10);
    CHECK((lin.solution.values - ps.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("increasing iteration for the non-coercive equation")
{
    auto s = make_setup(17, true);
    const double lam = s.c.lambda0;
    SUBCASE("constants")
    {
        const auto rep = solve_noncoercive_equation(s.form, GridFunction(s.grid, s.p.r),
                                                    GridFunction(s.grid, 1.0), lam, 1e-12);
        CHECK((rep.solution.values.array() - 1.0).abs().maxCoeff() < 1e-8);
        CHECK(rep.monotone_violation <= 1e-10);
    }
    SUBCASE("ledger and envelope bounds")
    {
        EnvelopeCoeffs e;
        e.c0 = 0.0;
        e.C0 = 1.0;
        e.C2 = 1.0;
        const auto pair = derive_envelopes(e, s.p, s.c);
        std::mt19937 rng(9);
        const auto f = random_bump(s.grid, rng);
        const auto rep = solve_noncoercive_equation(s.form, f, GridFunction(s.grid, 0.0), lam);
        CHECK(rep.monotone_violation <= 1e-10);
        const auto d = diagnostics(rep.solution, s.form, 0.0, f, nullptr, &pair);
        CHECK(d.envelope_violation <= 1e-8);
        CHECK(rep.complementarity_residual < 1e-6);
    }
    HestonParams p0 = s.p;
    p0.r = 0.0;
    auto s0 = make_setup(9, true, p0);
    CHECK_THROWS_AS(solve_noncoercive_equation(s0.form, GridFunction(s0.grid, 0.0), GridFunction(s0.grid, 0.0),
                                               s0.c.lambda0),
                    PreconditionError);
}

TEST_CASE("decreasing iteration for the non-coercive VI")
{
    auto s = make_setup(17, true);
    EnvelopeCoeffs e;
    e.c0 = -1.0;
    e.C0 = 1.0;
    e.C2 = 1.0;
    const auto pair = derive_envelopes(e, s.p, s.c);
    const GridFunction zero(s.grid, 0.0);
    const GridFunction f(s.grid, 0.3 * s.p.r);
    PenaltyConfig cfg;

    SUBCASE("inactive obstacle matches the equation")
    {
        const GridFunction low(s.grid, -1.0);
        const auto vi = solve_vi_noncoercive(s.form, cfg, f, low, zero, pair);
        const auto eq = solve_noncoercive_equation(s.form, f, zero, cfg.shift(s.c));
        CHECK(s.form.norm_H(vi.solution.values - eq.solution.values) <= 1e-6);
        CHECK(vi.monotone_violation <= 1e-10);
    }
    SUBCASE("active obstacle keeps max{m, psi} <= u <= M")
    {
        const Field psi_f([](double x, double) { return Jet2{0.5 * std::exp(-x * x) - 0.2, 0, 0, 0, 0, 0}; });
        GridFunction psi = interpolate(s.grid, psi_f);
        for (int k = 0; k < s.grid->size(); ++k)
            if (s.grid->is_dirichlet(k))
                psi.values(k) = std::min(psi.values(k), 0.0);
        const auto vi = solve_vi_noncoercive(s.form, cfg, f, psi, zero, pair);
        CHECK(vi.monotone_violation <= 1e-10);
        CHECK(vi.envelope_violation <= 1e-8);
        CHECK((vi.solution.values - psi.values).minCoeff() >= -1e-8);
    }
    SUBCASE("inadmissible data is rejected")
    {
        const GridFunction high(s.grid, 10.0);
        CHECK_THROWS_AS(solve_vi_noncoercive(s.form, cfg, high, zero, zero, pair), EnvelopeError);
    }
}

TEST_CASE("comparison suite")
{
    auto s = make_setup(17, true);
    const double lam = s.c.lambda0;
    const GridFunction zero(s.grid, 0.0), one(s.grid, 1.0);
    const GridFunction fr = interpolate(s.grid, Field::affine(s.p.r + lam, lam));
    std::vector<ComparisonCase> cases{{zero, fr, std::nullopt, std::nullopt, zero, one}};
    auto rep = comparison_suite(s.form, lam, cases);
    CHECK(rep.worst[0] == doctest::Approx(1.0));

    std::mt19937 rng(4);
    cases.clear();
    for (int t = 0; t < 5; ++t) {
        const auto f1 = random_bump(s.grid, rng, -0.5);
        GridFunction f2 = f1;
        f2.values += random_bump(s.grid, rng).values;
        cases.push_back({f1, f2, std::nullopt, std::nullopt, zero, zero});
        GridFunction psi1 = put(s.grid);
        GridFunction psi2 = psi1;
        psi2.values.array() += 0.1;
        GridFunction g1 = psi1, g2 = psi2;
        cases.push_back({f1, f2, psi1, psi2, g1, g2});
    }
    rep = comparison_suite(s.form, lam, cases);
    CHECK(rep.overall >= -1e-8);
}

TEST_CASE("trace rows and slope fit")
{
    auto s = make_setup(33, false);
    const auto rows = trace_rows(*s.grid);
    REQUIRE(rows.size() >= 4);
    CHECK(rows[0] == doctest::Approx(s.grid->y.back() / 2));
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i] < rows[i - 1]);
    CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}
