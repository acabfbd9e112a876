#include "hestonvi/envelopes.hpp"
#include "hestonvi/errors.hpp"
#include "hestonvi/operator_assembly.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hestonvi;

namespace {

// sigma = 1, rho = 0, kappa = theta = r = 1, q = 0
HestonParams unit_params() { return validate({1.0, 0.0, 1.0, 1.0, 1.0, 0.0}); }

GridPtr small_grid(const HestonParams& p, double X = 3.0, double Y = 6.0)
{
    const auto c = derive_constants(p);
    return build_grid({-X, X, Y}, 25, 21, 1.0, c);
}

EnvelopeCoeffs full_family()
{
    EnvelopeCoeffs e;
    e.c0 = -1.0;
    e.c2 = -0.5;
    e.c3 = -0.2;
    e.c4 = -0.1;
    e.C0 = 1.0;
    e.C2 = 0.5;
    e.C3 = 0.3;
    e.C4 = 0.2;
    e.l = 0.01;
    e.L = 0.02;
    e.k = 0.1;
    e.K = 0.2;
    return e;
}

HestonParams family_params() { return validate({0.5, -0.3, 2.0, 0.2, 0.3, 0.1}); }

} // namespace

TEST_CASE("affine lower envelope example")
{
    const HestonParams p = unit_params();
    const auto c = derive_constants(p);
    EnvelopeCoeffs in;
    in.c0 = -1.0;
    in.c2 = -2.0;
    const auto pair = derive_envelopes(in, p, c);
    CHECK(pair.coeffs.d2 == doctest::Approx(-1.0));
    CHECK(pair.coeffs.d0 == doctest::Approx(-2.0));
    for (double x : {-1.0, 0.0, 2.0})
        for (double y : {0.0, 0.5, 3.0})
            CHECK(apply_A(pair.m, x, y, p) == doctest::Approx(-1.0 - 2.0 * y));
}

TEST_CASE("exponential-in-x upper coefficient example")
{
    const HestonParams p = unit_params();
    const auto c = derive_constants(p);
    EnvelopeCoeffs in;
    in.C3 = 1.0;
    in.L = 0.5;
    // 2L < gamma fails for these parameters, so only the algebra is checked.
    CHECK_THROWS_AS(derive_envelopes(in, p, c), SideConditionError);
    const auto pair = derive_envelopes(in, p, c, {false});
    CHECK(pair.coeffs.D3 == doctest::Approx(8.0));
}

TEST_CASE("exponential-in-y upper coefficient example")
{
    const HestonParams p = unit_params();
    const auto c = derive_constants(p);
    EnvelopeCoeffs in;
    in.C4 = 1.0;
    in.K = 0.5;
    // 2K < mu = 2 holds.
    const auto pair = derive_envelopes(in, p, c);
    CHECK(pair.coeffs.D4 == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("side conditions name the failed inequality")
{
    HestonParams p = unit_params();
    auto c = derive_constants(p);
    EnvelopeCoeffs in;
    in.C3 = 1.0;
    in.L = 1.5;
    CHECK_THROWS_WITH_AS(derive_envelopes(in, p, c, {false}), doctest::Contains("0 < exponent < 1"),
                         SideConditionError);

    EnvelopeCoeffs y;
    y.C4 = 1.0;
    y.K = 1.2; // r / (kappa theta) = 1
    CHECK_THROWS_AS(derive_envelopes(y, p, c, {false}), SideConditionError);

    HestonParams p0 = p;
    p0.r = 0.0;
    auto c0 = derive_constants(p0);
    EnvelopeCoeffs z;
    z.C0 = 1.0;
    CHECK_THROWS_WITH_AS(derive_envelopes(z, p0, c0), doctest::Contains("r > 0"), SideConditionError);

    EnvelopeCoeffs bad;
    bad.c0 = 1.0;
    bad.C0 = 0.0;
    CHECK_THROWS_AS(derive_envelopes(bad, p, c), EnvelopeError);
}

TEST_CASE("envelope inequalities hold on a dense sample")
{
    const HestonParams p = family_params();
    const auto c = derive_constants(p);
    const auto pair = derive_envelopes(full_family(), p, c);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(-8.0, 8.0), uy(0.0, 15.0);
    for (int s = 0; s < 500; ++s) {
        const double x = ux(rng), y = uy(rng);
        const double m = pair.m(x, y), M = pair.M(x, y);
        CHECK(m <= M);
        CHECK(m <= 0.0);
        CHECK(M >= 0.0);
        const double tol = 1e-10 * (1.0 + std::abs(pair.n(x, y)) + std::abs(pair.N(x, y)));
        CHECK(apply_A(pair.m, x, y, p) <= pair.n(x, y) + tol);
        CHECK(pair.N(x, y) <= apply_A(pair.M, x, y, p) + tol);
    }
}

TEST_CASE("admissibility report")
{
    const HestonParams p = family_params();
    const auto c = derive_constants(p);
    const auto pair = derive_envelopes(full_family(), p, c);
    const auto grid = small_grid(p);
    const Field zero = Field::constant(0.0);

    // Lower boundary case: f = A m.
    const Field fm = image_A(pair.m, p);
    auto rep = check_admissible_envelopes(pair, fm, zero, zero, grid, p);
    CHECK(rep.worst("Am<=f") == 0.0);
    CHECK(rep.passed());

    // Any f between n and N.
    const Field mid = 0.5 * (pair.n + pair.N);
    rep = check_admissible_envelopes(pair, mid, zero, zero, grid, p);
    CHECK(rep.passed());
    CHECK(rep.l2_integrable);
    CHECK(std::isfinite(rep.l2_norm_M));
    CHECK(std::isfinite(rep.lq_norm_M));

    // psi = M + 1 violates psi <= M by one.
    rep = check_admissible_envelopes(pair, mid, zero, pair.M + Field::constant(1.0), grid, p);
    CHECK_FALSE(rep.passed());
    CHECK(rep.worst("psi<=M") == doctest::Approx(1.0));
}

TEST_CASE("barrier checks")
{
    const HestonParams p = family_params();
    const auto c = derive_constants(p);
    const auto pair = derive_envelopes(full_family(), p, c);
    const auto grid = small_grid(p);
    const Field zero = Field::constant(0.0);

    SUBCASE("recipe barrier passes with a finite ratio")
    {
        const Field phi = barrier_from_recipe(pair, p, c);
        const auto rep = check_barrier(phi, pair, zero, grid, p);
        CHECK(rep.passed());
        CHECK(std::isfinite(rep.ratio_estimate));
        CHECK(rep.ratio_estimate > 0.0);
    }
    SUBCASE("zero barrier with a negative lower envelope fails")
    {
        CHECK_THROWS_AS(check_barrier(zero, pair, zero, grid, p), BarrierError);
    }
    SUBCASE("M - m on an affine pair")
    {
        EnvelopeCoeffs e;
        e.c0 = -1.0;
        e.C0 = 1.0;
        const auto aff = derive_envelopes(e, p, c);
        const auto rep = check_barrier(aff.M - aff.m, aff, zero, grid, p);
        CHECK(rep.passed());
        CHECK(rep.ratio_estimate == doctest::Approx(1.1 * 3.0 / p.r * (1.0 + grid->y.back())));
    }
}

TEST_CASE("envelope inequalities survive a coordinate change")
{
    const HestonParams p = family_params();
    const auto c = derive_constants(p);
    const auto pair = derive_envelopes(full_family(), p, c);
    const auto ch = normalize_b1(p);
    const Field mt = map_function(ch, pair.m), Mt = map_function(ch, pair.M);
    const Field nt = map_source(ch, pair.n), Nt = map_source(ch, pair.N);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), uy(0.01, 6.0);
    for (int s = 0; s < 200; ++s) {
        const double x = ux(rng), y = uy(rng);
        const double tol = 1e-9 * (1.0 + std::abs(nt(x, y)) + std::abs(Nt(x, y)));
        CHECK(mt(x, y) <= Mt(x, y));
        CHECK(apply_A(mt, x, y, ch.transformed) <= nt(x, y) + tol);
        CHECK(Nt(x, y) <= apply_A(Mt, x, y, ch.transformed) + tol);
    }
}
