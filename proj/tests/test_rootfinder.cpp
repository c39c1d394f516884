#include <doctest.h>

#include <cmath>
#include <random>

#include "rootfinder.hpp"

using namespace stratstab;

TEST_CASE("nyquist_F: Couette closed form and conjugation symmetry") {
    const auto sh = ShearProfile::couette();
    CHECK(std::abs(nyquist_F(cplx(0.0, 1.0), sh) - cplx(-1.0, 0.0)) < 1e-12);
    for (cplx c : {cplx(0.4, 0.7), cplx(-0.3, 0.2)}) {
        const cplx a = nyquist_F(c, ShearProfile::tanh_layer(3.0));
        const cplx b = nyquist_F(std::conj(c), ShearProfile::tanh_layer(3.0));
        CHECK(std::abs(a - std::conj(b)) < 1e-11);
    }
}

TEST_CASE("nyquist_F: far-field arc behaviour F ~ 2 e^{-2 i theta}/R^2") {
    const auto sh = ShearProfile::tanh_layer(5.0);
    auto worst = [&](double R) {
        double w = 0.0;
        for (int i = 1; i < 20; ++i) {
            const double th = 3.141592653589793 * i / 20.0;
            const cplx c = cplx(0.0, 1e-2) + R * std::exp(cplx(0.0, th));
            w = std::max(w, std::abs(nyquist_F(c, sh) -
                                     2.0 * std::exp(cplx(0.0, -2.0 * th)) / (R * R)) *
                                R * R);
        }
        return w;
    };
    const double w50 = worst(50.0), w100 = worst(100.0);
    CHECK(w50 < 0.01);
    CHECK(w100 < w50);  // o(R^{-2}) after scaling by R^2
}

TEST_CASE("winding_number: simple analytic cases on the half-disk") {
    HalfDiskContour hd;
    hd.eps = 0.01;
    hd.radius = 2.0;
    const WindingReport one =
        winding_number([](cplx c) { return c - cplx(0.3, 0.4); }, hd);
    CHECK(one.winding == 1);
    CHECK(one.max_phase_step < 1.5707963267948966);

    const WindingReport two = winding_number(
        [](cplx c) { return (c - cplx(0.3, 0.4)) * (c - cplx(-0.5, 1.0)); }, hd);
    CHECK(two.winding == 2);

    const WindingReport zero =
        winding_number([](cplx c) { return c - cplx(0.0, -1.0); }, hd);
    CHECK(zero.winding == 0);
}

TEST_CASE("winding_number: argument principle on random quartics") {
    std::mt19937_64 rng(42);
    auto uni = [&rng](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * (1.0 / 9007199254740992.0));
    };
    const Rect region{-1.0, 1.0, 0.2, 2.0};
    for (int trial = 0; trial < 100; ++trial) {
        const int deg = 1 + static_cast<int>(rng() % 4);
        std::vector<cplx> roots;
        int inside = 0;
        for (int i = 0; i < deg; ++i) {
            // sample away from the contour so refinement terminates quickly
            cplx r;
            do {
                r = cplx(uni(-1.6, 1.6), uni(0.05, 2.6));
            } while (std::abs(r.real() - (-1.0)) < 0.07 ||
                     std::abs(r.real() - 1.0) < 0.07 ||
                     std::abs(r.imag() - 0.2) < 0.07 ||
                     std::abs(r.imag() - 2.0) < 0.07);
            roots.push_back(r);
            if (r.real() > -1.0 && r.real() < 1.0 && r.imag() > 0.2 && r.imag() < 2.0)
                ++inside;
        }
        auto poly = [roots](cplx c) {
            cplx p = 1.0;
            for (const cplx& r : roots) p *= (c - r);
            return p;
        };
        const WindingReport rep = winding_number(poly, region);
        CHECK(rep.winding == inside);
    }
}

TEST_CASE("winding_number: zero on the contour is detected") {
    const Rect region{-1.0, 1.0, 0.5, 1.5};
    try {
        winding_number([](cplx c) { return c - cplx(0.0, 0.5); }, region);
        FAIL("expected ZeroOnContour");
    } catch (const Error& e) {
        CHECK(e.code() == Err::ZeroOnContour);
    }
}

TEST_CASE("winding conservation under quadrisection") {
    auto f = [](cplx c) { return (c * c + 1.0) * (c - cplx(0.4, 1.3)); };
    const Rect parent{-2.0, 2.0, 0.1, 3.0};
    const int w = winding_number(f, parent).winding;
    // split lines chosen off the zeros (i and 0.4 + 1.3i)
    const double rm = 0.1, im = 1.55;
    const Rect kids[4] = {{-2.0, rm, 0.1, im},
                          {rm, 2.0, 0.1, im},
                          {-2.0, rm, im, 3.0},
                          {rm, 2.0, im, 3.0}};
    int sum = 0;
    for (const Rect& k : kids) sum += winding_number(f, k).winding;
    CHECK(w == sum);
    CHECK(w == 2);  // i and 0.4 + 1.3i
}

TEST_CASE("find_zeros: c^2 + 1 has the single upper-half-plane zero i") {
    const Rect region{-2.0, 2.0, 0.1, 3.0};
    FindZerosOptions opt;
    opt.check_conservation = true;
    const auto zs = find_zeros([](cplx c) { return c * c + 1.0; }, region, 1e-12, opt);
    REQUIRE(zs.size() == 1);
    CHECK(std::abs(zs[0].c - cplx(0.0, 1.0)) < 1e-9);
    CHECK(zs[0].residual < 1e-12);
    CHECK(zs[0].multiplicity_hint == 1);
}

TEST_CASE("exclusion_radius: closed-form value, monotonicity, lower bound") {
    // for sup|U| = s the bisection target is s / (1 - 1/sqrt(1+s))
    auto analytic = [](double s) { return s / (1.0 - 1.0 / std::sqrt(1.0 + s)); };
    const auto sh = ShearProfile::couette();  // sup = 1
    CHECK(exclusion_radius(sh) == doctest::Approx(analytic(1.0)).epsilon(1e-5));
    CHECK(exclusion_radius(sh) == doctest::Approx(3.41421356).epsilon(1e-5));

    double prev = 0.0;
    for (double beta : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double r = exclusion_radius(ShearProfile::tanh_layer(beta));
        const double s = std::tanh(beta);
        CHECK(r > s);
        CHECK(r == doctest::Approx(analytic(s)).epsilon(1e-5));
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("nyquist winding at beta = 5 over the exclusion half-disk") {
    const auto sh = ShearProfile::tanh_layer(5.0);
    HalfDiskContour hd;
    hd.eps = 0.01;
    hd.radius = exclusion_radius(sh);
    const WindingReport rep =
        winding_number([&sh](cplx c) { return nyquist_F(c, sh, 1e-11); }, hd);
    CHECK(rep.winding == 1);
    CHECK(rep.max_phase_step < 1.5707963267948966);

    // two-eps agreement
    hd.eps = 0.005;
    const WindingReport rep2 =
        winding_number([&sh](cplx c) { return nyquist_F(c, sh, 1e-11); }, hd);
    CHECK(rep2.winding == 1);
}

TEST_CASE("nyquist zero for beta = 5: located, refined, G-conditions") {
    const auto eq = build_friedlander(ShearProfile::tanh_layer(5.0), 1.0);
    const auto& sh = eq.shear;
    const double R = exclusion_radius(sh);
    const auto zs = find_zeros([&sh](cplx c) { return nyquist_F(c, sh, 1e-11); },
                               Rect{-R, R, 0.01, R}, 1e-11);
    REQUIRE(zs.size() == 1);
    const Zero z = zs[0];
    CHECK(z.c.imag() > 0.0);
    CHECK(std::abs(nyquist_F(z.c, sh)) < 1e-10);
    CHECK(std::abs(z.c.real()) <= std::tanh(5.0));
    const NecessaryConditions nc = verify_necessary_conditions(z, eq);
    CHECK(nc.g1_pass);
    CHECK_FALSE(nc.flagged_spurious);
}

TEST_CASE("verify_necessary_conditions: synthetic violations") {
    const auto eq = build_friedlander(ShearProfile::tanh_layer(5.0), 0.97);
    Zero bad;
    bad.c = cplx(2.0, 0.5);  // outside the range of tanh
    CHECK_FALSE(verify_necessary_conditions(bad, eq).g1_pass);

    const auto stable = stable_couette();
    Zero z;
    z.c = cplx(0.0, 0.3);
    CHECK(verify_necessary_conditions(z, stable).flagged_spurious);
}

TEST_CASE("find_dispersion_zeros: stable Couette pair has none (G3)") {
    const auto eq = stable_couette();
    const auto res = find_dispersion_zeros(eq, 0.0, ZeroMethod::Shooting, 0.05);
    CHECK(res.zeros.empty());
    CHECK_THROWS_AS(gamma0(eq, 0.05), Error);
}

TEST_CASE("plemelj scan: single upward crossing at the origin") {
    const auto sh = ShearProfile::tanh_layer(5.0);
    const PlemeljReport rep = plemelj_scan(sh, 1e-3);
    CHECK(rep.sign_changes == 1);
    CHECK(std::abs(rep.crossing) < 5e-3);
    CHECK(rep.upward);
    // Plemelj limit gives slope 2 pi / beta at the origin
    CHECK(rep.slope_at_crossing ==
          doctest::Approx(2.0 * 3.141592653589793 / 5.0).epsilon(0.05));
}
