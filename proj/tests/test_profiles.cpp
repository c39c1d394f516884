#include <doctest.h>

#include <cmath>

#include "profiles.hpp"

using namespace stratstab;

TEST_CASE("tanh shear: derivatives consistent with finite differences") {
    const ShearProfile p = ShearProfile::tanh_layer(3.0);
    const double h = 1e-5;
    for (double z : {-0.9, -0.3, 0.0, 0.41, 0.98}) {
        const double fd1 = (p.eval(z + h) - p.eval(z - h)) / (2 * h);
        CHECK(std::abs(fd1 - p.d1(z)) < 1e-8);
        const double fd2 = (p.d1(z + h) - p.d1(z - h)) / (2 * h);
        CHECK(std::abs(fd2 - p.d2(z)) < 1e-7);
        const double fd3 = (p.d2(z + h) - p.d2(z - h)) / (2 * h);
        CHECK(std::abs(fd3 - p.d3(z)) < 1e-6);
        CHECK(p.d1(z) > 0.0);
    }
    CHECK(p.sup_norm == doctest::Approx(std::tanh(3.0)));
}

TEST_CASE("friedlander explicit formula: beta=3, alpha=0.9") {
    const auto eq = build_friedlander(ShearProfile::tanh_layer(3.0), 0.9);
    // rho_s = 0.09 (-3 tanh(3z) + tanh^3(3z)), so -rho_s'(0) = 0.81
    const double t = std::tanh(3.0 * 0.37);
    CHECK(eq.strat.eval(0.37) ==
          doctest::Approx(0.09 * (-3.0 * t + t * t * t)).epsilon(1e-12));
    CHECK(-eq.strat.d1(0.0) == doctest::Approx(0.81).epsilon(1e-12));
}

TEST_CASE("friedlander identity holds to 1e-12 relative on 1000 points") {
    for (double beta : {3.0, 5.0}) {
        for (double alpha : {0.9, 0.97}) {
            const auto eq = build_friedlander(ShearProfile::tanh_layer(beta), alpha);
            const double a13 = alpha * (1 - alpha);
            double sup = 0.0, scale = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const double z = -1.0 + 2.0 * i / 999.0;
                const double up = eq.shear.d1(z);
                sup = std::max(sup, std::abs(eq.strat.d1(z) + a13 * up * up));
                scale = std::max(scale, a13 * up * up);
            }
            CHECK(sup <= 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("alpha = 1 gives the homogeneous flow") {
    const auto eq = build_friedlander(ShearProfile::tanh_layer(3.0), 1.0);
    for (double z : {-0.8, 0.0, 0.33}) {
        CHECK(eq.strat.eval(z) == 0.0);
        CHECK(eq.strat.d1(z) == 0.0);
    }
}

TEST_CASE("alpha out of range and non-monotone shear are rejected") {
    CHECK_THROWS_WITH_AS(build_friedlander(ShearProfile::tanh_layer(3.0), 0.5),
                         doctest::Contains("alpha"), Error);
    CHECK_THROWS_AS(build_friedlander(ShearProfile::tanh_layer(3.0), 1.2), Error);
    ShearProfile bad = ShearProfile::couette();
    bad.kind = ShearKind::Custom;
    bad.eval = [](double z) { return z * z; };
    bad.d1 = [](double z) { return 2.0 * z; };
    CHECK_THROWS_AS(build_friedlander(bad, 0.9), Error);
}

TEST_CASE("simpson antiderivative matches the tanh closed form to 1e-10") {
    // force the custom path by relabeling the kind
    ShearProfile sh = ShearProfile::tanh_layer(5.0);
    sh.kind = ShearKind::Custom;
    const auto numeric = build_friedlander(sh, 0.95);
    const auto closed = build_friedlander(ShearProfile::tanh_layer(5.0), 0.95);
    for (int i = 0; i <= 200; ++i) {
        const double z = -1.0 + 2.0 * i / 200.0;
        CHECK(std::abs(numeric.strat.eval(z) - closed.strat.eval(z)) < 1e-10);
    }
}

TEST_CASE("richardson values") {
    const auto fried = build_friedlander(ShearProfile::tanh_layer(4.0), 0.9);
    for (double z : {-0.7, 0.0, 0.52})
        CHECK(fried.richardson(z) == doctest::Approx(0.09).epsilon(1e-12));
    const auto couette = stable_couette();
    CHECK(couette.richardson(0.5) == doctest::Approx(1.0));
    // Ri == 1/4 boundary profile counts as satisfied
    StratifiedEquilibrium boundary;
    boundary.shear = ShearProfile::couette();
    boundary.strat = Stratification::linear(-0.25);
    boundary.alpha = 1.0;
    boundary.friedlander = false;
    const auto rep = miles_howard_check(boundary, 101);
    CHECK(rep.min_ri == doctest::Approx(0.25));
    CHECK(rep.miles_howard_satisfied);
}

TEST_CASE("miles-howard reports") {
    const auto couette = stable_couette();
    const auto rep = miles_howard_check(couette, 333);
    CHECK(rep.miles_howard_satisfied);
    CHECK(rep.min_ri == doctest::Approx(1.0));

    const auto fried = build_friedlander(ShearProfile::tanh_layer(5.0), 0.9);
    const auto rep2 = miles_howard_check(fried, 1000);
    CHECK_FALSE(rep2.miles_howard_satisfied);
    CHECK(rep2.min_ri == doctest::Approx(0.09).epsilon(1e-10));

    // richardson constancy for Friedlander equilibria
    double lo = 1e30, hi = -1e30;
    for (const auto& [z, ri] : rep2.samples) {
        lo = std::min(lo, ri);
        hi = std::max(hi, ri);
    }
    CHECK(hi - lo <= 1e-12);
}

TEST_CASE("degenerate shear is rejected by richardson") {
    StratifiedEquilibrium eq;
    eq.shear.kind = ShearKind::Custom;
    eq.shear.eval = [](double z) { return z * z * z; };
    eq.shear.d1 = [](double z) { return 3.0 * z * z; };
    eq.shear.d2 = [](double z) { return 6.0 * z; };
    eq.shear.d3 = [](double) { return 6.0; };
    eq.shear.sup_norm = 1.0;
    eq.strat = Stratification::linear(-1.0);
    eq.friedlander = false;
    CHECK_THROWS_AS(eq.richardson(0.0), Error);
    CHECK(eq.richardson(0.5) == doctest::Approx(1.0 / (0.75 * 0.75)));
}

TEST_CASE("stable stratification flag") {
    CHECK(build_friedlander(ShearProfile::tanh_layer(5.0), 0.97).strat.stable());
    CHECK_FALSE(build_friedlander(ShearProfile::tanh_layer(5.0), 1.0).strat.stable());
}
