#include <doctest.h>

#include <cmath>
#include <vector>

#include "stratstab/stratstab.h"

TEST_CASE("C API: equilibrium lifecycle and profile evaluation") {
    ss_equilibrium* eq = nullptr;
    REQUIRE(ss_equilibrium_tanh(5.0, 0.97, &eq) == SS_OK);
    double us, us1, us2, rho, rho1;
    REQUIRE(ss_equilibrium_eval(eq, 0.2, &us, &us1, &us2, &rho, &rho1) == SS_OK);
    CHECK(us == doctest::Approx(std::tanh(1.0)));
    CHECK(-rho1 == doctest::Approx(0.97 * 0.03 * us1 * us1).epsilon(1e-12));
    double alpha;
    CHECK(ss_equilibrium_alpha(eq, &alpha) == SS_OK);
    CHECK(alpha == 0.97);
    ss_equilibrium_free(eq);

    CHECK(ss_equilibrium_tanh(5.0, 1.3, &eq) == SS_ERR_ALPHA_RANGE);
    CHECK(ss_equilibrium_tanh(5.0, 0.4, &eq) == SS_ERR_ALPHA_RANGE);
}

TEST_CASE("C API: Richardson diagnostics") {
    ss_equilibrium* eq = nullptr;
    REQUIRE(ss_equilibrium_stable_couette(&eq) == SS_OK);
    double ri;
    REQUIRE(ss_richardson(eq, 0.5, &ri) == SS_OK);
    CHECK(ri == doctest::Approx(1.0));
    ss_richardson_report rep;
    size_t count = 0;
    REQUIRE(ss_miles_howard(eq, 100, &rep, nullptr, nullptr, 0, &count) == SS_OK);
    CHECK(rep.satisfied == 1);
    CHECK(count == 100);
    std::vector<double> z(count), r(count);
    REQUIRE(ss_miles_howard(eq, 100, &rep, z.data(), r.data(), count, &count) == SS_OK);
    CHECK(r[0] == doctest::Approx(1.0));
    ss_equilibrium_free(eq);
}

TEST_CASE("C API: dispersion values and oracles") {
    ss_equilibrium* eq = nullptr;
    REQUIRE(ss_equilibrium_couette_friedlander(1.0, &eq) == SS_OK);
    double re, im;
    REQUIRE(ss_d_alpha(eq, 0.0, 1.0, 1.0, &re, &im) == SS_OK);
    CHECK(re == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(im) < 1e-12);
    REQUIRE(ss_shoot_tg(eq, 0.0, 1.0, 0.0, 0, &re, &im) == SS_OK);
    CHECK(re == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(ss_shoot_tg(eq, 0.0, -1.0, 0.0, 0, &re, &im) == SS_ERR_BRANCH);
    ss_equilibrium_free(eq);
}

TEST_CASE("C API: winding, zeros, gamma0, mode, growth round trip") {
    ss_equilibrium* eq = nullptr;
    REQUIRE(ss_equilibrium_tanh(5.0, 0.97, &eq) == SS_OK);

    double R;
    REQUIRE(ss_exclusion_radius(eq, &R) == SS_OK);
    CHECK(R == doctest::Approx(3.4142).epsilon(1e-3));

    ss_winding_report wrep;
    REQUIRE(ss_nyquist_winding(eq, 0.01, R, &wrep, nullptr, 0, nullptr) == SS_OK);
    CHECK(wrep.winding == 1);

    ss_zero zeros[8];
    size_t nz = 0;
    REQUIRE(ss_find_dispersion_zeros(eq, 0.0, SS_METHOD_SHOOTING, 0.05, 1e-10, zeros,
                                     8, &nz) == SS_OK);
    REQUIRE(nz == 1);
    CHECK(zeros[0].im_c > 0.05);
    CHECK(zeros[0].g1_pass == 1);
    CHECK(zeros[0].flagged_spurious == 0);

    ss_mode* mode = nullptr;
    REQUIRE(ss_mode_compute(eq, SS_METHOD_SHOOTING, 1, 0.0, zeros[0].re_c,
                            zeros[0].im_c, 255, &mode) == SS_OK);
    double tg, bc;
    REQUIRE(ss_mode_residual(mode, eq, &tg, &bc) == SS_OK);
    CHECK(tg < 1e-5);
    CHECK(bc < 1e-8);
    int k, n;
    double kap, sigma, rc, ic;
    REQUIRE(ss_mode_info(mode, &k, &kap, &sigma, &rc, &ic, &n) == SS_OK);
    CHECK(n == 255);
    CHECK(sigma == doctest::Approx(zeros[0].im_c));
    ss_mode_free(mode);
    ss_equilibrium_free(eq);
}

TEST_CASE("C API: stable profile reports no zeros and no growth") {
    ss_equilibrium* eq = nullptr;
    REQUIRE(ss_equilibrium_stable_couette(&eq) == SS_OK);
    double g;
    CHECK(ss_dominant_growth(eq, 1, 0.0, 64, 2e-3, 1.0, 0, &g) == SS_ERR_NO_GROWTH);
    double gamma;
    CHECK(ss_gamma0(eq, 0.05, &gamma) == SS_ERR_NO_ZERO);
    ss_equilibrium_free(eq);
}
