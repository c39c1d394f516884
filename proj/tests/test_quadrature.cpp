#include <doctest.h>

#include <cmath>

#include "quadrature.hpp"

using namespace stratstab;

TEST_CASE("adaptive integrator: smooth real integrand") {
    auto r = integrate_adaptive([](double x) { return cplx(std::cos(x), 0.0); }, -1.0,
                                1.0);
    CHECK(std::abs(r.value.real() - 2.0 * std::sin(1.0)) < 1e-14);
    CHECK(std::abs(r.value.imag()) < 1e-15);
}

TEST_CASE("adaptive integrator: near-singular complex kernel") {
    // int_{-1}^{1} dz/(z - c)^2 = 1/(-1-c) - 1/(1-c), sharp peak for small Im c
    const cplx c(0.3, 1e-3);
    auto f = [c](double z) {
        const cplx w = z - c;
        return 1.0 / (w * w);
    };
    auto r = integrate_adaptive(f, -1.0, 1.0, 1e-12);
    const cplx exact = 1.0 / (-1.0 - c) - 1.0 / (1.0 - c);
    CHECK(std::abs(r.value - exact) < 1e-9 * std::abs(exact));
    CHECK(r.panels > 4);  // refinement must have triggered near the peak
}

TEST_CASE("panel prefix integration matches antiderivative at nodes") {
    PanelGrid grid(16);
    std::vector<cplx> f(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double z = grid.nodes()[i];
        f[i] = cplx(std::cos(3.0 * z), std::sin(2.0 * z));
    }
    std::vector<cplx> F;
    cplx total;
    grid.prefix(f, F, total);
    for (int i = 0; i < grid.size(); i += 37) {
        const double z = grid.nodes()[i];
        const cplx exact(std::sin(3.0 * z) / 3.0 - std::sin(-3.0) / 3.0,
                         (-std::cos(2.0 * z) + std::cos(-2.0)) / 2.0);
        CHECK(std::abs(F[i] - exact) < 1e-13);
    }
    const cplx exact_total(std::sin(3.0) / 3.0 - std::sin(-3.0) / 3.0, 0.0);
    CHECK(std::abs(total - exact_total) < 1e-13);
}

TEST_CASE("panel interpolation reproduces analytic data off-node") {
    PanelGrid grid(8);
    std::vector<cplx> f(grid.size());
    for (int i = 0; i < grid.size(); ++i) f[i] = std::exp(cplx(0.0, 2.0 * grid.nodes()[i]));
    for (double z : {-0.913, -0.5, 0.03, 0.777}) {
        const cplx exact = std::exp(cplx(0.0, 2.0 * z));
        CHECK(std::abs(grid.interpolate(f, z) - exact) < 1e-12);
    }
}
