#pragma once

#include <functional>
#include <vector>

#include "errors.hpp"

namespace stratstab {

// Background shear U_s on [-1,1] with analytic derivatives. Profiles are
// evaluation maps, not tables, so the tanh family keeps exact derivative
// chains at every z.
enum class ShearKind { Tanh, Couette, Custom };

struct ShearProfile {
    ShearKind kind = ShearKind::Custom;
    double beta = 0.0;  // tanh steepness, meaningful for kind==Tanh
    std::function<double(double)> eval, d1, d2, d3;
    double sup_norm = 0.0;

    static ShearProfile tanh_layer(double beta);
    static ShearProfile couette();  // U_s(z) = z
};

// Background density rho_s with derivatives.
struct Stratification {
    std::function<double(double)> eval, d1, d2;

    static Stratification zero();
    static Stratification linear(double slope);  // rho_s = slope * z

    // stable iff rho_s' < 0 everywhere on a sample grid
    bool stable(int nsamples = 1000) const;
};

struct StratifiedEquilibrium {
    ShearProfile shear;
    Stratification strat;
    double alpha = 1.0;       // Friedlander parameter
    bool friedlander = true;  // -rho_s' == alpha(1-alpha) U_s'^2 holds

    double richardson(double z) const;
};

struct RichardsonReport {
    double min_ri = 0.0;
    double argmin_z = 0.0;
    bool miles_howard_satisfied = false;
    std::vector<std::pair<double, double>> samples;  // (z, Ri)
};

// Friedlander equilibrium: stratification chosen so that
// -rho_s'(z) = alpha(1-alpha) U_s'(z)^2. For tanh shears the closed-form
// antiderivative is used; otherwise rho_s is accumulated by composite
// Simpson at 4097 points and normalized so rho_s(0) = 0.
StratifiedEquilibrium build_friedlander(const ShearProfile& shear, double alpha);

// The Miles-Howard stable reference pair U_s = z, rho_s = -z (Ri == 1).
StratifiedEquilibrium stable_couette();

RichardsonReport miles_howard_check(const StratifiedEquilibrium& eq, int n_samples);

}  // namespace stratstab
