#include "profiles.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace stratstab {

ShearProfile ShearProfile::tanh_layer(double beta) {
    ShearProfile p;
    p.kind = ShearKind::Tanh;
    p.beta = beta;
    p.eval = [beta](double z) { return std::tanh(beta * z); };
    p.d1 = [beta](double z) {
        const double s = 1.0 / std::cosh(beta * z);
        return beta * s * s;
    };
    p.d2 = [beta](double z) {
        const double t = std::tanh(beta * z);
        const double s = 1.0 / std::cosh(beta * z);
        return -2.0 * beta * beta * t * s * s;
    };
    p.d3 = [beta](double z) {
        const double t = std::tanh(beta * z);
        const double s2 = 1.0 / (std::cosh(beta * z) * std::cosh(beta * z));
        // d/dz of -2 b^2 t s^2 = -2 b^3 s^2 (s^2 - 2 t^2)
        return -2.0 * beta * beta * beta * s2 * (s2 - 2.0 * t * t);
    };
    p.sup_norm = std::tanh(beta);
    return p;
}

ShearProfile ShearProfile::couette() {
    ShearProfile p;
    p.kind = ShearKind::Couette;
    p.eval = [](double z) { return z; };
    p.d1 = [](double) { return 1.0; };
    p.d2 = [](double) { return 0.0; };
    p.d3 = [](double) { return 0.0; };
    p.sup_norm = 1.0;
    return p;
}

Stratification Stratification::zero() {
    Stratification s;
    s.eval = [](double) { return 0.0; };
    s.d1 = [](double) { return 0.0; };
    s.d2 = [](double) { return 0.0; };
    return s;
}

Stratification Stratification::linear(double slope) {
    Stratification s;
    s.eval = [slope](double z) { return slope * z; };
    s.d1 = [slope](double) { return slope; };
    s.d2 = [](double) { return 0.0; };
    return s;
}

bool Stratification::stable(int nsamples) const {
    for (int i = 0; i < nsamples; ++i) {
        const double z = -1.0 + 2.0 * i / (nsamples - 1);
        if (d1(z) >= 0.0) return false;
    }
    return true;
}

double StratifiedEquilibrium::richardson(double z) const {
    const double up = shear.d1(z);
    if (std::abs(up) < 1e-14)
        throw Error(Err::DegenerateShear, "richardson: U_s'(z) vanishes at z");
    return -strat.d1(z) / (up * up);
}

namespace {

// prefix integral of f at 4097 uniform points by composite Simpson,
// value fixed to 0 at z = 0 (the middle point)
std::vector<double> simpson_prefix(const std::function<double(double)>& f) {
    constexpr int N = 4097;  // even number of intervals
    const double h = 2.0 / (N - 1);
    std::vector<double> F(N, 0.0), fv(N);
    for (int i = 0; i < N; ++i) fv[i] = f(-1.0 + i * h);
    for (int i = 2; i < N; i += 2)
        F[i] = F[i - 2] + h / 3.0 * (fv[i - 2] + 4.0 * fv[i - 1] + fv[i]);
    // odd points: one quadratic sub-interval on top of the even prefix, so
    // the local O(h^4) correction never accumulates
    for (int i = 1; i < N; i += 2)
        F[i] = F[i - 1] + h / 12.0 * (5.0 * fv[i - 1] + 8.0 * fv[i] - fv[i + 1]);
    const double mid = F[(N - 1) / 2];
    for (double& v : F) v -= mid;
    return F;
}

}  // namespace

StratifiedEquilibrium build_friedlander(const ShearProfile& shear, double alpha) {
    if (!(alpha > 0.5) || !(alpha <= 1.0))
        throw Error(Err::AlphaOutOfRange, "build_friedlander: alpha must lie in (1/2, 1]");
    for (int i = 0; i < 1000; ++i) {
        const double z = -1.0 + 2.0 * i / 999.0;
        if (shear.d1(z) <= 0.0)
            throw Error(Err::NonMonotoneShear, "build_friedlander: U_s' changes sign");
    }
    const double a13 = alpha * (1.0 - alpha);
    StratifiedEquilibrium eq;
    eq.shear = shear;
    eq.alpha = alpha;
    eq.friedlander = true;

    Stratification st;
    if (shear.kind == ShearKind::Tanh) {
        const double beta = shear.beta;
        st.eval = [a13, beta](double z) {
            const double t = std::tanh(beta * z);
            return a13 * (-beta * t + beta / 3.0 * t * t * t);
        };
    } else {
        auto d1 = shear.d1;
        auto table = std::make_shared<std::vector<double>>(
            simpson_prefix([a13, d1](double z) {
                const double up = d1(z);
                return -a13 * up * up;
            }));
        auto rho_d1 = [a13, d1](double z) {
            const double up = d1(z);
            return -a13 * up * up;
        };
        st.eval = [table, rho_d1](double z) {
            // cubic Hermite between table nodes, slopes exact
            const int N = static_cast<int>(table->size());
            const double h = 2.0 / (N - 1);
            int i = static_cast<int>((z + 1.0) / h);
            if (i < 0) i = 0;
            if (i > N - 2) i = N - 2;
            const double z0 = -1.0 + i * h;
            const double t = (z - z0) / h;
            const double y0 = (*table)[i], y1 = (*table)[i + 1];
            const double m0 = h * rho_d1(z0), m1 = h * rho_d1(z0 + h);
            const double t2 = t * t, t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
                   (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
        };
    }
    {
        auto d1 = shear.d1;
        auto d2 = shear.d2;
        st.d1 = [a13, d1](double z) {
            const double up = d1(z);
            return -a13 * up * up;
        };
        st.d2 = [a13, d1, d2](double z) { return -2.0 * a13 * d1(z) * d2(z); };
    }
    eq.strat = st;
    return eq;
}

StratifiedEquilibrium stable_couette() {
    StratifiedEquilibrium eq;
    eq.shear = ShearProfile::couette();
    eq.strat = Stratification::linear(-1.0);
    eq.alpha = 1.0;
    eq.friedlander = false;
    return eq;
}

RichardsonReport miles_howard_check(const StratifiedEquilibrium& eq, int n_samples) {
    if (n_samples < 2)
        throw Error(Err::InvalidArgument, "miles_howard_check: n_samples < 2");
    RichardsonReport rep;
    rep.min_ri = std::numeric_limits<double>::infinity();
    rep.samples.reserve(n_samples);
    const double h = 2.0 / (n_samples + 1);
    for (int i = 1; i <= n_samples; ++i) {
        const double z = -1.0 + i * h;
        const double ri = eq.richardson(z);
        rep.samples.emplace_back(z, ri);
        if (ri < rep.min_ri) {
            rep.min_ri = ri;
            rep.argmin_z = z;
        }
    }
    rep.miles_howard_satisfied = rep.min_ri >= 0.25;  // boundary counts as stable
    return rep;
}

}  // namespace stratstab
