#include "modes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stratstab {

GrowingMode reconstruct_mode(const Zero& z0, int k, const DispersionQuery& q,
                             int n_interior, ZeroMethod source) {
    if (k == 0) throw Error(Err::InvalidArgument, "reconstruct_mode: k must be nonzero");
    GrowingMode m;
    m.k = k;
    m.c = z0.c;
    m.kappa = q.kappa;
    m.sigma = k * z0.c.imag();
    m.grid = Grid1D(n_interior);

    DispersionQuery qq = q;
    qq.c = z0.c;
    const int n = n_interior;
    m.phi.resize(n);
    cplx phi_end;

    if (source == ZeroMethod::Shooting) {
        ShootingTrajectory traj = shoot_tg_trajectory(qq, n);
        m.phi = traj.phi;
        phi_end = traj.phi_end;
        double scale = 0.0;
        for (const cplx& v : traj.phi) scale = std::max(scale, std::abs(v));
        for (const cplx& v : traj.dphi) scale = std::max(scale, std::abs(v));
        if (std::abs(phi_end) > 1e-6 * scale)
            throw Error(Err::NotAZero, "reconstruct_mode: phi(1) not small at c");
    } else {
        NeumannSolution sol = solve_neumann(qq);
        if (std::abs(sol.psi_end) > 1e-6)
            throw Error(Err::NotAZero, "reconstruct_mode: dispersion value not small at c");
        const double a = qq.alpha();
        for (int j = 0; j < n; ++j) {
            const double z = m.grid.nodes[j];
            const cplx um = qq.eq.shear.eval(z) - z0.c;
            m.phi[j] = std::exp(a * std::log(um)) * sol.grid->interpolate(sol.psi, z);
        }
        const cplx um1 = qq.eq.shear.eval(1.0) - z0.c;
        phi_end = std::exp(a * std::log(um1)) * sol.psi_end;
    }

    m.r.resize(n);
    m.w.resize(n);
    for (int j = 0; j < n; ++j) {
        const double z = m.grid.nodes[j];
        const cplx um = qq.eq.shear.eval(z) - z0.c;
        const double us2 = qq.eq.shear.d2(z);
        const double rp = qq.eq.strat.d1(z);
        m.r[j] = rp * m.phi[j] / um;
        m.w[j] = (us2 / um + rp / (um * um)) * m.phi[j];
    }
    double sup = 0.0;
    for (const cplx& v : m.phi) sup = std::max(sup, std::abs(v));
    if (sup == 0.0) throw Error(Err::NotAZero, "reconstruct_mode: trivial solution");
    for (int j = 0; j < n; ++j) {
        m.phi[j] /= sup;
        m.r[j] /= sup;
        m.w[j] /= sup;
    }
    m.bc_defect = std::abs(phi_end) / sup;
    return m;
}

ModeResidualReport mode_residual(const GrowingMode& m, const StratifiedEquilibrium& eq) {
    ModeResidualReport rep;
    rep.bc_defect = m.bc_defect;
    const int n = m.grid.n;
    const double h = m.grid.h;
    if (n < 7) throw Error(Err::InvalidArgument, "mode_residual: grid too coarse");
    double max_defect = 0.0, max_scale = 0.0;
    for (int j = 2; j <= n - 3; ++j) {
        const cplx phipp = (-m.phi[j - 2] + 16.0 * m.phi[j - 1] - 30.0 * m.phi[j] +
                            16.0 * m.phi[j + 1] - m.phi[j + 2]) /
                           (12.0 * h * h);
        const double z = m.grid.nodes[j];
        const cplx um = eq.shear.eval(z) - m.c;
        const cplx lhs = um * um * (phipp - m.kappa * m.kappa * m.phi[j]);
        const cplx defect =
            lhs - um * eq.shear.d2(z) * m.phi[j] - eq.strat.d1(z) * m.phi[j];
        max_defect = std::max(max_defect, std::abs(defect));
        max_scale = std::max(max_scale, std::abs(um * um * phipp));
    }
    rep.tg_residual = max_scale > 0.0 ? max_defect / max_scale : 0.0;
    return rep;
}

namespace {

double gaussian(std::mt19937_64& rng) {
    const double u1 = (rng() >> 11) * (1.0 / 9007199254740992.0);
    const double u2 = (rng() >> 11) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

double dominant_growth(int k, double kappa, const StratifiedEquilibrium& eq,
                       const Grid1D& grid, double dt, double T, std::uint64_t seed,
                       int max_iters) {
    if (grid.n < 64)
        throw Error(Err::InvalidArgument, "dominant_growth: grid resolution < 64");
    const LinearModel model =
        kappa == 0.0 ? LinearModel::Hydrostatic : LinearModel::Boussinesq;
    LinearStepper st(eq, grid, k, kappa, model);
    ModeState s;
    s.k = k;
    s.kappa = kappa;
    s.rho_hat.resize(grid.n);
    s.omega_hat.resize(grid.n);
    std::mt19937_64 rng(seed);
    for (int j = 0; j < grid.n; ++j) {
        s.rho_hat[j] = cplx(gaussian(rng), gaussian(rng));
        s.omega_hat[j] = cplx(gaussian(rng), gaussian(rng));
    }
    const int nsteps = static_cast<int>(std::llround(T / dt));
    double est = 0.0, prev = 0.0;
    int stable_streak = 0;
    std::vector<double> history;
    for (int it = 0; it < max_iters; ++it) {
        const double nrm = s.l2_norm(grid.h);
        for (auto& x : s.rho_hat) x /= nrm;
        for (auto& x : s.omega_hat) x /= nrm;
        for (int i = 0; i < nsteps; ++i) st.step(s, dt);
        est = std::log(s.l2_norm(grid.h)) / T;
        history.push_back(est);
        if (it > 0 && std::abs(est - prev) < 1e-4 * std::max(1.0, std::abs(est))) {
            if (++stable_streak >= 5) break;
        } else {
            stable_streak = 0;
        }
        prev = est;
    }
    if (stable_streak >= 5) {
        if (est <= 0.0)
            throw Error(Err::NoGrowth, "dominant_growth: no exponential growth");
        return est;
    }
    // not stabilized at the cap: algebraic growth decays like log(1+1/n) and
    // hovers near 0, an exponential rate would have locked in long before
    const size_t n = history.size();
    double tail_max = 0.0;
    for (size_t i = n >= 10 ? n - 10 : 0; i < n; ++i)
        tail_max = std::max(tail_max, history[i]);
    if (tail_max < 0.05)
        throw Error(Err::NoGrowth, "dominant_growth: amplification decays toward 0");
    throw Error(Err::ToleranceNotReached,
                "dominant_growth: estimate did not stabilize");
}

}  // namespace stratstab
