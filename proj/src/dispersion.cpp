#include "dispersion.hpp"

#include <algorithm>
#include <cmath>

namespace stratstab {

namespace {

void require_upper_half(const cplx& c, const char* where) {
    if (!(c.imag() > 0.0))
        throw Error(Err::BranchViolation,
                    std::string(where) + ": Im(c) must be positive");
}

// principal-branch complex power w^a; for Im(c) > 0 the base U_s - c stays
// in the open lower half-plane, so log never crosses the cut
inline cplx cpow(const cplx& w, double a) { return std::exp(a * std::log(w)); }

double sup_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
}

// cached per-(query, grid) nodal arrays
struct Workspace {
    std::vector<double> us, us2;
    std::vector<cplx> inv_pow;   // (U_s-c)^{-2a}
    std::vector<cplx> mid_pow;   // (U_s-c)^{2a-1}
    std::vector<cplx> full_pow;  // (U_s-c)^{2a}

    Workspace(const DispersionQuery& q, const PanelGrid& grid) {
        const auto& z = grid.nodes();
        const int n = grid.size();
        us.resize(n);
        us2.resize(n);
        inv_pow.resize(n);
        mid_pow.resize(n);
        full_pow.resize(n);
        const double a = q.alpha();
        for (int i = 0; i < n; ++i) {
            us[i] = q.eq.shear.eval(z[i]);
            us2[i] = q.eq.shear.d2(z[i]);
            const cplx w = us[i] - q.c;
            const cplx lg = std::log(w);
            inv_pow[i] = std::exp(-2.0 * a * lg);
            mid_pow[i] = std::exp((2.0 * a - 1.0) * lg);
            full_pow[i] = std::exp(2.0 * a * lg);
        }
    }

    GridFn S(const std::vector<cplx>& f, const PanelGrid& grid) const {
        const int n = grid.size();
        std::vector<cplx> tmp(n);
        for (int i = 0; i < n; ++i) tmp[i] = mid_pow[i] * us2[i] * f[i];
        std::vector<cplx> inner;
        cplx unused;
        grid.prefix(tmp, inner, unused);
        for (int i = 0; i < n; ++i) tmp[i] = inv_pow[i] * inner[i];
        GridFn out;
        grid.prefix(tmp, out.v, out.at_end);
        return out;
    }

    GridFn S_tilde(const std::vector<cplx>& f, const PanelGrid& grid) const {
        const int n = grid.size();
        std::vector<cplx> tmp(n);
        for (int i = 0; i < n; ++i) tmp[i] = full_pow[i] * f[i];
        std::vector<cplx> inner;
        cplx unused;
        grid.prefix(tmp, inner, unused);
        for (int i = 0; i < n; ++i) tmp[i] = inv_pow[i] * inner[i];
        GridFn out;
        grid.prefix(tmp, out.v, out.at_end);
        return out;
    }

    GridFn D(const PanelGrid& grid) const {
        GridFn out;
        grid.prefix(inv_pow, out.v, out.at_end);
        return out;
    }
};

NeumannSolution solve_on_grid(const DispersionQuery& q,
                              std::shared_ptr<const PanelGrid> grid, double tol,
                              int max_terms) {
    const Workspace ws(q, *grid);
    const double one_minus_a = 1.0 - q.alpha();
    const double kap2 = q.kappa * q.kappa;

    NeumannSolution sol;
    sol.grid = grid;
    GridFn D = ws.D(*grid);
    sol.psi = D.v;
    sol.psi_end = D.at_end;
    sol.terms_used = 1;

    std::vector<cplx> term = D.v;
    cplx term_end = D.at_end;
    double prev_norm = sup_abs(term);
    double ratio = 0.0;
    int noncontractive_streak = 0;
    bool converged = false;

    for (int n = 1; n < max_terms; ++n) {
        GridFn next;
        if (one_minus_a != 0.0) {
            next = ws.S(term, *grid);
            for (cplx& x : next.v) x *= one_minus_a;
            next.at_end *= one_minus_a;
        } else {
            next.v.assign(term.size(), 0.0);
        }
        if (kap2 != 0.0) {
            GridFn st = ws.S_tilde(term, *grid);
            for (size_t i = 0; i < next.v.size(); ++i) next.v[i] += kap2 * st.v[i];
            next.at_end += kap2 * st.at_end;
        }
        const double norm = sup_abs(next.v);
        ratio = prev_norm > 0.0 ? norm / prev_norm : 0.0;
        sol.contraction_estimate = ratio;
        if (norm == 0.0) {
            converged = true;
            break;
        }
        for (size_t i = 0; i < sol.psi.size(); ++i) sol.psi[i] += next.v[i];
        sol.psi_end += next.at_end;
        sol.terms_used = n + 1;
        term = std::move(next.v);
        term_end = next.at_end;
        prev_norm = norm;

        if (ratio >= 1.0) {
            if (++noncontractive_streak >= 3)
                throw Error(Err::NonContractive,
                            "solve_neumann: term ratio >= 1 for 3 consecutive terms "
                            "(operator bound degenerates as Im(c) -> 0)");
            continue;
        }
        noncontractive_streak = 0;
        if (norm < tol * (1.0 - ratio)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(Err::ToleranceNotReached,
                    "solve_neumann: series did not reach tolerance within max_terms");

    // a-posteriori self-consistency: psi - D - (1-a)S[psi] - kap^2 St[psi]
    std::vector<cplx> resid = sol.psi;
    for (size_t i = 0; i < resid.size(); ++i) resid[i] -= D.v[i];
    if (one_minus_a != 0.0) {
        GridFn s = ws.S(sol.psi, *grid);
        for (size_t i = 0; i < resid.size(); ++i) resid[i] -= one_minus_a * s.v[i];
    }
    if (kap2 != 0.0) {
        GridFn st = ws.S_tilde(sol.psi, *grid);
        for (size_t i = 0; i < resid.size(); ++i) resid[i] -= kap2 * st.v[i];
    }
    sol.fixed_point_residual = sup_abs(resid);
    return sol;
}

}  // namespace

cplx d_alpha(const DispersionQuery& q, double z, double rel_tol) {
    require_upper_half(q.c, "d_alpha");
    if (z < -1.0 || z > 1.0)
        throw Error(Err::InvalidArgument, "d_alpha: z outside [-1,1]");
    if (z == -1.0) return 0.0;
    const double a = q.alpha();
    const auto& sh = q.eq.shear;
    const cplx c = q.c;
    auto f = [&sh, a, c](double r) { return cpow(sh.eval(r) - c, -2.0 * a); };
    return integrate_adaptive(f, -1.0, z, rel_tol).value;
}

GridFn apply_S(const std::vector<cplx>& f, const DispersionQuery& q,
               const PanelGrid& grid) {
    require_upper_half(q.c, "apply_S");
    return Workspace(q, grid).S(f, grid);
}

GridFn apply_S_tilde(const std::vector<cplx>& f, const DispersionQuery& q,
                     const PanelGrid& grid) {
    require_upper_half(q.c, "apply_S_tilde");
    return Workspace(q, grid).S_tilde(f, grid);
}

NeumannSolution solve_neumann(const DispersionQuery& q, double tol, int max_terms) {
    require_upper_half(q.c, "solve_neumann");
    auto grid = std::make_shared<const PanelGrid>(q.npanels);
    return solve_on_grid(q, grid, tol, max_terms);
}

DispersionValue dispersion_value(const DispersionQuery& q, double tol) {
    require_upper_half(q.c, "dispersion_value");
    NeumannSolution coarse = solve_neumann(q, tol);
    DispersionQuery fine = q;
    fine.npanels = 2 * q.npanels;
    NeumannSolution ref = solve_neumann(fine, tol);
    return {coarse.psi_end, std::abs(coarse.psi_end - ref.psi_end)};
}

cplx shoot_tg(const DispersionQuery& q, int nsteps) {
    require_upper_half(q.c, "shoot_tg");
    const auto& sh = q.eq.shear;
    const auto& st = q.eq.strat;
    const cplx c = q.c;
    const double kap2 = q.kappa * q.kappa;
    auto coeff = [&](double z) {
        const cplx um = sh.eval(z) - c;
        return kap2 + sh.d2(z) / um + st.d1(z) / (um * um);
    };
    const double h = 2.0 / nsteps;
    cplx phi = 0.0, dphi = 1.0;
    double z = -1.0;
    for (int i = 0; i < nsteps; ++i) {
        const cplx a1 = dphi, b1 = coeff(z) * phi;
        const cplx a2 = dphi + 0.5 * h * b1, b2 = coeff(z + 0.5 * h) * (phi + 0.5 * h * a1);
        const cplx a3 = dphi + 0.5 * h * b2, b3 = coeff(z + 0.5 * h) * (phi + 0.5 * h * a2);
        const cplx a4 = dphi + h * b3, b4 = coeff(z + h) * (phi + h * a3);
        phi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        dphi += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        z = -1.0 + (i + 1) * h;
    }
    return phi;
}

ShootingTrajectory shoot_tg_trajectory(const DispersionQuery& q, int n_interior,
                                       int min_steps) {
    require_upper_half(q.c, "shoot_tg_trajectory");
    const int cells = n_interior + 1;
    const int per_cell = std::max(1, (min_steps + cells - 1) / cells);
    const auto& sh = q.eq.shear;
    const auto& st = q.eq.strat;
    const cplx c = q.c;
    const double kap2 = q.kappa * q.kappa;
    auto coeff = [&](double z) {
        const cplx um = sh.eval(z) - c;
        return kap2 + sh.d2(z) / um + st.d1(z) / (um * um);
    };
    ShootingTrajectory out;
    out.phi.reserve(n_interior);
    out.dphi.reserve(n_interior);
    const double H = 2.0 / cells;
    const double h = H / per_cell;
    cplx phi = 0.0, dphi = 1.0;
    for (int j = 0; j < cells; ++j) {
        const double z0 = -1.0 + j * H;
        for (int s = 0; s < per_cell; ++s) {
            const double z = z0 + s * h;
            const cplx a1 = dphi, b1 = coeff(z) * phi;
            const cplx a2 = dphi + 0.5 * h * b1, b2 = coeff(z + 0.5 * h) * (phi + 0.5 * h * a1);
            const cplx a3 = dphi + 0.5 * h * b2, b3 = coeff(z + 0.5 * h) * (phi + 0.5 * h * a2);
            const cplx a4 = dphi + h * b3, b4 = coeff(z + h) * (phi + h * a3);
            phi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            dphi += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
        if (j < cells - 1) {
            out.phi.push_back(phi);
            out.dphi.push_back(dphi);
        }
    }
    out.phi_end = phi;
    return out;
}

ShootingKernel::ShootingKernel(const StratifiedEquilibrium& eq, double kappa,
                               int nsteps)
    : nsteps_(nsteps), kappa_(kappa) {
    const int m = 2 * nsteps + 1;
    us_.resize(m);
    us2_.resize(m);
    rhop_.resize(m);
    const double hh = 1.0 / nsteps;  // half-step in z units of 2/nsteps
    for (int i = 0; i < m; ++i) {
        const double z = -1.0 + i * hh;
        us_[i] = eq.shear.eval(z);
        us2_[i] = eq.shear.d2(z);
        rhop_[i] = eq.strat.d1(z);
    }
}

cplx ShootingKernel::value(cplx c) const {
    if (!(c.imag() > 0.0))
        throw Error(Err::BranchViolation, "ShootingKernel: Im(c) must be positive");
    const double kap2 = kappa_ * kappa_;
    const double h = 2.0 / nsteps_;
    auto coeff = [&](int half_index, const cplx& phi) {
        const cplx um = us_[half_index] - c;
        return (kap2 + us2_[half_index] / um + rhop_[half_index] / (um * um)) * phi;
    };
    cplx phi = 0.0, dphi = 1.0;
    for (int i = 0; i < nsteps_; ++i) {
        const int b = 2 * i;
        const cplx a1 = dphi, b1 = coeff(b, phi);
        const cplx a2 = dphi + 0.5 * h * b1, b2 = coeff(b + 1, phi + 0.5 * h * a1);
        const cplx a3 = dphi + 0.5 * h * b2, b3 = coeff(b + 1, phi + 0.5 * h * a2);
        const cplx a4 = dphi + h * b3, b4 = coeff(b + 2, phi + h * a3);
        phi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        dphi += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    return phi;
}

double operator_norm_bound(const DispersionQuery& q) {
    const auto& sh = q.eq.shear;
    constexpr int N = 2001;
    double sup_g = 0.0, sup_gp = 0.0;
    for (int i = 0; i < N; ++i) {
        const double z = -1.0 + 2.0 * i / (N - 1);
        const double up = sh.d1(z);
        if (up <= 0.0)
            throw Error(Err::NonMonotoneShear, "operator_norm_bound: U_s' <= 0");
        const double g = sh.d2(z) / up;
        const double gp = (sh.d3(z) * up - sh.d2(z) * sh.d2(z)) / (up * up);
        sup_g = std::max(sup_g, std::abs(g));
        sup_gp = std::max(sup_gp, std::abs(gp));
    }
    const double im = std::abs(q.c.imag());
    const double pre =
        std::pow(1.0 + 4.0 * sh.sup_norm * sh.sup_norm / (im * im), q.alpha());
    return pre * (sup_g + sup_gp);
}

}  // namespace stratstab
