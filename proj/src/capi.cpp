#include "stratstab/stratstab.h"

#include <algorithm>
#include <string>

#include "dispersion.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "modes.hpp"
#include "profiles.hpp"
#include "rootfinder.hpp"

using namespace stratstab;

struct ss_equilibrium {
    StratifiedEquilibrium eq;
};

struct ss_mode {
    GrowingMode m;
};

namespace {

thread_local std::string g_last_error;

ss_status map_code(Err e) {
    switch (e) {
        case Err::InvalidArgument: return SS_ERR_INVALID_ARGUMENT;
        case Err::AlphaOutOfRange: return SS_ERR_ALPHA_RANGE;
        case Err::NonMonotoneShear: return SS_ERR_NONMONOTONE_SHEAR;
        case Err::DegenerateShear: return SS_ERR_DEGENERATE_SHEAR;
        case Err::BranchViolation: return SS_ERR_BRANCH;
        case Err::NonContractive: return SS_ERR_NONCONTRACTIVE;
        case Err::ToleranceNotReached: return SS_ERR_TOLERANCE;
        case Err::ZeroOnContour: return SS_ERR_ZERO_ON_CONTOUR;
        case Err::RefinementExhausted: return SS_ERR_REFINEMENT;
        case Err::NoZeroFound: return SS_ERR_NO_ZERO;
        case Err::NotAZero: return SS_ERR_NOT_A_ZERO;
        case Err::CflViolation: return SS_ERR_CFL;
        case Err::NoBlowupWithinBudget: return SS_ERR_NO_BLOWUP;
        case Err::NoGrowth: return SS_ERR_NO_GROWTH;
        case Err::IncompatibleEps: return SS_ERR_INCOMPATIBLE_EPS;
    }
    return SS_ERR_INTERNAL;
}

template <typename F>
ss_status guard(F&& fn) {
    try {
        fn();
        return SS_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SS_ERR_INTERNAL;
    }
}

ss_status fill_series(const GrowthSeries& gs, double* t_buf, double* norm_buf,
                      size_t cap, size_t* count) {
    if (count) *count = gs.times.size();
    if (!t_buf || !norm_buf) return SS_OK;
    if (cap < gs.times.size()) {
        g_last_error = "series buffer too small";
        return SS_ERR_BUFFER_TOO_SMALL;
    }
    for (size_t i = 0; i < gs.times.size(); ++i) {
        t_buf[i] = gs.times[i];
        norm_buf[i] = gs.norms[i];
    }
    return SS_OK;
}

void fill_zeros(const std::vector<Zero>& zs, const StratifiedEquilibrium& eq,
                ss_zero* buf, size_t cap, size_t* count) {
    if (count) *count = zs.size();
    if (!buf) return;
    const size_t n = std::min(cap, zs.size());
    for (size_t i = 0; i < n; ++i) {
        const NecessaryConditions nc = verify_necessary_conditions(zs[i], eq);
        buf[i].re_c = zs[i].c.real();
        buf[i].im_c = zs[i].c.imag();
        buf[i].residual = zs[i].residual;
        buf[i].multiplicity_hint = zs[i].multiplicity_hint;
        buf[i].g1_pass = nc.g1_pass ? 1 : 0;
        buf[i].flagged_spurious = nc.flagged_spurious ? 1 : 0;
    }
}

}  // namespace

extern "C" {

const char* ss_status_name(ss_status s) {
    switch (s) {
        case SS_OK: return "OK";
        case SS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
        case SS_ERR_ALPHA_RANGE: return "AlphaOutOfRange";
        case SS_ERR_NONMONOTONE_SHEAR: return "NonMonotoneShear";
        case SS_ERR_DEGENERATE_SHEAR: return "DegenerateShear";
        case SS_ERR_BRANCH: return "BranchViolation";
        case SS_ERR_NONCONTRACTIVE: return "NonContractive";
        case SS_ERR_TOLERANCE: return "ToleranceNotReached";
        case SS_ERR_ZERO_ON_CONTOUR: return "ZeroOnContour";
        case SS_ERR_REFINEMENT: return "RefinementExhausted";
        case SS_ERR_NO_ZERO: return "NoZeroFound";
        case SS_ERR_NOT_A_ZERO: return "NotAZero";
        case SS_ERR_CFL: return "CflViolation";
        case SS_ERR_NO_BLOWUP: return "NoBlowupWithinBudget";
        case SS_ERR_NO_GROWTH: return "NoGrowth";
        case SS_ERR_INCOMPATIBLE_EPS: return "IncompatibleEps";
        case SS_ERR_BUFFER_TOO_SMALL: return "BufferTooSmall";
        case SS_ERR_INTERNAL: return "InternalError";
    }
    return "Unknown";
}

const char* ss_last_error(void) { return g_last_error.c_str(); }

ss_status ss_equilibrium_tanh(double beta, double alpha, ss_equilibrium** out) {
    return guard([&] {
        if (!out) throw Error(Err::InvalidArgument, "null output pointer");
        *out = new ss_equilibrium{build_friedlander(ShearProfile::tanh_layer(beta), alpha)};
    });
}

ss_status ss_equilibrium_couette_friedlander(double alpha, ss_equilibrium** out) {
    return guard([&] {
        if (!out) throw Error(Err::InvalidArgument, "null output pointer");
        *out = new ss_equilibrium{build_friedlander(ShearProfile::couette(), alpha)};
    });
}

ss_status ss_equilibrium_stable_couette(ss_equilibrium** out) {
    return guard([&] {
        if (!out) throw Error(Err::InvalidArgument, "null output pointer");
        *out = new ss_equilibrium{stable_couette()};
    });
}

void ss_equilibrium_free(ss_equilibrium* eq) { delete eq; }

ss_status ss_equilibrium_eval(const ss_equilibrium* eq, double z, double* us,
                              double* us1, double* us2, double* rho, double* rho1) {
    return guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        if (us) *us = eq->eq.shear.eval(z);
        if (us1) *us1 = eq->eq.shear.d1(z);
        if (us2) *us2 = eq->eq.shear.d2(z);
        if (rho) *rho = eq->eq.strat.eval(z);
        if (rho1) *rho1 = eq->eq.strat.d1(z);
    });
}

ss_status ss_equilibrium_alpha(const ss_equilibrium* eq, double* alpha) {
    return guard([&] {
        if (!eq || !alpha) throw Error(Err::InvalidArgument, "null argument");
        *alpha = eq->eq.alpha;
    });
}

ss_status ss_richardson(const ss_equilibrium* eq, double z, double* ri) {
    return guard([&] {
        if (!eq || !ri) throw Error(Err::InvalidArgument, "null argument");
        *ri = eq->eq.richardson(z);
    });
}

ss_status ss_miles_howard(const ss_equilibrium* eq, int n_samples,
                          ss_richardson_report* report, double* z_buf, double* ri_buf,
                          size_t buf_cap, size_t* buf_count) {
    return guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        const RichardsonReport rep = miles_howard_check(eq->eq, n_samples);
        if (report) {
            report->min_ri = rep.min_ri;
            report->argmin_z = rep.argmin_z;
            report->satisfied = rep.miles_howard_satisfied ? 1 : 0;
        }
        if (buf_count) *buf_count = rep.samples.size();
        if (z_buf && ri_buf) {
            const size_t n = std::min(buf_cap, rep.samples.size());
            for (size_t i = 0; i < n; ++i) {
                z_buf[i] = rep.samples[i].first;
                ri_buf[i] = rep.samples[i].second;
            }
        }
    });
}

ss_status ss_d_alpha(const ss_equilibrium* eq, double re_c, double im_c, double z,
                     double* re_out, double* im_out) {
    return guard([&] {
        if (!eq || !re_out || !im_out) throw Error(Err::InvalidArgument, "null argument");
        DispersionQuery q;
        q.eq = eq->eq;
        q.c = {re_c, im_c};
        const cplx v = d_alpha(q, z);
        *re_out = v.real();
        *im_out = v.imag();
    });
}

ss_status ss_dispersion_value(const ss_equilibrium* eq, double re_c, double im_c,
                              double kappa, double tol, ss_dispersion_result* out) {
    return guard([&] {
        if (!eq || !out) throw Error(Err::InvalidArgument, "null argument");
        DispersionQuery q;
        q.eq = eq->eq;
        q.c = {re_c, im_c};
        q.kappa = kappa;
        const NeumannSolution sol = solve_neumann(q, tol);
        const DispersionValue dv = dispersion_value(q, tol);
        out->re = dv.value.real();
        out->im = dv.value.imag();
        out->estimated_error = dv.estimated_error;
        out->terms_used = sol.terms_used;
        out->fixed_point_residual = sol.fixed_point_residual;
        out->contraction_estimate = sol.contraction_estimate;
    });
}

ss_status ss_shoot_tg(const ss_equilibrium* eq, double re_c, double im_c, double kappa,
                      int nsteps, double* re_out, double* im_out) {
    return guard([&] {
        if (!eq || !re_out || !im_out) throw Error(Err::InvalidArgument, "null argument");
        DispersionQuery q;
        q.eq = eq->eq;
        q.c = {re_c, im_c};
        q.kappa = kappa;
        const cplx v = shoot_tg(q, nsteps > 0 ? nsteps : 4096);
        *re_out = v.real();
        *im_out = v.imag();
    });
}

ss_status ss_nyquist_f(const ss_equilibrium* eq, double re_c, double im_c,
                       double* re_out, double* im_out) {
    return guard([&] {
        if (!eq || !re_out || !im_out) throw Error(Err::InvalidArgument, "null argument");
        const cplx v = nyquist_F({re_c, im_c}, eq->eq.shear);
        *re_out = v.real();
        *im_out = v.imag();
    });
}

ss_status ss_operator_norm_bound(const ss_equilibrium* eq, double im_c, double* out) {
    return guard([&] {
        if (!eq || !out) throw Error(Err::InvalidArgument, "null argument");
        DispersionQuery q;
        q.eq = eq->eq;
        q.c = {0.0, im_c};
        *out = operator_norm_bound(q);
    });
}

ss_status ss_exclusion_radius(const ss_equilibrium* eq, double* radius) {
    return guard([&] {
        if (!eq || !radius) throw Error(Err::InvalidArgument, "null argument");
        *radius = exclusion_radius(eq->eq.shear);
    });
}

ss_status ss_nyquist_winding(const ss_equilibrium* eq, double eps, double radius,
                             ss_winding_report* report, double* trace5_buf,
                             size_t trace_cap_rows, size_t* trace_rows) {
    return guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        const ShearProfile& sh = eq->eq.shear;
        HalfDiskContour hd;
        hd.eps = eps;
        hd.radius = radius;
        const WindingReport rep = winding_number(
            [&sh](cplx c) { return nyquist_F(c, sh, 1e-11); }, hd);
        if (report) {
            report->winding = rep.winding;
            report->max_phase_step = rep.max_phase_step;
        }
        if (trace_rows) *trace_rows = rep.samples.size();
        if (trace5_buf) {
            const size_t n = std::min(trace_cap_rows, rep.samples.size());
            double phase = 0.0;
            for (size_t i = 0; i < n; ++i) {
                if (i > 0)
                    phase += std::arg(rep.samples[i].second / rep.samples[i - 1].second);
                trace5_buf[5 * i + 0] = rep.samples[i].first.real();
                trace5_buf[5 * i + 1] = rep.samples[i].first.imag();
                trace5_buf[5 * i + 2] = rep.samples[i].second.real();
                trace5_buf[5 * i + 3] = rep.samples[i].second.imag();
                trace5_buf[5 * i + 4] = phase;
            }
        }
    });
}

ss_status ss_plemelj_scan(const ss_equilibrium* eq, double eps, ss_plemelj_report* out) {
    return guard([&] {
        if (!eq || !out) throw Error(Err::InvalidArgument, "null argument");
        const PlemeljReport rep = plemelj_scan(eq->eq.shear, eps);
        out->sign_changes = rep.sign_changes;
        out->crossing = rep.crossing;
        out->slope_at_crossing = rep.slope_at_crossing;
        out->upward = rep.upward ? 1 : 0;
        out->segment_halfwidth = rep.segment_halfwidth;
    });
}

ss_status ss_find_dispersion_zeros(const ss_equilibrium* eq, double kappa,
                                   ss_method method, double eps_floor, double tol,
                                   ss_zero* buf, size_t cap, size_t* count) {
    return guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        const DispersionZeros dz = find_dispersion_zeros(
            eq->eq, kappa,
            method == SS_METHOD_NEUMANN ? ZeroMethod::Neumann : ZeroMethod::Shooting,
            eps_floor, tol);
        fill_zeros(dz.zeros, eq->eq, buf, cap, count);
    });
}

ss_status ss_find_nyquist_zeros(const ss_equilibrium* eq, double eps_floor, double tol,
                                ss_zero* buf, size_t cap, size_t* count) {
    return guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        const ShearProfile& sh = eq->eq.shear;
        const double R = exclusion_radius(sh);
        const Rect region{-R, R, eps_floor, R};
        const std::vector<Zero> zs = find_zeros(
            [&sh](cplx c) { return nyquist_F(c, sh, 1e-11); }, region, tol);
        fill_zeros(zs, eq->eq, buf, cap, count);
    });
}

ss_status ss_gamma0(const ss_equilibrium* eq, double eps_floor, double* out) {
    return guard([&] {
        if (!eq || !out) throw Error(Err::InvalidArgument, "null argument");
        *out = gamma0(eq->eq, eps_floor);
    });
}

ss_status ss_mode_compute(const ss_equilibrium* eq, ss_method source, int k,
                          double kappa, double re_c, double im_c, int n_interior,
                          ss_mode** out) {
    return guard([&] {
        if (!eq || !out) throw Error(Err::InvalidArgument, "null argument");
        DispersionQuery q;
        q.eq = eq->eq;
        q.c = {re_c, im_c};
        q.kappa = kappa;
        Zero z;
        z.c = q.c;
        *out = new ss_mode{reconstruct_mode(
            z, k, q, n_interior,
            source == SS_METHOD_NEUMANN ? ZeroMethod::Neumann : ZeroMethod::Shooting)};
    });
}

void ss_mode_free(ss_mode* m) { delete m; }

ss_status ss_mode_info(const ss_mode* m, int* k, double* kappa, double* sigma,
                       double* re_c, double* im_c, int* n_interior) {
    return guard([&] {
        if (!m) throw Error(Err::InvalidArgument, "null mode");
        if (k) *k = m->m.k;
        if (kappa) *kappa = m->m.kappa;
        if (sigma) *sigma = m->m.sigma;
        if (re_c) *re_c = m->m.c.real();
        if (im_c) *im_c = m->m.c.imag();
        if (n_interior) *n_interior = m->m.grid.n;
    });
}

ss_status ss_mode_arrays(const ss_mode* m, double* z, double* re_phi, double* im_phi,
                         double* re_r, double* im_r, double* re_w, double* im_w) {
    return guard([&] {
        if (!m) throw Error(Err::InvalidArgument, "null mode");
        for (int j = 0; j < m->m.grid.n; ++j) {
            if (z) z[j] = m->m.grid.nodes[j];
            if (re_phi) re_phi[j] = m->m.phi[j].real();
            if (im_phi) im_phi[j] = m->m.phi[j].imag();
            if (re_r) re_r[j] = m->m.r[j].real();
            if (im_r) im_r[j] = m->m.r[j].imag();
            if (re_w) re_w[j] = m->m.w[j].real();
            if (im_w) im_w[j] = m->m.w[j].imag();
        }
    });
}

ss_status ss_mode_residual(const ss_mode* m, const ss_equilibrium* eq,
                           double* tg_residual, double* bc_defect) {
    return guard([&] {
        if (!m || !eq) throw Error(Err::InvalidArgument, "null argument");
        const ModeResidualReport rep = mode_residual(m->m, eq->eq);
        if (tg_residual) *tg_residual = rep.tg_residual;
        if (bc_defect) *bc_defect = rep.bc_defect;
    });
}

ss_status ss_dominant_growth(const ss_equilibrium* eq, int k, double kappa,
                             int n_interior, double dt, double t_horizon,
                             uint64_t seed, double* growth) {
    return guard([&] {
        if (!eq || !growth) throw Error(Err::InvalidArgument, "null argument");
        Grid1D g(n_interior);
        *growth = dominant_growth(k, kappa, eq->eq, g, dt, t_horizon, seed);
    });
}

ss_status ss_linear_growth(const ss_equilibrium* eq, int k, double kappa,
                           ss_linear_model model, int n_interior, double dt,
                           double t_end, uint64_t seed, ss_growth_fit* fit,
                           double* t_buf, double* norm_buf, size_t cap,
                           size_t* count) {
    ss_status sub = SS_OK;
    const ss_status st = guard([&] {
        if (!eq) throw Error(Err::InvalidArgument, "null equilibrium");
        const GrowthSeries gs = linear_growth_series(
            eq->eq, k, kappa,
            model == SS_MODEL_HYDROSTATIC ? LinearModel::Hydrostatic
                                          : LinearModel::Boussinesq,
            n_interior, dt, t_end, seed);
        if (fit) {
            fit->fitted_sigma = gs.fitted_sigma;
            fit->fit_r2 = gs.fit_r2;
            fit->window_lo = gs.fit_window_lo;
            fit->window_hi = gs.fit_window_hi;
        }
        sub = fill_series(gs, t_buf, norm_buf, cap, count);
    });
    return st != SS_OK ? st : sub;
}

ss_status ss_instability_time(const ss_equilibrium* eq, const ss_mode* mode, double M,
                              double delta, double m, int nx, int nz, double dt,
                              double Lambda, ss_instability_result* out, double* t_buf,
                              double* norm_buf, size_t cap, size_t* count) {
    ss_status sub = SS_OK;
    const ss_status st = guard([&] {
        if (!eq || !mode || !out) throw Error(Err::InvalidArgument, "null argument");
        if (mode->m.grid.n != nz)
            throw Error(Err::InvalidArgument,
                        "instability_time: mode grid does not match nz");
        GrowingModeView view{mode->m.k, &mode->m.r, &mode->m.w};
        const InstabilityResult res =
            instability_time(eq->eq, M, view, delta, m, nx, nz, dt, Lambda);
        out->reached = res.reached ? 1 : 0;
        out->T = res.T;
        out->fit.fitted_sigma = res.series.fitted_sigma;
        out->fit.fit_r2 = res.series.fit_r2;
        out->fit.window_lo = res.series.fit_window_lo;
        out->fit.window_hi = res.series.fit_window_hi;
        sub = fill_series(res.series, t_buf, norm_buf, cap, count);
        if (sub == SS_OK && !res.reached)
            throw Error(Err::NoBlowupWithinBudget,
                        "instability_time: threshold not reached within budget");
    });
    return st != SS_OK ? st : sub;
}

ss_status ss_grenier_rates(const ss_equilibrium* eq, const ss_mode* mode, double M,
                           int nx, int nz, double dt, ss_grenier_result* out) {
    return guard([&] {
        if (!eq || !mode || !out) throw Error(Err::InvalidArgument, "null argument");
        if (mode->m.grid.n != nz)
            throw Error(Err::InvalidArgument, "grenier_rates: mode grid != nz");
        GrowingModeView view{mode->m.k, &mode->m.r, &mode->m.w};
        const cplx lambda = cplx(0.0, -1.0) * (mode->m.k / M) * mode->m.c;
        const auto trs = grenier_iterates(eq->eq, M, view, lambda, nx, nz, dt);
        out->rate2 = trs[0].fitted_rate;
        out->r2_2 = trs[0].fit_r2;
        out->rate3 = trs[1].fitted_rate;
        out->r2_3 = trs[1].fit_r2;
    });
}

}  // extern "C"
