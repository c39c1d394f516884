#include "evolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"
#include "fft.hpp"

namespace stratstab {

Grid1D::Grid1D(int n_interior) : n(n_interior), h(2.0 / (n_interior + 1)) {
    if (n_interior < 1) throw Error(Err::InvalidArgument, "Grid1D: n < 1");
    nodes.resize(n);
    for (int j = 0; j < n; ++j) nodes[j] = -1.0 + (j + 1) * h;
}

double ModeState::l2_norm(double h) const {
    double s = 0.0;
    for (const cplx& x : rho_hat) s += std::norm(x);
    for (const cplx& x : omega_hat) s += std::norm(x);
    return std::sqrt(h * s);
}

namespace {

// Thomas solve of (phi_{j-1} - (2 + kappa^2 h^2) phi_j + phi_{j+1})/h^2 = om_j
void tridiag_dirichlet(const std::vector<cplx>& om, double kappa, double h,
                       std::vector<cplx>& phi) {
    const int n = static_cast<int>(om.size());
    phi.resize(n);
    const double off = 1.0 / (h * h);
    const double diag = -2.0 / (h * h) - kappa * kappa;
    static thread_local std::vector<double> cp;
    static thread_local std::vector<cplx> dp;
    cp.resize(n);
    dp.resize(n);
    cp[0] = off / diag;
    dp[0] = om[0] / diag;
    for (int i = 1; i < n; ++i) {
        const double m = diag - off * cp[i - 1];
        cp[i] = off / m;
        dp[i] = (om[i] - off * dp[i - 1]) / m;
    }
    phi[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) phi[i] = dp[i] - cp[i] * phi[i + 1];
}

double gaussian(std::mt19937_64& rng) {
    // Box-Muller on the generator's well-defined uniform output
    const double u1 = (rng() >> 11) * (1.0 / 9007199254740992.0);
    const double u2 = (rng() >> 11) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

void poisson_full(const std::vector<cplx>& omega, double kappa, const Grid1D& g,
                  std::vector<cplx>& phi) {
    tridiag_dirichlet(omega, kappa, g.h, phi);
}

void poisson_hydro(const std::vector<cplx>& omega, const Grid1D& g,
                   std::vector<cplx>& phi) {
    poisson_full(omega, 0.0, g, phi);
}

LinearStepper::LinearStepper(const StratifiedEquilibrium& eq, const Grid1D& grid,
                             int k, double kappa, LinearModel model)
    : grid_(grid), k_(k), kappa_(kappa), model_(model) {
    const int n = grid_.n;
    us_.resize(n);
    us2_.resize(n);
    rhop_.resize(n);
    for (int j = 0; j < n; ++j) {
        const double z = grid_.nodes[j];
        us_[j] = eq.shear.eval(z);
        us2_[j] = eq.shear.d2(z);
        rhop_[j] = eq.strat.d1(z);
    }
}

void LinearStepper::rhs(const std::vector<cplx>& rho, const std::vector<cplx>& om,
                        std::vector<cplx>& drho, std::vector<cplx>& dom) const {
    const int n = grid_.n;
    drho.resize(n);
    dom.resize(n);
    const cplx ik(0.0, static_cast<double>(k_));
    if (transport_only_) {
        for (int j = 0; j < n; ++j) {
            drho[j] = -ik * us_[j] * rho[j];
            dom[j] = -ik * us_[j] * om[j] + ik * rho[j];
        }
        return;
    }
    static thread_local std::vector<cplx> phi;
    if (model_ == LinearModel::Hydrostatic)
        poisson_hydro(om, grid_, phi);
    else
        poisson_full(om, kappa_, grid_, phi);
    for (int j = 0; j < n; ++j) {
        drho[j] = ik * (-us_[j] * rho[j] + rhop_[j] * phi[j]);
        dom[j] = ik * (-us_[j] * om[j] + us2_[j] * phi[j] + rho[j]);
    }
}

void LinearStepper::step(ModeState& s, double dt) const {
    const int n = grid_.n;
    std::vector<cplx> k1r, k1o, k2r, k2o, k3r, k3o, k4r, k4o, tr(n), to(n);
    rhs(s.rho_hat, s.omega_hat, k1r, k1o);
    for (int j = 0; j < n; ++j) {
        tr[j] = s.rho_hat[j] + 0.5 * dt * k1r[j];
        to[j] = s.omega_hat[j] + 0.5 * dt * k1o[j];
    }
    rhs(tr, to, k2r, k2o);
    for (int j = 0; j < n; ++j) {
        tr[j] = s.rho_hat[j] + 0.5 * dt * k2r[j];
        to[j] = s.omega_hat[j] + 0.5 * dt * k2o[j];
    }
    rhs(tr, to, k3r, k3o);
    for (int j = 0; j < n; ++j) {
        tr[j] = s.rho_hat[j] + dt * k3r[j];
        to[j] = s.omega_hat[j] + dt * k3o[j];
    }
    rhs(tr, to, k4r, k4o);
    for (int j = 0; j < n; ++j) {
        s.rho_hat[j] += dt / 6.0 * (k1r[j] + 2.0 * k2r[j] + 2.0 * k3r[j] + k4r[j]);
        s.omega_hat[j] += dt / 6.0 * (k1o[j] + 2.0 * k2o[j] + 2.0 * k3o[j] + k4o[j]);
    }
    s.t += dt;
}

ModeState step_linear(const ModeState& s, const StratifiedEquilibrium& eq, double dt,
                      LinearModel model) {
    if (!(dt > 0.0)) throw Error(Err::InvalidArgument, "step_linear: dt <= 0");
    Grid1D g(static_cast<int>(s.rho_hat.size()));
    LinearStepper st(eq, g, s.k, s.kappa, model);
    ModeState out = s;
    st.step(out, dt);
    return out;
}

ModeState transport_exact(const ModeState& s, double t, const StratifiedEquilibrium& eq) {
    ModeState out = s;
    const int n = static_cast<int>(s.rho_hat.size());
    Grid1D g(n);
    const cplx ik(0.0, static_cast<double>(s.k));
    for (int j = 0; j < n; ++j) {
        const cplx ph = std::exp(-ik * t * eq.shear.eval(g.nodes[j]));
        out.rho_hat[j] = ph * s.rho_hat[j];
        out.omega_hat[j] = ph * (s.omega_hat[j] + ik * t * s.rho_hat[j]);
    }
    out.t = s.t + t;
    return out;
}

void fit_log_slope(GrowthSeries& gs, double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int m = 0;
    for (size_t i = 0; i < gs.times.size(); ++i) {
        if (gs.times[i] < t_lo || gs.times[i] > t_hi || gs.norms[i] <= 0.0) continue;
        const double x = gs.times[i], y = std::log(gs.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++m;
    }
    gs.fit_window_lo = t_lo;
    gs.fit_window_hi = t_hi;
    if (m < 3) {
        gs.fitted_sigma = 0.0;
        gs.fit_r2 = 0.0;
        return;
    }
    const double det = m * sxx - sx * sx;
    gs.fitted_sigma = (m * sxy - sx * sy) / det;
    const double b = (sy - gs.fitted_sigma * sx) / m;
    double ssres = 0.0, sstot = 0.0;
    const double ybar = sy / m;
    for (size_t i = 0; i < gs.times.size(); ++i) {
        if (gs.times[i] < t_lo || gs.times[i] > t_hi || gs.norms[i] <= 0.0) continue;
        const double y = std::log(gs.norms[i]);
        const double yh = gs.fitted_sigma * gs.times[i] + b;
        ssres += (y - yh) * (y - yh);
        sstot += (y - ybar) * (y - ybar);
    }
    gs.fit_r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 0.0;
}

GrowthSeries linear_growth_series(const StratifiedEquilibrium& eq, int k, double kappa,
                                  LinearModel model, int n, double dt, double t_end,
                                  std::uint64_t seed) {
    Grid1D g(n);
    LinearStepper st(eq, g, k, kappa, model);
    ModeState s;
    s.k = k;
    s.kappa = kappa;
    s.rho_hat.resize(n);
    s.omega_hat.resize(n);
    std::mt19937_64 rng(seed);
    for (int j = 0; j < n; ++j) {
        s.rho_hat[j] = cplx(gaussian(rng), gaussian(rng));
        s.omega_hat[j] = cplx(gaussian(rng), gaussian(rng));
    }
    GrowthSeries gs;
    const int nsteps = static_cast<int>(std::llround(t_end / dt));
    const int stride = std::max(1, static_cast<int>(std::llround(0.05 / dt)));
    gs.times.push_back(0.0);
    gs.norms.push_back(s.l2_norm(g.h));
    for (int i = 1; i <= nsteps; ++i) {
        st.step(s, dt);
        if (i % stride == 0 || i == nsteps) {
            gs.times.push_back(s.t);
            gs.norms.push_back(s.l2_norm(g.h));
        }
    }
    fit_log_slope(gs, 0.5 * t_end, t_end);
    return gs;
}

// ---------------------------------------------------------------------------
// 2D pseudo-spectral machinery
// ---------------------------------------------------------------------------

namespace {

struct RowFFT {
    // spec coefficients c_k <-> physical samples f_m = sum_k c_k e^{2pi i k m/n}
    static void to_phys(cplx* row, int n) { fft(row, n, +1); }
    static void to_spec(cplx* row, int n) {
        fft(row, n, -1);
        const double s = 1.0 / n;
        for (int i = 0; i < n; ++i) row[i] *= s;
    }
};

inline int wavenumber(int k, int nx) { return k <= nx / 2 ? k : k - nx; }

}  // namespace

NonlinearStepper::NonlinearStepper(const StratifiedEquilibrium& eq, int nx, int nz,
                                   double M)
    : grid_(nz), nx_(nx), M_(M) {
    if (nx & (nx - 1))
        throw Error(Err::InvalidArgument, "NonlinearStepper: nx must be a power of two");
    rho_s_.resize(nz);
    om_s_.resize(nz);
    for (int j = 0; j < nz; ++j) {
        rho_s_[j] = eq.strat.eval(grid_.nodes[j]);
        om_s_[j] = eq.shear.d1(grid_.nodes[j]);
    }
    dealias_cut_ = nx / 3;
}

Fields2D NonlinearStepper::equilibrium() const {
    Fields2D f;
    f.rho.nx = f.omega.nx = nx_;
    f.rho.nz = f.omega.nz = grid_.n;
    f.rho.M = f.omega.M = M_;
    f.rho.spec.assign(static_cast<size_t>(nx_) * grid_.n, 0.0);
    f.omega.spec.assign(static_cast<size_t>(nx_) * grid_.n, 0.0);
    for (int j = 0; j < grid_.n; ++j) {
        f.rho.at(j, 0) = rho_s_[j];
        f.omega.at(j, 0) = om_s_[j];
    }
    return f;
}

void NonlinearStepper::velocities(const Field2D& omega, Field2D& u, Field2D& v) const {
    const int nz = grid_.n;
    u = omega;
    v = omega;
    std::vector<cplx> col(nz), phi(nz);
    for (int k = 0; k < nx_; ++k) {
        const double kap = wavenumber(k, nx_) / M_;
        for (int j = 0; j < nz; ++j) col[j] = omega.at(j, k);
        tridiag_dirichlet(col, std::abs(kap), grid_.h, phi);
        const cplx ikap(0.0, kap);
        for (int j = 0; j < nz; ++j) {
            const cplx below = j > 0 ? phi[j - 1] : cplx(0.0);  // phi(-1) = 0
            const cplx above = j < nz - 1 ? phi[j + 1] : cplx(0.0);
            u.at(j, k) = (above - below) / (2.0 * grid_.h);
            v.at(j, k) = -ikap * phi[j];
        }
    }
}

double NonlinearStepper::cfl_limit(const Fields2D& f) const {
    Field2D u, v;
    velocities(f.omega, u, v);
    const int nz = grid_.n;
    std::vector<cplx> row(nx_);
    double umax = 0.0, vmax = 0.0;
    for (int j = 0; j < nz; ++j) {
        for (int k = 0; k < nx_; ++k) row[k] = u.at(j, k);
        RowFFT::to_phys(row.data(), nx_);
        for (int k = 0; k < nx_; ++k) umax = std::max(umax, std::abs(row[k].real()));
        for (int k = 0; k < nx_; ++k) row[k] = v.at(j, k);
        RowFFT::to_phys(row.data(), nx_);
        for (int k = 0; k < nx_; ++k) vmax = std::max(vmax, std::abs(row[k].real()));
    }
    const double dx = 2.0 * 3.141592653589793238462643383279502884 * M_ / nx_;
    const double lim_x = umax > 0.0 ? 0.5 * dx / umax : 1e30;
    const double lim_z = vmax > 0.0 ? 0.5 * grid_.h / vmax : 1e30;
    return std::min(lim_x, lim_z);
}

void NonlinearStepper::rhs(const Fields2D& f, Fields2D& out) const {
    const int nz = grid_.n;
    const double h = grid_.h;
    Field2D u, v;
    velocities(f.omega, u, v);

    out = f;
    auto& orho = out.rho.spec;
    auto& oom = out.omega.spec;
    std::fill(orho.begin(), orho.end(), cplx(0.0));
    std::fill(oom.begin(), oom.end(), cplx(0.0));

    // x-derivatives (spectral) and z-derivatives (FD, one-sided at walls)
    Field2D rx = f.rho, wx = f.omega, rz = f.rho, wz = f.omega;
    for (int j = 0; j < nz; ++j)
        for (int k = 0; k < nx_; ++k) {
            const cplx ikap(0.0, wavenumber(k, nx_) / M_);
            rx.at(j, k) = ikap * f.rho.at(j, k);
            wx.at(j, k) = ikap * f.omega.at(j, k);
        }
    auto dz = [&](const Field2D& a, Field2D& da) {
        for (int k = 0; k < nx_; ++k) {
            for (int j = 0; j < nz; ++j) {
                cplx d;
                if (j == 0)
                    d = (-3.0 * a.at(0, k) + 4.0 * a.at(1, k) - a.at(2, k)) / (2.0 * h);
                else if (j == nz - 1)
                    d = (3.0 * a.at(j, k) - 4.0 * a.at(j - 1, k) + a.at(j - 2, k)) /
                        (2.0 * h);
                else
                    d = (a.at(j + 1, k) - a.at(j - 1, k)) / (2.0 * h);
                da.at(j, k) = d;
            }
        }
    };
    dz(f.rho, rz);
    dz(f.omega, wz);

    // physical products per z-level, then back to spectral with dealiasing
    std::vector<cplx> ur(nx_), vr(nx_), ar(nx_), br(nx_), cr(nx_), dr(nx_), p1(nx_),
        p2(nx_);
    for (int j = 0; j < nz; ++j) {
        for (int k = 0; k < nx_; ++k) {
            ur[k] = u.at(j, k);
            vr[k] = v.at(j, k);
            ar[k] = rx.at(j, k);
            br[k] = rz.at(j, k);
            cr[k] = wx.at(j, k);
            dr[k] = wz.at(j, k);
        }
        RowFFT::to_phys(ur.data(), nx_);
        RowFFT::to_phys(vr.data(), nx_);
        RowFFT::to_phys(ar.data(), nx_);
        RowFFT::to_phys(br.data(), nx_);
        RowFFT::to_phys(cr.data(), nx_);
        RowFFT::to_phys(dr.data(), nx_);
        for (int k = 0; k < nx_; ++k) {
            p1[k] = -(ur[k] * ar[k] + vr[k] * br[k]);
            p2[k] = -(ur[k] * cr[k] + vr[k] * dr[k]);
        }
        RowFFT::to_spec(p1.data(), nx_);
        RowFFT::to_spec(p2.data(), nx_);
        for (int k = 0; k < nx_; ++k) {
            if (std::abs(wavenumber(k, nx_)) > dealias_cut_) continue;
            out.rho.at(j, k) = p1[k];
            out.omega.at(j, k) = p2[k] + rx.at(j, k);  // buoyancy source d_x rho
        }
    }
}

void NonlinearStepper::step(Fields2D& f, double dt) const {
    const double lim = cfl_limit(f);
    if (dt > lim)
        throw Error(Err::CflViolation, "step_nonlinear: dt exceeds 0.5 CFL limit");
    Fields2D k1, k2, k3, k4, tmp;
    rhs(f, k1);
    tmp = f;
    for (size_t i = 0; i < f.rho.spec.size(); ++i) {
        tmp.rho.spec[i] = f.rho.spec[i] + 0.5 * dt * k1.rho.spec[i];
        tmp.omega.spec[i] = f.omega.spec[i] + 0.5 * dt * k1.omega.spec[i];
    }
    rhs(tmp, k2);
    for (size_t i = 0; i < f.rho.spec.size(); ++i) {
        tmp.rho.spec[i] = f.rho.spec[i] + 0.5 * dt * k2.rho.spec[i];
        tmp.omega.spec[i] = f.omega.spec[i] + 0.5 * dt * k2.omega.spec[i];
    }
    rhs(tmp, k3);
    for (size_t i = 0; i < f.rho.spec.size(); ++i) {
        tmp.rho.spec[i] = f.rho.spec[i] + dt * k3.rho.spec[i];
        tmp.omega.spec[i] = f.omega.spec[i] + dt * k3.omega.spec[i];
    }
    rhs(tmp, k4);
    for (size_t i = 0; i < f.rho.spec.size(); ++i) {
        f.rho.spec[i] += dt / 6.0 *
                         (k1.rho.spec[i] + 2.0 * k2.rho.spec[i] + 2.0 * k3.rho.spec[i] +
                          k4.rho.spec[i]);
        f.omega.spec[i] += dt / 6.0 *
                           (k1.omega.spec[i] + 2.0 * k2.omega.spec[i] +
                            2.0 * k3.omega.spec[i] + k4.omega.spec[i]);
    }
    f.rho.t += dt;
    f.omega.t += dt;
}

double NonlinearStepper::deviation_norm(const Fields2D& f) const {
    const int nz = grid_.n;
    const double L = 2.0 * 3.141592653589793238462643383279502884 * M_;
    double s = 0.0;
    for (int j = 0; j < nz; ++j)
        for (int k = 0; k < nx_; ++k) {
            cplx dr = f.rho.at(j, k);
            cplx dw = f.omega.at(j, k);
            if (k == 0) {
                dr -= rho_s_[j];
                dw -= om_s_[j];
            }
            s += std::norm(dr) + std::norm(dw);
        }
    return std::sqrt(L * grid_.h * s);
}

double NonlinearStepper::mean_rho(const Fields2D& f) const {
    const double L = 2.0 * 3.141592653589793238462643383279502884 * M_;
    double s = 0.0;
    for (int j = 0; j < grid_.n; ++j) s += f.rho.at(j, 0).real();
    return L * grid_.h * s;
}

InstabilityResult instability_time(const StratifiedEquilibrium& eq, double M,
                                   const GrowingModeView& mode, double delta, double m,
                                   int nx, int nz, double dt, double Lambda) {
    NonlinearStepper st(eq, nx, nz, M);
    Fields2D f = st.equilibrium();
    const int kc = mode.k;
    if (kc <= 0 || kc >= nx / 2)
        throw Error(Err::InvalidArgument, "instability_time: mode index out of range");
    // real perturbation Re(amp e^{i k x / M}) split over the +-k coefficients
    Fields2D pert = f;
    std::fill(pert.rho.spec.begin(), pert.rho.spec.end(), cplx(0.0));
    std::fill(pert.omega.spec.begin(), pert.omega.spec.end(), cplx(0.0));
    for (int j = 0; j < nz; ++j) {
        pert.rho.at(j, kc) = 0.5 * (*mode.r)[j];
        pert.rho.at(j, nx - kc) = 0.5 * std::conj((*mode.r)[j]);
        pert.omega.at(j, kc) = 0.5 * (*mode.w)[j];
        pert.omega.at(j, nx - kc) = 0.5 * std::conj((*mode.w)[j]);
    }
    const double pn = st.deviation_norm([&] {
        Fields2D t = st.equilibrium();
        for (size_t i = 0; i < t.rho.spec.size(); ++i) {
            t.rho.spec[i] += pert.rho.spec[i];
            t.omega.spec[i] += pert.omega.spec[i];
        }
        return t;
    }());
    const double scale = delta / pn;
    for (size_t i = 0; i < f.rho.spec.size(); ++i) {
        f.rho.spec[i] += scale * pert.rho.spec[i];
        f.omega.spec[i] += scale * pert.omega.spec[i];
    }

    InstabilityResult res;
    double dev = st.deviation_norm(f);
    if (dev >= m) {  // threshold already crossed at t = 0
        res.reached = true;
        res.T = 0.0;
        res.series.times.push_back(0.0);
        res.series.norms.push_back(dev);
        return res;
    }
    res.series.times.push_back(0.0);
    res.series.norms.push_back(dev);
    const double t_budget = 10.0 * std::abs(std::log(delta)) / std::max(Lambda, 1e-12);
    const long max_steps = std::lround(std::ceil(t_budget / dt));
    double prev_dev = dev, prev_t = 0.0;
    for (long i = 1; i <= max_steps; ++i) {
        st.step(f, dt);
        dev = st.deviation_norm(f);
        res.series.times.push_back(f.rho.t);
        res.series.norms.push_back(dev);
        if (dev >= m) {
            const double frac = (m - prev_dev) / (dev - prev_dev);
            res.T = prev_t + frac * (f.rho.t - prev_t);
            res.reached = true;
            break;
        }
        prev_dev = dev;
        prev_t = f.rho.t;
    }
    // fit the exponential phase: clear of the start, clear of saturation
    double t_lo = 0.0, t_hi = res.series.times.back();
    for (size_t i = 0; i < res.series.norms.size(); ++i)
        if (res.series.norms[i] >= 3.0 * delta) {
            t_lo = res.series.times[i];
            break;
        }
    for (size_t i = 0; i < res.series.norms.size(); ++i)
        if (res.series.norms[i] >= m / 3.0) {
            t_hi = res.series.times[i];
            break;
        }
    if (t_hi <= t_lo) {
        t_lo = 0.1 * res.series.times.back();
        t_hi = 0.9 * res.series.times.back();
    }
    fit_log_slope(res.series, t_lo, t_hi);
    return res;
}

// ---------------------------------------------------------------------------
// Grenier iterates
// ---------------------------------------------------------------------------

namespace {

struct Pair2D {
    Field2D rho, omega;
};

void axpy(Pair2D& y, double a, const Pair2D& x) {
    for (size_t i = 0; i < y.rho.spec.size(); ++i) {
        y.rho.spec[i] += a * x.rho.spec[i];
        y.omega.spec[i] += a * x.omega.spec[i];
    }
}

}  // namespace

class GrenierRun {
public:
    GrenierRun(const StratifiedEquilibrium& eq, double M, const GrowingModeView& mode,
               cplx lambda, int nx, int nz)
        : st_(eq, nx, nz, M), eq_(eq), M_(M), nx_(nx), nz_(nz), kc_(mode.k),
          lambda_(lambda) {
        us_.resize(nz);
        us2_.resize(nz);
        rhop_.resize(nz);
        for (int j = 0; j < nz; ++j) {
            const double z = st_.grid().nodes[j];
            us_[j] = eq.shear.eval(z);
            us2_[j] = eq.shear.d2(z);
            rhop_[j] = eq.strat.d1(z);
        }
        r_ = *mode.r;
        w_ = *mode.w;
    }

    Pair2D zero_pair() const {
        Pair2D p;
        p.rho.nx = p.omega.nx = nx_;
        p.rho.nz = p.omega.nz = nz_;
        p.rho.M = p.omega.M = M_;
        p.rho.spec.assign(static_cast<size_t>(nx_) * nz_, 0.0);
        p.omega.spec.assign(static_cast<size_t>(nx_) * nz_, 0.0);
        return p;
    }

    // closed-form first iterate Z_1(t) = Re(e^{lambda t} Z_eig e^{ikx/M})
    Pair2D z1(double t) const {
        Pair2D p = zero_pair();
        const cplx g = std::exp(lambda_ * t);
        for (int j = 0; j < nz_; ++j) {
            p.rho.at(j, kc_) = 0.5 * g * r_[j];
            p.rho.at(j, nx_ - kc_) = std::conj(p.rho.at(j, kc_));
            p.omega.at(j, kc_) = 0.5 * g * w_[j];
            p.omega.at(j, nx_ - kc_) = std::conj(p.omega.at(j, kc_));
        }
        return p;
    }

    // linearized operator about the equilibrium, physical torus convention
    void linear_rhs(const Pair2D& z, Pair2D& out) const {
        out = zero_pair();
        std::vector<cplx> col(nz_), phi(nz_);
        for (int k = 0; k < nx_; ++k) {
            const double kap = wavenumber(k, nx_) / M_;
            if (kap == 0.0) continue;  // B vanishes on the x-mean
            for (int j = 0; j < nz_; ++j) col[j] = z.omega.at(j, k);
            tridiag_dirichlet(col, std::abs(kap), st_.grid().h, phi);
            const cplx ikap(0.0, kap);
            for (int j = 0; j < nz_; ++j) {
                out.rho.at(j, k) =
                    ikap * (-us_[j] * z.rho.at(j, k) + rhop_[j] * phi[j]);
                out.omega.at(j, k) = ikap * (-us_[j] * z.omega.at(j, k) +
                                             us2_[j] * phi[j] + z.rho.at(j, k));
            }
        }
    }

    // advection forcing N(A,B) = (W[omega_A] . grad rho_B, W[omega_A] . grad omega_B)
    void advection(const Pair2D& A, const Pair2D& B, Pair2D& out) const {
        const Fields2D fb{B.rho, B.omega};
        Field2D u, v;
        st_.velocities(A.omega, u, v);
        out = zero_pair();
        const int nz = nz_;
        const double h = st_.grid().h;
        Field2D rx = fb.rho, wx = fb.omega, rz = fb.rho, wz = fb.omega;
        for (int j = 0; j < nz; ++j)
            for (int k = 0; k < nx_; ++k) {
                const cplx ikap(0.0, wavenumber(k, nx_) / M_);
                rx.at(j, k) = ikap * fb.rho.at(j, k);
                wx.at(j, k) = ikap * fb.omega.at(j, k);
            }
        for (int k = 0; k < nx_; ++k)
            for (int j = 0; j < nz; ++j) {
                auto d1 = [&](const Field2D& a) {
                    if (j == 0)
                        return (-3.0 * a.at(0, k) + 4.0 * a.at(1, k) - a.at(2, k)) /
                               (2.0 * h);
                    if (j == nz - 1)
                        return (3.0 * a.at(j, k) - 4.0 * a.at(j - 1, k) +
                                a.at(j - 2, k)) /
                               (2.0 * h);
                    return (a.at(j + 1, k) - a.at(j - 1, k)) / (2.0 * h);
                };
                rz.at(j, k) = d1(fb.rho);
                wz.at(j, k) = d1(fb.omega);
            }
        std::vector<cplx> ur(nx_), vr(nx_), ar(nx_), br(nx_), cr(nx_), dr(nx_),
            p1(nx_), p2(nx_);
        for (int j = 0; j < nz; ++j) {
            for (int k = 0; k < nx_; ++k) {
                ur[k] = u.at(j, k);
                vr[k] = v.at(j, k);
                ar[k] = rx.at(j, k);
                br[k] = rz.at(j, k);
                cr[k] = wx.at(j, k);
                dr[k] = wz.at(j, k);
            }
            RowFFT::to_phys(ur.data(), nx_);
            RowFFT::to_phys(vr.data(), nx_);
            RowFFT::to_phys(ar.data(), nx_);
            RowFFT::to_phys(br.data(), nx_);
            RowFFT::to_phys(cr.data(), nx_);
            RowFFT::to_phys(dr.data(), nx_);
            for (int k = 0; k < nx_; ++k) {
                p1[k] = ur[k] * ar[k] + vr[k] * br[k];
                p2[k] = ur[k] * cr[k] + vr[k] * dr[k];
            }
            RowFFT::to_spec(p1.data(), nx_);
            RowFFT::to_spec(p2.data(), nx_);
            for (int k = 0; k < nx_; ++k) {
                if (std::abs(wavenumber(k, nx_)) > nx_ / 3) continue;
                out.rho.at(j, k) = p1[k];
                out.omega.at(j, k) = p2[k];
            }
        }
    }

    // combined RHS of the (Z2, Z3) system at time t
    void rhs(double t, const Pair2D& z2, const Pair2D& z3, Pair2D& d2,
             Pair2D& d3) const {
        const Pair2D Z1 = z1(t);
        Pair2D adv;
        linear_rhs(z2, d2);
        advection(Z1, Z1, adv);
        axpy(d2, -1.0, adv);
        linear_rhs(z3, d3);
        advection(Z1, z2, adv);
        axpy(d3, -1.0, adv);
        advection(z2, Z1, adv);
        axpy(d3, -1.0, adv);
    }

    double norm(const Pair2D& z) const {
        const double L = 2.0 * 3.141592653589793238462643383279502884 * M_;
        double s = 0.0;
        for (size_t i = 0; i < z.rho.spec.size(); ++i)
            s += std::norm(z.rho.spec[i]) + std::norm(z.omega.spec[i]);
        return std::sqrt(L * st_.grid().h * s);
    }

    NonlinearStepper st_;
    StratifiedEquilibrium eq_;
    double M_;
    int nx_, nz_, kc_;
    cplx lambda_;
    std::vector<double> us_, us2_, rhop_;
    std::vector<cplx> r_, w_;
};

std::vector<GrenierTrajectory> grenier_iterates(const StratifiedEquilibrium& eq,
                                                double M, const GrowingModeView& mode,
                                                cplx lambda, int nx, int nz,
                                                double dt) {
    const double Lam = lambda.real();
    if (!(Lam > 0.0))
        throw Error(Err::InvalidArgument, "grenier_iterates: Re(lambda) must be > 0");
    GrenierRun run(eq, M, mode, lambda, nx, nz);
    const double T = 3.0 / Lam;
    const int nsteps = static_cast<int>(std::llround(T / dt));

    Pair2D z2 = run.zero_pair(), z3 = run.zero_pair();
    GrenierTrajectory tr2, tr3;
    tr2.j = 2;
    tr3.j = 3;
    Pair2D k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, ta, tb;
    double t = 0.0;
    auto record = [&](double tt) {
        tr2.times.push_back(tt);
        tr2.norms.push_back(run.norm(z2));
        tr3.times.push_back(tt);
        tr3.norms.push_back(run.norm(z3));
    };
    record(0.0);
    for (int i = 0; i < nsteps; ++i) {
        run.rhs(t, z2, z3, k1a, k1b);
        ta = z2;
        tb = z3;
        axpy(ta, 0.5 * dt, k1a);
        axpy(tb, 0.5 * dt, k1b);
        run.rhs(t + 0.5 * dt, ta, tb, k2a, k2b);
        ta = z2;
        tb = z3;
        axpy(ta, 0.5 * dt, k2a);
        axpy(tb, 0.5 * dt, k2b);
        run.rhs(t + 0.5 * dt, ta, tb, k3a, k3b);
        ta = z2;
        tb = z3;
        axpy(ta, dt, k3a);
        axpy(tb, dt, k3b);
        run.rhs(t + dt, ta, tb, k4a, k4b);
        axpy(z2, dt / 6.0, k1a);
        axpy(z2, dt / 3.0, k2a);
        axpy(z2, dt / 3.0, k3a);
        axpy(z2, dt / 6.0, k4a);
        axpy(z3, dt / 6.0, k1b);
        axpy(z3, dt / 3.0, k2b);
        axpy(z3, dt / 3.0, k3b);
        axpy(z3, dt / 6.0, k4b);
        t += dt;
        record(t);
    }
    // fit over Lambda t in [2, 3]
    GrowthSeries g2{tr2.times, tr2.norms};
    fit_log_slope(g2, 2.0 / Lam, 3.0 / Lam);
    tr2.fitted_rate = g2.fitted_sigma;
    tr2.fit_r2 = g2.fit_r2;
    GrowthSeries g3{tr3.times, tr3.norms};
    fit_log_slope(g3, 2.0 / Lam, 3.0 / Lam);
    tr3.fitted_rate = g3.fitted_sigma;
    tr3.fit_r2 = g3.fit_r2;
    return {tr2, tr3};
}

Fields2D hydrostatic_rescale(const Fields2D& f, double eps, RescaleDirection dir) {
    if (!(eps > 0.0))
        throw Error(Err::InvalidArgument, "hydrostatic_rescale: eps <= 0");
    const double M_slow = dir == RescaleDirection::ToFast ? f.rho.M : f.rho.M / eps;
    const double ell = 1.0 / (eps * M_slow);
    if (std::abs(ell - std::llround(ell)) > 1e-9 * std::max(1.0, std::abs(ell)) ||
        std::llround(ell) < 1)
        throw Error(Err::IncompatibleEps,
                    "hydrostatic_rescale: eps must equal 1/(l M) for integer l");
    Fields2D out = f;
    if (dir == RescaleDirection::ToFast) {
        out.rho.M = out.omega.M = eps * f.rho.M;
        out.rho.t = out.omega.t = eps * f.rho.t;
    } else {
        out.rho.M = out.omega.M = f.rho.M / eps;
        out.rho.t = out.omega.t = f.rho.t / eps;
    }
    return out;
}

}  // namespace stratstab
