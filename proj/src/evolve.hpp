#pragma once

#include <cstdint>
#include <vector>

#include "profiles.hpp"
#include "quadrature.hpp"

namespace stratstab {

// Uniform interior grid: z_j = -1 + (j+1) h, h = 2/(n+1); boundary values
// are imposed, not stored.
struct Grid1D {
    int n = 0;
    double h = 0.0;
    std::vector<double> nodes;

    Grid1D() = default;
    explicit Grid1D(int n_interior);
};

// Per-wavenumber complex state. k is the integer transport factor (the
// x-derivative contributes i k), kappa the transverse wavenumber entering
// the Poisson solve; on a torus of circumference 2 pi M one has kappa = k/M
// and the physical problem uses i kappa transport instead (see Field2D).
struct ModeState {
    int k = 1;
    double kappa = 0.0;
    double t = 0.0;
    std::vector<cplx> rho_hat, omega_hat;

    double l2_norm(double h) const;
};

enum class LinearModel { Hydrostatic, Boussinesq };

// Dirichlet tridiagonal solves of phi'' = omega and (phi'' - kappa^2) = omega.
void poisson_hydro(const std::vector<cplx>& omega, const Grid1D& g,
                   std::vector<cplx>& phi);
void poisson_full(const std::vector<cplx>& omega, double kappa, const Grid1D& g,
                  std::vector<cplx>& phi);

// RK4 stepper for the per-wavenumber linearized system
//   d rho/dt   = -i k U_s rho + i k rho_s' phi
//   d omega/dt = -i k U_s omega + i k U_s'' phi + i k rho
// with phi from the hydrostatic or full Poisson solve.
class LinearStepper {
public:
    LinearStepper(const StratifiedEquilibrium& eq, const Grid1D& grid, int k,
                  double kappa, LinearModel model);

    const Grid1D& grid() const { return grid_; }
    void rhs(const std::vector<cplx>& rho, const std::vector<cplx>& om,
             std::vector<cplx>& drho, std::vector<cplx>& dom) const;
    void step(ModeState& s, double dt) const;

    // K-suppressed variant: rho_s' and U_s'' couplings dropped, the i k rho
    // source kept; its exact solution is the transport semigroup.
    void set_transport_only(bool v) { transport_only_ = v; }

private:
    Grid1D grid_;
    int k_;
    double kappa_;
    LinearModel model_;
    bool transport_only_ = false;
    std::vector<double> us_, us2_, rhop_;
};

ModeState step_linear(const ModeState& s, const StratifiedEquilibrium& eq, double dt,
                      LinearModel model);

// Exact transport propagator (the K = 0 semigroup):
//   rho   -> e^{-i k t U_s} rho
//   omega -> e^{-i k t U_s} (omega + i k t rho)
ModeState transport_exact(const ModeState& s, double t, const StratifiedEquilibrium& eq);

struct GrowthSeries {
    std::vector<double> times, norms;
    double fitted_sigma = 0.0;
    double fit_window_lo = 0.0, fit_window_hi = 0.0;
    double fit_r2 = 0.0;
};

// Least-squares slope of log(norms) over times in [t_lo, t_hi].
void fit_log_slope(GrowthSeries& gs, double t_lo, double t_hi);

// Random-data growth run of the per-wavenumber linear system; the fit
// window is the second half of [0, t_end], after the neutral transient.
GrowthSeries linear_growth_series(const StratifiedEquilibrium& eq, int k, double kappa,
                                  LinearModel model, int n, double dt, double t_end,
                                  std::uint64_t seed);

// Real 2D state on T_M x (-1,1), spectral in x (row-major: z-level j holds
// the nx Fourier coefficients, mode k has wavenumber k/M), finite
// differences in z on the interior grid.
struct Field2D {
    int nx = 0, nz = 0;
    double M = 1.0;
    double t = 0.0;
    std::vector<cplx> spec;  // size nx*nz, spec[j*nx + k]

    cplx& at(int j, int k) { return spec[static_cast<size_t>(j) * nx + k]; }
    const cplx& at(int j, int k) const { return spec[static_cast<size_t>(j) * nx + k]; }
};

struct Fields2D {
    Field2D rho, omega;
};

// Pseudo-spectral nonlinear Euler-Boussinesq stepper in vorticity form:
//   rho_t + u rho_x + v rho_z = 0
//   omega_t + u omega_x + v omega_z = rho_x
//   (u,v) = (phi_z, -phi_x),  Delta phi = omega, phi(z=+-1)=0,
// with 2/3-rule dealiasing of the quadratic products.
class NonlinearStepper {
public:
    NonlinearStepper(const StratifiedEquilibrium& eq, int nx, int nz, double M);

    const Grid1D& grid() const { return grid_; }
    Fields2D equilibrium() const;  // (rho_s, U_s') as a spectral state

    // max stable dt = 0.5 min(dx/|u|, h/|v|) for the current state
    double cfl_limit(const Fields2D& f) const;
    void step(Fields2D& f, double dt) const;  // throws CflViolation

    // discrete L2 norm of (rho - rho_s, omega - U_s') jointly
    double deviation_norm(const Fields2D& f) const;
    double mean_rho(const Fields2D& f) const;  // conserved by advection

    void rhs(const Fields2D& f, Fields2D& out) const;

private:
    Grid1D grid_;
    int nx_;
    double M_;
    std::vector<double> rho_s_, om_s_;
    int dealias_cut_;  // modes with |k| > cut are zeroed

    void velocities(const Field2D& omega, Field2D& u, Field2D& v) const;
    friend class GrenierRun;
};

struct InstabilityResult {
    bool reached = false;
    double T = 0.0;  // first crossing of the threshold (linear interpolation)
    GrowthSeries series;
};

struct GrowingModeView {
    int k = 1;                 // x-mode index on the torus
    const std::vector<cplx>* r;  // density amplitude on the stepper grid
    const std::vector<cplx>* w;  // vorticity amplitude
};

// Nonlinear run from (rho_s, U_s') + delta * Re(mode), the perturbation
// rescaled to unit deviation norm so the initial deviation equals delta.
// Stops when the deviation reaches m, or after 10 |log delta| / Lambda
// time units.
InstabilityResult instability_time(const StratifiedEquilibrium& eq, double M,
                                   const GrowingModeView& mode, double delta, double m,
                                   int nx, int nz, double dt, double Lambda);

struct GrenierTrajectory {
    int j = 2;
    std::vector<double> times, norms;
    double fitted_rate = 0.0;  // log-slope over the fit window
    double fit_r2 = 0.0;
};

// Grenier iterates j = 2, 3 forced by the closed-form eigenmode iterate
//   Z_1(t) = Re( e^{lambda t} Z_eig e^{i k x / M} ),  lambda = -i (k/M) c,
// integrated with the linearized stepper and pseudo-spectral forcing
// assembled from the lower iterates. T is chosen so Re(lambda) T <= 3.
std::vector<GrenierTrajectory> grenier_iterates(const StratifiedEquilibrium& eq,
                                                double M, const GrowingModeView& mode,
                                                cplx lambda, int nx, int nz, double dt);

enum class RescaleDirection { ToFast, ToSlow };

// Hyperbolic rescaling between the slow torus T_M and the fast torus
// T_{eps M}: spectral coefficients are relabeled (mode indices unchanged,
// physical wavenumber k/M -> k/(eps M)), time scales by eps, and the
// derived vertical velocity picks up the 1/eps factor automatically
// through the Biot-Savart solve. eps must equal 1/(l M) for integer l.
Fields2D hydrostatic_rescale(const Fields2D& f, double eps, RescaleDirection dir);

}  // namespace stratstab
