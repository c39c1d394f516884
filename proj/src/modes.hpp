#pragma once

#include "dispersion.hpp"
#include "evolve.hpp"
#include "rootfinder.hpp"

namespace stratstab {

// A reconstructed growing normal mode e^{ik(x-ct)} on a uniform interior
// grid: stream amplitude phi = (U_s-c)^alpha psi, density amplitude
// r = rho_s' phi/(U_s-c), vorticity amplitude w = phi'' - kappa^2 phi
// recovered from the Taylor-Goldstein identity (no differentiation noise).
// Normalized so sup|phi| = 1.
struct GrowingMode {
    int k = 1;
    cplx c;
    double kappa = 0.0;
    double sigma = 0.0;  // k * Im(c)
    Grid1D grid;
    std::vector<cplx> phi, r, w;
    double bc_defect = 0.0;  // |phi(1)| relative to the mode scale
};

struct ModeResidualReport {
    double tg_residual = 0.0;  // finite-difference Taylor-Goldstein defect
    double bc_defect = 0.0;
};

GrowingMode reconstruct_mode(const Zero& z0, int k, const DispersionQuery& q,
                             int n_interior, ZeroMethod source = ZeroMethod::Shooting);

// Independent check: phi'' recomputed by 4th-order central differences and
// inserted into (U_s-c)^2(phi''-kappa^2 phi) - (U_s-c) U_s'' phi - rho_s' phi,
// normalized by sup |(U_s-c)^2 phi''|.
ModeResidualReport mode_residual(const GrowingMode& m, const StratifiedEquilibrium& eq);

// Largest spectral growth rate of the per-wavenumber linearized operator,
// estimated by power iteration on the time-T propagator (the tested RK4
// stepper), hydrostatic for kappa == 0 and Boussinesq otherwise. Stops when
// the log-amplification estimate changes by < 1e-4 (relatively) over 5
// consecutive iterations. Stable profiles show at most algebraic growth:
// the estimate decays toward 0 and is reported as NoGrowth once it falls
// and stays under 0.05 at the iteration cap.
double dominant_growth(int k, double kappa, const StratifiedEquilibrium& eq,
                       const Grid1D& grid, double dt = 1e-3, double T = 1.0,
                       std::uint64_t seed = 0, int max_iters = 60);

}  // namespace stratstab
