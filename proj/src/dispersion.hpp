#pragma once

#include <memory>
#include <vector>

#include "profiles.hpp"
#include "quadrature.hpp"

namespace stratstab {

// A dispersion evaluation point: complex phase speed in the open upper
// half-plane plus the transverse wavenumber kappa = k/M (kappa = 0 is the
// hydrostatic problem). The integral formulation encodes the stratification
// through the Friedlander parameter alpha; the shooting oracle reads
// rho_s' from the equilibrium directly.
struct DispersionQuery {
    StratifiedEquilibrium eq;
    cplx c;
    double kappa = 0.0;
    int npanels = 64;  // panels of the Neumann quadrature grid (16 nodes each)

    double alpha() const { return eq.alpha; }
};

struct GridFn {
    std::vector<cplx> v;  // nodal values on the query's PanelGrid
    cplx at_end = 0.0;    // value at z = 1
};

struct NeumannSolution {
    std::shared_ptr<const PanelGrid> grid;
    std::vector<cplx> psi;
    cplx psi_end = 0.0;
    int terms_used = 0;
    double fixed_point_residual = 0.0;
    double contraction_estimate = 0.0;
};

struct DispersionValue {
    cplx value;              // psi(1)
    double estimated_error;  // |value - doubled-panel value|
};

// D_alpha^z(c) = int_{-1}^z (U_s(r)-c)^{-2 alpha} dr, principal branch.
// Point evaluation by adaptive quadrature.
cplx d_alpha(const DispersionQuery& q, double z, double rel_tol = 1e-12);

// Integral operators of the fixed-point equation, acting on nodal samples
// over the given PanelGrid:
//   S[f](z)     = int_{-1}^z (U_s-c)^{-2a} { int_{-1}^r (U_s-c)^{2a-1} U_s'' f }
//   Stilde[f](z)= int_{-1}^z (U_s-c)^{-2a} { int_{-1}^r (U_s-c)^{2a}        f }
// Stilde is the fully composed non-hydrostatic term, so the fixed point reads
//   psi = D + (1-a) S[psi] + kappa^2 Stilde[psi],  with all terms 0 at z=-1.
GridFn apply_S(const std::vector<cplx>& f, const DispersionQuery& q, const PanelGrid& grid);
GridFn apply_S_tilde(const std::vector<cplx>& f, const DispersionQuery& q, const PanelGrid& grid);

// Neumann-series solution of the fixed-point equation. Terms are summed
// until the geometric tail estimate latest/(1-ratio) drops below tol.
NeumannSolution solve_neumann(const DispersionQuery& q, double tol = 1e-12,
                              int max_terms = 200);

// psi(1); zeros in {Im c > 0} are the unstable phase speeds.
DispersionValue dispersion_value(const DispersionQuery& q, double tol = 1e-12);

// Independent oracle: integrate the (modified) Taylor-Goldstein equation
//   phi'' = kappa^2 phi + [U_s''/(U_s-c) + rho_s'/(U_s-c)^2] phi
// from z=-1 with phi(-1)=0, phi'(-1)=1 by fixed-step RK4; returns phi(1).
cplx shoot_tg(const DispersionQuery& q, int nsteps = 4096);

// Trajectory variant: phi and phi' sampled on the n interior points of the
// uniform grid z_j = -1 + j h, h = 2/(n+1), plus phi(1).
struct ShootingTrajectory {
    std::vector<cplx> phi, dphi;  // at the n interior nodes
    cplx phi_end;
};
ShootingTrajectory shoot_tg_trajectory(const DispersionQuery& q, int n_interior,
                                       int min_steps = 4096);

// C=1 envelope of the operator-norm bound
//   (1 + 4 ||U_s||^2 / Im(c)^2)^alpha * ||U_s''/U_s'||_{W^{1,inf}}.
// Diagnostic only; the true universal constant is unspecified.
double operator_norm_bound(const DispersionQuery& q);

// Repeated-evaluation form of shoot_tg: profile samples at the RK4 stage
// points are cached once, so each value(c) is pure complex arithmetic.
class ShootingKernel {
public:
    ShootingKernel(const StratifiedEquilibrium& eq, double kappa, int nsteps = 4096);
    cplx value(cplx c) const;  // phi(1)

private:
    int nsteps_;
    double kappa_;
    std::vector<double> us_, us2_, rhop_;  // at half-step points 0..2*nsteps
};

}  // namespace stratstab
