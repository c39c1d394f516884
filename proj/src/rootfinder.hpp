#pragma once

#include <functional>
#include <vector>

#include "dispersion.hpp"
#include "profiles.hpp"

namespace stratstab {

using CFunc = std::function<cplx(cplx)>;

// Half-disk {Im(c) > eps, |c - i eps| <= R}: base segment [-R,R]+i eps
// traversed left to right, then the arc counterclockwise.
struct HalfDiskContour {
    double eps = 1e-2;
    double radius = 2.0;
    int n_base = 256;
    int n_arc = 128;
};

struct Rect {
    double re_lo, re_hi, im_lo, im_hi;
    double diameter() const;
    cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
};

struct WindingReport {
    int winding = 0;
    double max_phase_step = 0.0;
    std::vector<std::pair<cplx, cplx>> samples;  // (c, f(c)) in traversal order
};

struct Zero {
    cplx c;
    double residual = 0.0;
    int iterations = 0;
    int multiplicity_hint = 1;  // winding of the enclosing cell
};

// F(c) = int_{-1}^{1} dz / (U_s(z) - c)^2, the alpha = 1 dispersion integral.
cplx nyquist_F(cplx c, const ShearProfile& shear, double rel_tol = 1e-12);

// Discrete winding number of f over a closed contour. Sampling is refined
// by bisection (along the contour parameter) until every consecutive phase
// step is below pi/2, which pins the discrete winding to the true one for
// zero-free contours.
WindingReport winding_number(const CFunc& f, const HalfDiskContour& contour,
                             int max_samples = 40000);
WindingReport winding_number(const CFunc& f, const Rect& rect,
                             int samples_per_edge = 32, int max_samples = 40000);

struct FindZerosOptions {
    double cell_diameter = 1e-3;  // subdivision stops below this
    int samples_per_edge = 24;
    int max_samples = 40000;
    int max_jitters = 5;
    bool check_conservation = false;  // assert parent = sum(children) windings
};

// All zeros of a holomorphic f inside a rectangle strictly above the real
// axis: recursive quadrisection on winding counts, then complex secant
// refinement from each terminal cell, dedup radius 10*tol.
std::vector<Zero> find_zeros(const CFunc& f, const Rect& region, double tol,
                             const FindZerosOptions& opt = {});

// Smallest R for which ||U||(1 - ||U||/R)^2 > 1 - (1 - ||U||/R)^2, found by
// bisection to 1e-6. |F| > 0 on |c| = R beyond it, so the zero search may
// be truncated there.
double exclusion_radius(const ShearProfile& shear);

struct DispersionZeros {
    std::vector<Zero> zeros;
    double gamma0 = 0.0;  // max Im(c), meaningful when zeros is non-empty
};

enum class ZeroMethod { Neumann, Shooting };

// Zero search for the dispersion function of an equilibrium over
// [-R,R] x [eps_floor, R] with R = exclusion_radius.
DispersionZeros find_dispersion_zeros(const StratifiedEquilibrium& eq, double kappa,
                                      ZeroMethod method, double eps_floor,
                                      double tol = 1e-10);

// gamma0 = max Im(c) over located dispersion zeros; throws NoZeroFound when
// the region has none.
double gamma0(const StratifiedEquilibrium& eq, double eps_floor, double tol = 1e-10);

struct NecessaryConditions {
    bool g1_pass = false;       // Re(c) inside the range of U_s
    bool flagged_spurious = false;  // zero reported for a Miles-Howard stable profile
};

NecessaryConditions verify_necessary_conditions(const Zero& z,
                                                const StratifiedEquilibrium& eq);

// Sign structure of Im F along the Nyquist base segment Im(c) = eps. The
// boundary-value limit of F has Im = -pi G(a) strictly inside the range of
// U_s and vanishes identically outside it, so the scan stays a safety
// margin inside the range where the single upward crossing at a = 0 lives.
struct PlemeljReport {
    int sign_changes = 0;
    double crossing = 0.0;       // location of the sign change
    double slope_at_crossing = 0.0;
    bool upward = false;
    double segment_halfwidth = 0.0;
};

PlemeljReport plemelj_scan(const ShearProfile& shear, double eps, int n_samples = 401);

}  // namespace stratstab
