/* stratstab: linear-instability analysis of stratified shear flows in a
 * periodic channel -- dispersion-relation zeros of the hydrostatic and
 * non-hydrostatic Taylor-Goldstein problems, winding-number root location
 * in the upper complex half-plane, growing-mode reconstruction, and
 * time-stepped linear/nonlinear validation runs.
 *
 * C interface of the shared library: opaque handles plus status codes.
 * All functions return SS_OK on success; array outputs use caller-provided
 * buffers with capacity/count pairs.
 */
#ifndef STRATSTAB_H
#define STRATSTAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_INVALID_ARGUMENT = 1,
    SS_ERR_ALPHA_RANGE = 2,
    SS_ERR_NONMONOTONE_SHEAR = 3,
    SS_ERR_DEGENERATE_SHEAR = 4,
    SS_ERR_BRANCH = 5,
    SS_ERR_NONCONTRACTIVE = 6,
    SS_ERR_TOLERANCE = 7,
    SS_ERR_ZERO_ON_CONTOUR = 8,
    SS_ERR_REFINEMENT = 9,
    SS_ERR_NO_ZERO = 10,
    SS_ERR_NOT_A_ZERO = 11,
    SS_ERR_CFL = 12,
    SS_ERR_NO_BLOWUP = 13,
    SS_ERR_NO_GROWTH = 14,
    SS_ERR_INCOMPATIBLE_EPS = 15,
    SS_ERR_BUFFER_TOO_SMALL = 16,
    SS_ERR_INTERNAL = 17
} ss_status;

const char* ss_status_name(ss_status s);
/* message of the most recent failure on this thread */
const char* ss_last_error(void);

/* ----- equilibria ------------------------------------------------------ */

typedef struct ss_equilibrium ss_equilibrium;

/* Friedlander equilibrium over the tanh shear U_s = tanh(beta z):
 * rho_s = alpha(1-alpha)(-beta tanh(beta z) + beta/3 tanh^3(beta z)). */
ss_status ss_equilibrium_tanh(double beta, double alpha, ss_equilibrium** out);
/* Friedlander equilibrium over the Couette shear U_s = z. */
ss_status ss_equilibrium_couette_friedlander(double alpha, ss_equilibrium** out);
/* Miles-Howard stable reference pair U_s = z, rho_s = -z (Ri == 1). */
ss_status ss_equilibrium_stable_couette(ss_equilibrium** out);
void ss_equilibrium_free(ss_equilibrium* eq);

ss_status ss_equilibrium_eval(const ss_equilibrium* eq, double z, double* us,
                              double* us1, double* us2, double* rho, double* rho1);
ss_status ss_equilibrium_alpha(const ss_equilibrium* eq, double* alpha);

ss_status ss_richardson(const ss_equilibrium* eq, double z, double* ri);

typedef struct ss_richardson_report {
    double min_ri;
    double argmin_z;
    int satisfied; /* Ri >= 1/4 everywhere, boundary inclusive */
} ss_richardson_report;

/* samples (z_i, Ri_i): pass NULL buffers to query the count only */
ss_status ss_miles_howard(const ss_equilibrium* eq, int n_samples,
                          ss_richardson_report* report, double* z_buf,
                          double* ri_buf, size_t buf_cap, size_t* buf_count);

/* ----- dispersion functions -------------------------------------------- */

ss_status ss_d_alpha(const ss_equilibrium* eq, double re_c, double im_c, double z,
                     double* re_out, double* im_out);

typedef struct ss_dispersion_result {
    double re, im;            /* psi(1) */
    double estimated_error;   /* doubled-resolution difference */
    int terms_used;
    double fixed_point_residual;
    double contraction_estimate;
} ss_dispersion_result;

ss_status ss_dispersion_value(const ss_equilibrium* eq, double re_c, double im_c,
                              double kappa, double tol, ss_dispersion_result* out);

ss_status ss_shoot_tg(const ss_equilibrium* eq, double re_c, double im_c,
                      double kappa, int nsteps, double* re_out, double* im_out);

ss_status ss_nyquist_f(const ss_equilibrium* eq, double re_c, double im_c,
                       double* re_out, double* im_out);

ss_status ss_operator_norm_bound(const ss_equilibrium* eq, double im_c, double* out);

/* ----- root location ---------------------------------------------------- */

ss_status ss_exclusion_radius(const ss_equilibrium* eq, double* radius);

typedef struct ss_winding_report {
    int winding;
    double max_phase_step;
} ss_winding_report;

/* winding of the Nyquist function F over the half-disk boundary; the
 * optional trace receives (re c, im c, re F, im F, cumulative phase) */
ss_status ss_nyquist_winding(const ss_equilibrium* eq, double eps, double radius,
                             ss_winding_report* report, double* trace5_buf,
                             size_t trace_cap_rows, size_t* trace_rows);

typedef struct ss_plemelj_report {
    int sign_changes;
    double crossing;
    double slope_at_crossing;
    int upward;
    double segment_halfwidth;
} ss_plemelj_report;

ss_status ss_plemelj_scan(const ss_equilibrium* eq, double eps,
                          ss_plemelj_report* out);

typedef enum ss_method { SS_METHOD_NEUMANN = 0, SS_METHOD_SHOOTING = 1 } ss_method;

typedef struct ss_zero {
    double re_c, im_c;
    double residual;
    int multiplicity_hint;
    int g1_pass;
    int flagged_spurious;
} ss_zero;

/* dispersion zeros over [-R,R] x [eps_floor,R], R = exclusion radius */
ss_status ss_find_dispersion_zeros(const ss_equilibrium* eq, double kappa,
                                   ss_method method, double eps_floor, double tol,
                                   ss_zero* buf, size_t cap, size_t* count);

/* zeros of the Nyquist function F itself (alpha = 1 homogeneous problem) */
ss_status ss_find_nyquist_zeros(const ss_equilibrium* eq, double eps_floor,
                                double tol, ss_zero* buf, size_t cap, size_t* count);

ss_status ss_gamma0(const ss_equilibrium* eq, double eps_floor, double* gamma0);

/* ----- growing modes ----------------------------------------------------- */

typedef struct ss_mode ss_mode;

ss_status ss_mode_compute(const ss_equilibrium* eq, ss_method source, int k,
                          double kappa, double re_c, double im_c, int n_interior,
                          ss_mode** out);
void ss_mode_free(ss_mode* m);

ss_status ss_mode_info(const ss_mode* m, int* k, double* kappa, double* sigma,
                       double* re_c, double* im_c, int* n_interior);
/* arrays of length n_interior: z, and complex phi/r/w split into re/im */
ss_status ss_mode_arrays(const ss_mode* m, double* z, double* re_phi, double* im_phi,
                         double* re_r, double* im_r, double* re_w, double* im_w);
ss_status ss_mode_residual(const ss_mode* m, const ss_equilibrium* eq,
                           double* tg_residual, double* bc_defect);

ss_status ss_dominant_growth(const ss_equilibrium* eq, int k, double kappa,
                             int n_interior, double dt, double t_horizon,
                             uint64_t seed, double* growth);

/* ----- time integration -------------------------------------------------- */

typedef enum ss_linear_model {
    SS_MODEL_HYDROSTATIC = 0,
    SS_MODEL_BOUSSINESQ = 1
} ss_linear_model;

typedef struct ss_growth_fit {
    double fitted_sigma;
    double fit_r2;
    double window_lo, window_hi;
} ss_growth_fit;

/* random-data linear growth run; series buffers are optional */
ss_status ss_linear_growth(const ss_equilibrium* eq, int k, double kappa,
                           ss_linear_model model, int n_interior, double dt,
                           double t_end, uint64_t seed, ss_growth_fit* fit,
                           double* t_buf, double* norm_buf, size_t cap,
                           size_t* count);

typedef struct ss_instability_result {
    int reached;
    double T;
    ss_growth_fit fit;
} ss_instability_result;

/* nonlinear Lyapunov run on T_M x (-1,1) seeded with the mode, perturbation
 * rescaled to initial deviation norm delta; Lambda is the reference growth
 * rate used for the time budget */
ss_status ss_instability_time(const ss_equilibrium* eq, const ss_mode* mode,
                              double M, double delta, double m, int nx, int nz,
                              double dt, double Lambda,
                              ss_instability_result* out, double* t_buf,
                              double* norm_buf, size_t cap, size_t* count);

typedef struct ss_grenier_result {
    double rate2, r2_2;
    double rate3, r2_3;
} ss_grenier_result;

ss_status ss_grenier_rates(const ss_equilibrium* eq, const ss_mode* mode, double M,
                           int nx, int nz, double dt, ss_grenier_result* out);

#ifdef __cplusplus
}
#endif

#endif /* STRATSTAB_H */
