/* spcs: stationary states and noise-driven phase transition of the noisy
 * self-propelled Cucker-Smale kinetic model.
 *
 * C API of the shared library. All functions return spcs_status; results go
 * through out-parameters. Larger results (bifurcation curves, phase scans,
 * simulation traces) are returned as opaque handles with accessor functions
 * and must be released with the matching *_free call.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SPCS_H
#define SPCS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SPCS_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define SPCS_API __attribute__((visibility("default")))
#else
#  define SPCS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spcs_status {
  SPCS_OK = 0,
  SPCS_ERR_INVALID_ARGUMENT = 1,
  SPCS_ERR_QUADRATURE = 2,        /* adaptive rule exhausted max_subdivisions */
  SPCS_ERR_AMBIGUOUS_BRACKET = 3, /* more than one sign change of H in u */
  SPCS_ERR_NO_SIGN_CHANGE = 4,    /* critical-noise search interval exhausted */
  SPCS_ERR_BLOWUP = 5,            /* all particle runs exceeded |v| = 10 */
  SPCS_ERR_BAD_DENSITY = 6,       /* grid density negative or mass off by >1e-6 */
  SPCS_ERR_SUPPORT_MISMATCH = 7,  /* analytic mass outside histogram range */
  SPCS_ERR_UNSUPPORTED = 8,
  SPCS_ERR_INTERNAL = 9
} spcs_status;

SPCS_API const char *spcs_status_str(spcs_status s);
/* Thread-local detail message for the last failing call on this thread. */
SPCS_API const char *spcs_last_error(void);
SPCS_API const char *spcs_version(void);

/* ---- model parameters -------------------------------------------------- */

typedef struct spcs_params {
  int dim;      /* velocity-space dimension N, 1..3 */
  double alpha; /* self-propulsion intensity, > 0 */
  double noise; /* diffusion coefficient D, >= 0 */
} spcs_params;

typedef struct spcs_quad_cfg {
  double rel_tol;           /* default 1e-10 */
  double abs_tol;           /* default 1e-14 */
  int max_subdivisions;     /* default 2000 */
  double truncation_margin; /* exponent decades kept below the peak, default 60 */
} spcs_quad_cfg;

SPCS_API spcs_quad_cfg spcs_quad_cfg_default(void);

/* ---- model ------------------------------------------------------------- */

/* P_u(v) = -alpha(|v|^2/2 - |v|^4/4) + |v|^2/2 - u v1, v has params->dim entries. */
SPCS_API spcs_status spcs_potential_value(const spcs_params *p, double u,
                                          const double *v, double *out);

typedef struct spcs_potential_min {
  double u;
  double vstar;       /* unique positive root of alpha v^3 + (1-alpha) v = u */
  double a0;          /* minimum value P_u(v*, 0, ..., 0) */
  double lambda1;     /* quadratic-form coefficient along axis 1 */
  double lambda_perp; /* quadratic-form coefficient along axes 2..N */
} spcs_potential_min;

SPCS_API spcs_status spcs_positive_minimum(const spcs_params *p, double u,
                                           spcs_potential_min *out);

/* log Z of the stationary density, returned as mantissa * exp(log_scale). */
SPCS_API spcs_status spcs_partition_function(const spcs_params *p, double u,
                                             const spcs_quad_cfg *cfg,
                                             double *mantissa, double *log_scale);

/* log f_ubar(v) = -P_u(v)/D - log_z. Pass log_z from spcs_partition_function. */
SPCS_API spcs_status spcs_stationary_log_density(const spcs_params *p, double u,
                                                 double log_z, const double *v,
                                                 double *out);

/* Free energy of a density given as bin masses on a uniform grid:
 * lo/hi/nbins have dim entries, mass is row-major with prod(nbins) entries
 * summing to 1 within 1e-6. */
SPCS_API spcs_status spcs_free_energy_grid(const spcs_params *p, const double *lo,
                                           const double *hi, const int *nbins,
                                           const double *mass, double *out);

/* ---- quadrature -------------------------------------------------------- */

/* I_n^N(z) = int_0^pi cos^n(t) exp(z cos t) sin^{N-2}(t) dt, dim in {2,3}. */
SPCS_API spcs_status spcs_angular_integral(int n, int dim, double z, double *out);
/* E_D(r) = exp(alpha/D (r^2/2 - r^4/4) - r^2/(2D)). */
SPCS_API spcs_status spcs_radial_weight(const spcs_params *p, double r, double *out);
/* F_k(u,D) = int (v1 - v1*(u))^k exp(-P_u/D) dv (centered at the origin when
 * u = 0), k in {0,1,2}, as mantissa * exp(log_scale). */
SPCS_API spcs_status spcs_centered_moment(const spcs_params *p, double u, int k,
                                          const spcs_quad_cfg *cfg,
                                          double *mantissa, double *log_scale);
/* int exp(-Q(x)/D) x^beta dx for Q = sum lambda_i x_i^2, closed form. */
SPCS_API spcs_status spcs_gaussian_moment(const double *lambdas, const int *beta,
                                          int n, double noise, double *out);

/* ---- self-consistency function H(u, D) ---------------------------------- */

SPCS_API spcs_status spcs_eval_h(const spcs_params *p, double u,
                                 const spcs_quad_cfg *cfg, double *out);
SPCS_API spcs_status spcs_eval_dh_du(const spcs_params *p, double u,
                                     const spcs_quad_cfg *cfg, double *out);
SPCS_API spcs_status spcs_eval_dh_dd(const spcs_params *p, double u,
                                     const spcs_quad_cfg *cfg, double *out);

/* Z*H evaluated two ways (direct moment vs integration-by-parts form), same
 * exponential shift; both out-parameters receive the shifted mantissas. */
SPCS_API spcs_status spcs_zh_identity(const spcs_params *p, double u,
                                      const spcs_quad_cfg *cfg,
                                      double *direct, double *parts);

/* Positive root of H on (1e-4, 3). *found = 0 with SPCS_OK means the
 * disordered regime (no positive root). */
SPCS_API spcs_status spcs_find_positive_root(const spcs_params *p,
                                             const spcs_quad_cfg *cfg,
                                             double root_tol, int *found,
                                             double *u_root);

typedef struct spcs_bifurcation spcs_bifurcation;

SPCS_API spcs_status spcs_trace_bifurcation(double alpha, int dim, double d_min,
                                            double d_max, double d_step,
                                            const spcs_quad_cfg *cfg,
                                            spcs_bifurcation **out);
SPCS_API int spcs_bifurcation_size(const spcs_bifurcation *b);
SPCS_API spcs_status spcs_bifurcation_sample(const spcs_bifurcation *b, int i,
                                             double *noise, double *u,
                                             double *dh_du);
SPCS_API double spcs_bifurcation_dc(const spcs_bifurcation *b);
SPCS_API double spcs_bifurcation_slope_at_zero(const spcs_bifurcation *b);
SPCS_API void spcs_bifurcation_free(spcs_bifurcation *b);

/* Critical noise D_c(alpha): root of dH/du(0, D) = 0, bisected to 1e-8. */
SPCS_API spcs_status spcs_critical_noise(double alpha, int dim,
                                         const spcs_quad_cfg *cfg, double *out);

typedef struct spcs_phase_diagram spcs_phase_diagram;

SPCS_API spcs_status spcs_phase_scan(const double *alphas, int n_alpha,
                                     const double *noises, int n_noise, int dim,
                                     const spcs_quad_cfg *cfg, int threads,
                                     spcs_phase_diagram **out);
SPCS_API int spcs_phase_grid_size(const spcs_phase_diagram *pd);
/* n_states: 1 or 2 (2 means "more than one stationary state"); status is a
 * spcs_status for that grid point (scan continues past per-point failures). */
SPCS_API spcs_status spcs_phase_grid_point(const spcs_phase_diagram *pd, int i,
                                           double *alpha, double *noise,
                                           int *n_states, int *status);
SPCS_API int spcs_phase_boundary_size(const spcs_phase_diagram *pd);
SPCS_API spcs_status spcs_phase_boundary_point(const spcs_phase_diagram *pd,
                                               int i, double *alpha, double *dc);
SPCS_API void spcs_phase_diagram_free(spcs_phase_diagram *pd);

/* ---- small-noise asymptotics (Laplace method) --------------------------- */

typedef struct spcs_laplace_coeffs {
  double alpha;
  int dim;
  double c0, c1, c2; /* leading coefficients of F0, F1, F2 at u = 1 */
  double k1, k2;     /* leading coefficients of the dH/dD integrals at u = 1 */
  double dh_du_limit; /* dH/du(1,0) = -2 alpha / (1 + 2 alpha) */
  double dh_dd_limit; /* dH/dD(1,0) */
  double bif_slope;   /* du/dD(0) = -dh_dd_limit / dh_du_limit */
} spcs_laplace_coeffs;

SPCS_API spcs_status spcs_laplace_coefficients(double alpha, int dim,
                                               spcs_laplace_coeffs *out);

/* Gaussian moment table m2, m4, m22, m222, m24, m42, m6 (entries that exist
 * for the given dim): closed forms and the same values assembled from
 * spcs_gaussian_moment. Arrays must hold at least 7 doubles; *count receives
 * the number of valid entries. spcs_moment_name(i) names entry i. */
SPCS_API spcs_status spcs_moment_table(double alpha, int dim, double *closed,
                                       double *assembled, int *count);
SPCS_API const char *spcs_moment_name(double alpha, int dim, int i);

#define SPCS_EXPANSION_MAX_POINTS 8

typedef struct spcs_expansion_report {
  int n_points;
  double noise[SPCS_EXPANSION_MAX_POINTS]; /* D sequence, halving from 1e-2 */
  /* g_k = D^{-N/2} e^{a0/D} F_k, with F1, F2 additionally divided by D */
  double g[3][SPCS_EXPANSION_MAX_POINTS];
  double coeff[3];     /* c0, c1, c2: closed form at u=1, extrapolated otherwise */
  int coeff_closed;    /* 1 if closed forms were used */
  double residual[3][SPCS_EXPANSION_MAX_POINTS]; /* |g_k - coeff_k| */
  double slope[3];     /* log-log regression slope of residual vs D */
} spcs_expansion_report;

SPCS_API spcs_status spcs_expansion_check(double alpha, int dim, double u,
                                          int n_points, const spcs_quad_cfg *cfg,
                                          spcs_expansion_report *out);

/* H(u, 0) = v1*(u) - u (zero-noise extension). */
SPCS_API spcs_status spcs_extended_h_zero_noise(double alpha, double u, double *out);

/* ---- interacting-particle simulation ------------------------------------ */

typedef struct spcs_sim_config {
  spcs_params params;
  int n_particles; /* default 2000 */
  double dt;       /* default 0.01 */
  double t_end;    /* default 200 */
  int n_runs;      /* default 1 */
  uint64_t seed;   /* default 1 */
  int record_every; /* steps between snapshots, default 50 */
  int init_kind;    /* 0 = gaussian, 1 = point mass */
  double init_mean[3];
  double init_sigma;
  int hist_bins;    /* per axis, default 200 */
  double hist_lo;   /* default -2.5 */
  double hist_hi;   /* default  2.5 */
  int threads;      /* 0 = auto; results are thread-count independent */
} spcs_sim_config;

SPCS_API spcs_sim_config spcs_sim_config_default(void);

typedef struct spcs_trace spcs_trace;

SPCS_API spcs_status spcs_run_ensemble(const spcs_sim_config *cfg, spcs_trace **out);
SPCS_API int spcs_trace_snapshots(const spcs_trace *t);
SPCS_API spcs_status spcs_trace_time(const spcs_trace *t, int i, double *out);
/* Ensemble- and particle-averaged velocity at snapshot i (dim entries). */
SPCS_API spcs_status spcs_trace_mean_velocity(const spcs_trace *t, int i, double *out);
SPCS_API int spcs_trace_has_free_energy(const spcs_trace *t);
SPCS_API spcs_status spcs_trace_free_energy(const spcs_trace *t, int i, double *out);
/* Final-time pooled histogram, marginal over the first velocity component. */
SPCS_API int spcs_trace_hist_bins(const spcs_trace *t);
SPCS_API spcs_status spcs_trace_histogram(const spcs_trace *t, double *bin_lo,
                                          double *bin_hi, double *mass);
SPCS_API int spcs_trace_runs_completed(const spcs_trace *t);
SPCS_API int spcs_trace_runs_total(const spcs_trace *t);
/* Terminal statistics: averages over the final 10% of snapshots. se1 is the
 * ensemble standard error of the first mean-velocity component. */
SPCS_API spcs_status spcs_trace_terminal(const spcs_trace *t, double *mean,
                                         double *se1);
SPCS_API void spcs_trace_free(spcs_trace *t);

/* L1 distance between the trace's final histogram and the analytic stationary
 * density with mean speed u_root. */
SPCS_API spcs_status spcs_histogram_vs_analytic(const spcs_trace *t,
                                                const spcs_params *p,
                                                double u_root,
                                                const spcs_quad_cfg *cfg,
                                                double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPCS_H */
