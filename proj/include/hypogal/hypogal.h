/* C interface to the hypogal spectral Galerkin solver.
 *
 * Objects are opaque handles created by *_create / producing calls and
 * released with the matching *_destroy. Every fallible call returns an
 * hg_status; on failure hg_last_error() describes the problem (per thread).
 */
#ifndef HYPOGAL_H
#define HYPOGAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HG_OK = 0,
  HG_ERR_INVALID_ARGUMENT = 1,
  HG_ERR_SHAPE_MISMATCH = 2,
  HG_ERR_SINGULAR = 3,
  HG_ERR_NOT_CONVERGED = 4,
  HG_ERR_RESIDUAL = 5,
  HG_ERR_ASSEMBLY = 6,
  HG_ERR_IO = 7,
  HG_ERR_CACHE_CORRUPT = 8,
  HG_ERR_OUT_OF_MEMORY = 9,
  HG_ERR_NON_FINITE = 10,
  HG_ERR_INTERNAL = 99
} hg_status;

typedef struct hg_model hg_model;
typedef struct hg_system hg_system;
typedef struct hg_vector hg_vector;
typedef struct hg_solution hg_solution;
typedef struct hg_sweep hg_sweep;
typedef struct hg_gap hg_gap;

const char* hg_version(void);
const char* hg_last_error(void);
const char* hg_status_name(hg_status status);

/* Model: beta, gamma, potential, K, L, n_quad_q. Defaults: beta = gamma = 1,
 * V = 1 - cos q, K = 10, L = 20, n_quad_q = 1024. */
hg_status hg_model_create(hg_model** out);
hg_status hg_model_clone(const hg_model* model, hg_model** out);
void hg_model_destroy(hg_model* model);
hg_status hg_model_set_beta(hg_model* model, double beta);
hg_status hg_model_set_gamma(hg_model* model, double gamma);
hg_status hg_model_set_modes(hg_model* model, int K, int L);
hg_status hg_model_set_quadrature(hg_model* model, int n_quad_q);
/* V(q) = c0 + sum a[n-1] cos(nq) + b[n-1] sin(nq). */
hg_status hg_model_set_potential(hg_model* model, double c0, const double* cos_coeffs, int n_cos,
                                 const double* sin_coeffs, int n_sin);
hg_status hg_model_get(const hg_model* model, double* beta, double* gamma, int* K, int* L,
                       int* n_quad_q);
hg_status hg_model_validate(const hg_model* model);

/* Basis and quadrature. */
hg_status hg_eval_potential(const hg_model* model, double q, double* out);
hg_status hg_eval_G(const hg_model* model, int k, double q, double* out);
hg_status hg_eval_H(int l, double p, double beta, double* out);
hg_status hg_partition_function(const hg_model* model, double* out);
/* Writes 2K-1 values; capacity must be at least that. */
hg_status hg_fourier_coefficients_of_one(const hg_model* model, double* out, int capacity);

/* Coefficient vectors. Observable spec: "velocity", "sobolev" or
 * "file:<path>" (CSV rows k,l,value). */
hg_status hg_vector_observable(const hg_model* model, const char* observable, hg_vector** out);
hg_status hg_vector_read_csv(const char* path, hg_vector** out);
void hg_vector_destroy(hg_vector* vector);
hg_status hg_vector_shape(const hg_vector* vector, int* K, int* L, int* size);
hg_status hg_vector_values(const hg_vector* vector, double* out, int capacity);
hg_status hg_vector_write_csv(const hg_vector* vector, const char* path);
hg_status hg_vector_truncate(const hg_vector* vector, int K, int L, hg_vector** out);

/* Assembly. which: "rigidity", "augmented", "Q", "P". */
hg_status hg_system_assemble(const hg_model* model, hg_system** out);
void hg_system_destroy(hg_system* system);
hg_status hg_system_size(const hg_system* system, int* size, int64_t* nnz_rigidity);
hg_status hg_system_export_matrix(const hg_system* system, const char* which, const char* path);

/* Solver. */
typedef struct {
  int n;
  int lower_bandwidth;
  int upper_bandwidth;
  int64_t nnz_a;
  int64_t nnz_l;
  int64_t nnz_u;
  int64_t fill_in;
  double min_pivot;
  double max_pivot;
  double norm1;
  double growth_factor;
  double condition_estimate;
  int64_t factor_bytes;
} hg_factor_stats;

hg_status hg_solve(const hg_system* system, const hg_vector* rhs, hg_solution** out);
void hg_solution_destroy(hg_solution* solution);
hg_status hg_solution_info(const hg_solution* solution, double* alpha, double* residual,
                           double* mean_constraint);
hg_status hg_solution_factor_stats(const hg_solution* solution, hg_factor_stats* out);
hg_status hg_solution_coefficients(const hg_solution* solution, hg_vector** out);
/* D = <X, Y> with Y the velocity observable of the system. */
hg_status hg_self_diffusion(const hg_system* system, const hg_solution* solution, double* out);

hg_status hg_reference_solution(const hg_model* model, int K_ref, int L_ref,
                                const char* observable, const char* cache_dir, hg_vector** out,
                                double* residual, int* from_cache);

/* Sweeps. axis: "K", "L" or "gamma". */
hg_status hg_sweep_run(const hg_model* fixed, const char* axis, const double* grid, int n_grid,
                       const char* observable, int K_ref, int L_ref, const char* cache_dir,
                       int with_gap, int threads, hg_sweep** out);
void hg_sweep_destroy(hg_sweep* sweep);
hg_status hg_sweep_counts(const hg_sweep* sweep, int* n_rows, int* n_failed);
/* Row fields; missing values are NaN. */
hg_status hg_sweep_row(const hg_sweep* sweep, int row, double* value, double* approx_err,
                       double* consist_err, double* total_err, double* gap, double* diffusion,
                       double* residual, double* alpha);
hg_status hg_sweep_reference_diffusion(const hg_sweep* sweep, double* out);
hg_status hg_sweep_write_csv(const hg_sweep* sweep, const char* path);
hg_status hg_sweep_write_json(const hg_sweep* sweep, const char* path);

hg_status hg_fit_loglog_slope(const double* x, const double* err, int n, double floor,
                              double* slope, double* intercept, double* r2);
hg_status hg_fit_semilog_slope(const double* x, const double* err, int n, double floor,
                               double* slope, double* intercept, double* r2);

/* Diagnostics. K_ext = L_ext = 0 selects the default extension with its
 * convergence check; change receives the relative change (may be NULL). */
hg_status hg_tail_mass_one(const hg_model* model, int K_prime, double* out);
hg_status hg_norm_L_uK(const hg_model* model, double* computed, double* bound);
hg_status hg_norm_Lpm(const hg_model* model, int K_ext, int L_ext, double* computed,
                      double* bound, double* change);
hg_status hg_hypo_condition_norm(const hg_model* model, int K_ext, int L_ext, double* computed,
                                 double* bound, double* change);
hg_status hg_gap_correction_term(const hg_model* model, double epsilon, double* out);
hg_status hg_default_epsilon(double gamma, double eps_bar, double* out);

typedef struct {
  double gap;
  double gap_re;
  double gap_im;
  int n_dropped;
  int n_retained;
  double drop_threshold;
  double correction;
  double epsilon;
  int dense_checked;
  double dense_gap;
  double dense_relative_difference;
  int converged;
} hg_gap_summary;

/* drop_tol < 0 selects 1e-8 ||L||_1; n_eigs <= 0 selects the default. */
hg_status hg_spectral_gap(const hg_model* model, double drop_tol, int n_eigs, hg_gap** out);
void hg_gap_destroy(hg_gap* gap);
hg_status hg_gap_summary_get(const hg_gap* gap, hg_gap_summary* out);
/* kind 0: retained, 1: dropped. */
hg_status hg_gap_eigenvalue(const hg_gap* gap, int kind, int index, double* re, double* im);
const char* hg_gap_anomaly(const hg_gap* gap);

/* Monte Carlo oracle. */
typedef struct {
  double dt;
  double t_max;
  double t_corr;  /* 0: 50 / min(gamma, 1/gamma) */
  double burn_in; /* 0: 10 / min(gamma, 1/gamma) */
  int n_traj;
  uint64_t seed;
  int threads;
} hg_mc_options;

typedef struct {
  double value;
  double standard_error;
  int n_traj;
  double dt;
  double t_max;
  double t_corr;
  double burn_in;
  uint64_t seed;
  int t_corr_warning;
  double autocorrelation_at_cutoff;
  double momentum_variance;
  double momentum_variance_error;
} hg_mc_estimate;

void hg_mc_options_default(hg_mc_options* out);
const char* hg_mc_rng_identifier(void);
hg_status hg_estimate_diffusion(const hg_model* model, const hg_mc_options* options,
                                hg_mc_estimate* out);

#ifdef __cplusplus
}
#endif

#endif /* HYPOGAL_H */
