#include "hypogal/hypogal.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>

#include "hypogal/analysis.hpp"
#include "hypogal/diagnostics.hpp"
#include "hypogal/error.hpp"
#include "hypogal/mc_oracle.hpp"
#include "hypogal/solver.hpp"

struct hg_model {
  hypogal::ModelParams params;
};
struct hg_system {
  hypogal::GalerkinSystem system;
};
struct hg_vector {
  hypogal::CoefficientVector vec;
};
struct hg_solution {
  hypogal::SolveResult result;
};
struct hg_sweep {
  hypogal::SweepResult result;
};
struct hg_gap {
  hypogal::GapReport report;
};

namespace {

thread_local std::string last_error;

hg_status to_status(hypogal::ErrorCode code) {
  using hypogal::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return HG_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return HG_ERR_SHAPE_MISMATCH;
    case ErrorCode::kSingular: return HG_ERR_SINGULAR;
    case ErrorCode::kNotConverged: return HG_ERR_NOT_CONVERGED;
    case ErrorCode::kResidual: return HG_ERR_RESIDUAL;
    case ErrorCode::kAssembly: return HG_ERR_ASSEMBLY;
    case ErrorCode::kIo: return HG_ERR_IO;
    case ErrorCode::kCacheCorrupt: return HG_ERR_CACHE_CORRUPT;
    case ErrorCode::kOutOfMemory: return HG_ERR_OUT_OF_MEMORY;
    case ErrorCode::kNonFinite: return HG_ERR_NON_FINITE;
  }
  return HG_ERR_INTERNAL;
}

template <class F>
hg_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return HG_OK;
  } catch (const hypogal::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HG_ERR_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HG_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw hypogal::Error(hypogal::ErrorCode::kInvalidArgument, what);
}

double opt_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

extern "C" {

const char* hg_version(void) { return "1.0.0"; }
const char* hg_last_error(void) { return last_error.c_str(); }

const char* hg_status_name(hg_status status) {
  switch (status) {
    case HG_OK: return "ok";
    case HG_ERR_INTERNAL: return "internal";
    default: return hypogal::error_code_name(static_cast<hypogal::ErrorCode>(status));
  }
}

hg_status hg_model_create(hg_model** out) {
  return guarded([&] {
    require(out, "null output pointer");
    *out = new hg_model{};
  });
}

hg_status hg_model_clone(const hg_model* model, hg_model** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = new hg_model{model->params};
  });
}

void hg_model_destroy(hg_model* model) { delete model; }

hg_status hg_model_set_beta(hg_model* model, double beta) {
  return guarded([&] {
    require(model, "null model");
    require(beta > 0.0 && std::isfinite(beta), "beta must be > 0");
    model->params.beta = beta;
  });
}

hg_status hg_model_set_gamma(hg_model* model, double gamma) {
  return guarded([&] {
    require(model, "null model");
    require(gamma > 0.0 && std::isfinite(gamma), "gamma must be > 0");
    model->params.gamma = gamma;
  });
}

hg_status hg_model_set_modes(hg_model* model, int K, int L) {
  return guarded([&] {
    require(model, "null model");
    require(K >= 1 && L >= 2, "need K >= 1 and L >= 2");
    model->params.K = K;
    model->params.L = L;
  });
}

hg_status hg_model_set_quadrature(hg_model* model, int n_quad_q) {
  return guarded([&] {
    require(model, "null model");
    require(n_quad_q >= 1, "n_quad_q must be positive");
    model->params.n_quad_q = n_quad_q;
  });
}

hg_status hg_model_set_potential(hg_model* model, double c0, const double* cos_coeffs, int n_cos,
                                 const double* sin_coeffs, int n_sin) {
  return guarded([&] {
    require(model, "null model");
    require(n_cos >= 0 && n_sin >= 0, "negative coefficient count");
    require((n_cos == 0 || cos_coeffs) && (n_sin == 0 || sin_coeffs), "null coefficient array");
    std::vector<double> a(cos_coeffs, cos_coeffs + n_cos);
    std::vector<double> b(sin_coeffs, sin_coeffs + n_sin);
    model->params.potential = hypogal::Potential(c0, std::move(a), std::move(b));
  });
}

hg_status hg_model_get(const hg_model* model, double* beta, double* gamma, int* K, int* L,
                       int* n_quad_q) {
  return guarded([&] {
    require(model, "null model");
    if (beta) *beta = model->params.beta;
    if (gamma) *gamma = model->params.gamma;
    if (K) *K = model->params.K;
    if (L) *L = model->params.L;
    if (n_quad_q) *n_quad_q = model->params.n_quad_q;
  });
}

hg_status hg_model_validate(const hg_model* model) {
  return guarded([&] {
    require(model, "null model");
    model->params.validate();
  });
}

hg_status hg_eval_potential(const hg_model* model, double q, double* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = hypogal::eval_potential(model->params, q);
  });
}

hg_status hg_eval_G(const hg_model* model, int k, double q, double* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = hypogal::eval_G(k, q, model->params);
  });
}

hg_status hg_eval_H(int l, double p, double beta, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = hypogal::eval_H(l, p, beta);
  });
}

hg_status hg_partition_function(const hg_model* model, double* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = hypogal::partition_function_nu(model->params);
  });
}

hg_status hg_fourier_coefficients_of_one(const hg_model* model, double* out, int capacity) {
  return guarded([&] {
    require(model && out, "null argument");
    const std::vector<double> g = hypogal::fourier_coefficients_of_one(model->params);
    require(capacity >= static_cast<int>(g.size()), "output capacity below 2K-1");
    std::copy(g.begin(), g.end(), out);
  });
}

hg_status hg_vector_observable(const hg_model* model, const char* observable, hg_vector** out) {
  return guarded([&] {
    require(model && observable && out, "null argument");
    *out = new hg_vector{hypogal::ObservableSpec::parse(observable).build(model->params)};
  });
}

hg_status hg_vector_read_csv(const char* path, hg_vector** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new hg_vector{hypogal::read_coefficients_csv(path)};
  });
}

void hg_vector_destroy(hg_vector* vector) { delete vector; }

hg_status hg_vector_shape(const hg_vector* vector, int* K, int* L, int* size) {
  return guarded([&] {
    require(vector, "null vector");
    if (K) *K = vector->vec.K();
    if (L) *L = vector->vec.L();
    if (size) *size = vector->vec.size();
  });
}

hg_status hg_vector_values(const hg_vector* vector, double* out, int capacity) {
  return guarded([&] {
    require(vector && out, "null argument");
    require(capacity >= vector->vec.size(), "output capacity too small");
    std::copy(vector->vec.values().begin(), vector->vec.values().end(), out);
  });
}

hg_status hg_vector_write_csv(const hg_vector* vector, const char* path) {
  return guarded([&] {
    require(vector && path, "null argument");
    hypogal::write_coefficients_csv(path, vector->vec);
  });
}

hg_status hg_vector_truncate(const hg_vector* vector, int K, int L, hg_vector** out) {
  return guarded([&] {
    require(vector && out, "null argument");
    *out = new hg_vector{hypogal::truncate(vector->vec, K, L)};
  });
}

hg_status hg_system_assemble(const hg_model* model, hg_system** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = new hg_system{hypogal::assemble_system(model->params)};
  });
}

void hg_system_destroy(hg_system* system) { delete system; }

hg_status hg_system_size(const hg_system* system, int* size, int64_t* nnz_rigidity) {
  return guarded([&] {
    require(system, "null system");
    if (size) *size = system->system.index.size();
    if (nnz_rigidity) *nnz_rigidity = system->system.Lmat.nnz();
  });
}

hg_status hg_system_export_matrix(const hg_system* system, const char* which, const char* path) {
  return guarded([&] {
    require(system && which && path, "null argument");
    const std::string w = which;
    const hypogal::GalerkinSystem& s = system->system;
    if (w == "rigidity") {
      hypogal::write_matrix_market(path, s.Lmat);
    } else if (w == "augmented") {
      hypogal::write_matrix_market(path, hypogal::build_augmented(s.Lmat, s.U));
    } else if (w == "Q") {
      hypogal::write_matrix_market(path, s.Q);
    } else if (w == "P") {
      hypogal::write_matrix_market(path, s.P);
    } else {
      throw hypogal::Error(hypogal::ErrorCode::kInvalidArgument,
                           "matrix must be rigidity, augmented, Q or P");
    }
  });
}

hg_status hg_solve(const hg_system* system, const hg_vector* rhs, hg_solution** out) {
  return guarded([&] {
    require(system && rhs && out, "null argument");
    *out = new hg_solution{hypogal::solve_poisson(system->system, rhs->vec)};
  });
}

void hg_solution_destroy(hg_solution* solution) { delete solution; }

hg_status hg_solution_info(const hg_solution* solution, double* alpha, double* residual,
                           double* mean_constraint) {
  return guarded([&] {
    require(solution, "null solution");
    if (alpha) *alpha = solution->result.alpha;
    if (residual) *residual = solution->result.residual;
    if (mean_constraint) *mean_constraint = solution->result.mean_constraint;
  });
}

hg_status hg_solution_factor_stats(const hg_solution* solution, hg_factor_stats* out) {
  return guarded([&] {
    require(solution && out, "null argument");
    const hypogal::FactorStats& s = solution->result.factor_stats;
    *out = hg_factor_stats{s.n,     s.lower_bandwidth, s.upper_bandwidth, s.nnz_a,
                           s.nnz_l, s.nnz_u,           s.fill_in,         s.min_pivot,
                           s.max_pivot, s.norm1,       s.growth_factor,   s.condition_estimate,
                           s.factor_bytes};
  });
}

hg_status hg_solution_coefficients(const hg_solution* solution, hg_vector** out) {
  return guarded([&] {
    require(solution && out, "null argument");
    *out = new hg_vector{solution->result.X};
  });
}

hg_status hg_self_diffusion(const hg_system* system, const hg_solution* solution, double* out) {
  return guarded([&] {
    require(system && solution && out, "null argument");
    *out = hypogal::self_diffusion(system->system, solution->result);
  });
}

hg_status hg_reference_solution(const hg_model* model, int K_ref, int L_ref,
                                const char* observable, const char* cache_dir, hg_vector** out,
                                double* residual, int* from_cache) {
  return guarded([&] {
    require(model && observable && out, "null argument");
    const hypogal::ReferenceResult r = hypogal::reference_solution(
        model->params, K_ref, L_ref, hypogal::ObservableSpec::parse(observable),
        cache_dir ? cache_dir : "");
    *out = new hg_vector{r.X};
    if (residual) *residual = r.residual;
    if (from_cache) *from_cache = r.from_cache ? 1 : 0;
  });
}

hg_status hg_sweep_run(const hg_model* fixed, const char* axis, const double* grid, int n_grid,
                       const char* observable, int K_ref, int L_ref, const char* cache_dir,
                       int with_gap, int threads, hg_sweep** out) {
  return guarded([&] {
    require(fixed && axis && grid && observable && out, "null argument");
    require(n_grid > 0, "empty grid");
    hypogal::SweepConfig cfg;
    cfg.axis = hypogal::parse_axis(axis);
    cfg.grid.assign(grid, grid + n_grid);
    cfg.fixed = fixed->params;
    cfg.observable = hypogal::ObservableSpec::parse(observable);
    cfg.K_ref = K_ref;
    cfg.L_ref = L_ref;
    cfg.cache_dir = cache_dir ? cache_dir : "";
    cfg.with_gap = with_gap != 0;
    cfg.threads = threads;
    *out = new hg_sweep{hypogal::sweep(cfg)};
  });
}

void hg_sweep_destroy(hg_sweep* sweep) { delete sweep; }

hg_status hg_sweep_counts(const hg_sweep* sweep, int* n_rows, int* n_failed) {
  return guarded([&] {
    require(sweep, "null sweep");
    int failed = 0;
    for (const auto& r : sweep->result.rows) failed += r.error.empty() ? 0 : 1;
    if (n_rows) *n_rows = static_cast<int>(sweep->result.rows.size());
    if (n_failed) *n_failed = failed;
  });
}

hg_status hg_sweep_row(const hg_sweep* sweep, int row, double* value, double* approx_err,
                       double* consist_err, double* total_err, double* gap, double* diffusion,
                       double* residual, double* alpha) {
  return guarded([&] {
    require(sweep, "null sweep");
    require(row >= 0 && row < static_cast<int>(sweep->result.rows.size()), "row out of range");
    const hypogal::SweepRow& r = sweep->result.rows[row];
    if (value) *value = r.value;
    if (approx_err) *approx_err = opt_or_nan(r.approx_err);
    if (consist_err) *consist_err = opt_or_nan(r.consist_err);
    if (total_err) *total_err = opt_or_nan(r.total_err);
    if (gap) *gap = opt_or_nan(r.gap);
    if (diffusion) *diffusion = opt_or_nan(r.diffusion);
    if (residual) *residual = opt_or_nan(r.residual);
    if (alpha) *alpha = opt_or_nan(r.alpha);
  });
}

hg_status hg_sweep_reference_diffusion(const hg_sweep* sweep, double* out) {
  return guarded([&] {
    require(sweep && out, "null argument");
    *out = opt_or_nan(sweep->result.reference_diffusion);
  });
}

hg_status hg_sweep_write_csv(const hg_sweep* sweep, const char* path) {
  return guarded([&] {
    require(sweep && path, "null argument");
    hypogal::write_sweep_csv(path, sweep->result);
  });
}

hg_status hg_sweep_write_json(const hg_sweep* sweep, const char* path) {
  return guarded([&] {
    require(sweep && path, "null argument");
    hypogal::write_sweep_json(path, sweep->result);
  });
}

namespace {

hg_status fit(bool loglog, const double* x, const double* err, int n, double floor, double* slope,
              double* intercept, double* r2) {
  return guarded([&] {
    require(x && err && n >= 0, "null argument");
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(x[i], err[i]);
    const hypogal::SlopeFit f =
        loglog ? hypogal::fit_loglog_slope(pts, floor) : hypogal::fit_semilog_slope(pts, floor);
    if (slope) *slope = f.slope;
    if (intercept) *intercept = f.intercept;
    if (r2) *r2 = f.r2;
  });
}

}  // namespace

hg_status hg_fit_loglog_slope(const double* x, const double* err, int n, double floor,
                              double* slope, double* intercept, double* r2) {
  return fit(true, x, err, n, floor, slope, intercept, r2);
}

hg_status hg_fit_semilog_slope(const double* x, const double* err, int n, double floor,
                               double* slope, double* intercept, double* r2) {
  return fit(false, x, err, n, floor, slope, intercept, r2);
}

hg_status hg_tail_mass_one(const hg_model* model, int K_prime, double* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = hypogal::tail_mass_one(model->params, K_prime);
  });
}

hg_status hg_norm_L_uK(const hg_model* model, double* computed, double* bound) {
  return guarded([&] {
    require(model, "null model");
    const hypogal::NormCheck c = hypogal::norm_L_uK(model->params);
    if (computed) *computed = c.computed;
    if (bound) *bound = c.bound;
  });
}

hg_status hg_norm_Lpm(const hg_model* model, int K_ext, int L_ext, double* computed,
                      double* bound, double* change) {
  return guarded([&] {
    require(model, "null model");
    const hypogal::NormCheck c = (K_ext == 0 && L_ext == 0)
                                     ? hypogal::norm_Lpm(model->params)
                                     : hypogal::norm_Lpm(model->params, K_ext, L_ext);
    if (computed) *computed = c.computed;
    if (bound) *bound = c.bound;
    if (change) *change = c.extension_change;
  });
}

hg_status hg_hypo_condition_norm(const hg_model* model, int K_ext, int L_ext, double* computed,
                                 double* bound, double* change) {
  return guarded([&] {
    require(model, "null model");
    const hypogal::NormCheck c = (K_ext == 0 && L_ext == 0)
                                     ? hypogal::hypo_condition_norm(model->params)
                                     : hypogal::hypo_condition_norm(model->params, K_ext, L_ext);
    if (computed) *computed = c.computed;
    if (bound) *bound = c.bound;
    if (change) *change = c.extension_change;
  });
}

hg_status hg_gap_correction_term(const hg_model* model, double epsilon, double* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = hypogal::gap_correction_term(model->params, epsilon);
  });
}

hg_status hg_default_epsilon(double gamma, double eps_bar, double* out) {
  return guarded([&] {
    require(out, "null argument");
    require(gamma > 0.0, "gamma must be > 0");
    *out = hypogal::default_epsilon(gamma, eps_bar);
  });
}

hg_status hg_spectral_gap(const hg_model* model, double drop_tol, int n_eigs, hg_gap** out) {
  return guarded([&] {
    require(model && out, "null argument");
    hypogal::GapOptions o;
    o.drop_tol = drop_tol;
    if (n_eigs > 0) o.n_eigs = n_eigs;
    *out = new hg_gap{hypogal::spectral_gap(model->params, o)};
  });
}

void hg_gap_destroy(hg_gap* gap) { delete gap; }

hg_status hg_gap_summary_get(const hg_gap* gap, hg_gap_summary* out) {
  return guarded([&] {
    require(gap && out, "null argument");
    const hypogal::GapReport& r = gap->report;
    *out = hg_gap_summary{r.gap,
                          r.gap_eigenvalue.real(),
                          r.gap_eigenvalue.imag(),
                          static_cast<int>(r.dropped.size()),
                          static_cast<int>(r.retained.size()),
                          r.drop_threshold,
                          r.correction,
                          r.epsilon,
                          r.dense_checked ? 1 : 0,
                          r.dense_gap,
                          r.dense_relative_difference,
                          r.converged ? 1 : 0};
  });
}

hg_status hg_gap_eigenvalue(const hg_gap* gap, int kind, int index, double* re, double* im) {
  return guarded([&] {
    require(gap && re && im, "null argument");
    const auto& v = kind == 0 ? gap->report.retained : gap->report.dropped;
    require(index >= 0 && index < static_cast<int>(v.size()), "eigenvalue index out of range");
    *re = v[index].real();
    *im = v[index].imag();
  });
}

const char* hg_gap_anomaly(const hg_gap* gap) { return gap ? gap->report.anomaly.c_str() : ""; }

void hg_mc_options_default(hg_mc_options* out) {
  if (!out) return;
  const hypogal::McOptions o;
  *out = hg_mc_options{o.dt, o.t_max, o.t_corr, o.burn_in, o.n_traj, o.seed, o.threads};
}

const char* hg_mc_rng_identifier(void) { return hypogal::kMcRngIdentifier; }

hg_status hg_estimate_diffusion(const hg_model* model, const hg_mc_options* options,
                                hg_mc_estimate* out) {
  return guarded([&] {
    require(model && out, "null argument");
    hypogal::McOptions o;
    if (options) {
      o.dt = options->dt;
      o.t_max = options->t_max;
      o.t_corr = options->t_corr;
      o.burn_in = options->burn_in;
      o.n_traj = options->n_traj;
      o.seed = options->seed;
      o.threads = options->threads;
    }
    const hypogal::McEstimate e = hypogal::estimate_diffusion(model->params, o);
    *out = hg_mc_estimate{e.value,   e.standard_error, e.n_traj, e.dt,
                          e.t_max,   e.t_corr,         e.burn_in, e.seed,
                          e.t_corr_warning ? 1 : 0,    e.autocorrelation_at_cutoff,
                          e.momentum_variance,         e.momentum_variance_error};
  });
}

}  // extern "C"
