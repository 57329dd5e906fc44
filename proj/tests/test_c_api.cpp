#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hypogal/hypogal.h"

namespace fs = std::filesystem;

namespace {

struct ModelHandle {
  hg_model* m = nullptr;
  ModelHandle() { EXPECT_EQ(hg_model_create(&m), HG_OK); }
  ~ModelHandle() { hg_model_destroy(m); }
};

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_NE(std::string(hg_version()), "");
  EXPECT_STREQ(hg_status_name(HG_OK), "ok");
  EXPECT_STRNE(hg_status_name(HG_ERR_SINGULAR), hg_status_name(HG_ERR_IO));
}

TEST(CApi, ModelDefaultsAndValidation) {
  ModelHandle h;
  double beta = 0, gamma = 0;
  int K = 0, L = 0, nq = 0;
  ASSERT_EQ(hg_model_get(h.m, &beta, &gamma, &K, &L, &nq), HG_OK);
  EXPECT_EQ(beta, 1.0);
  EXPECT_EQ(gamma, 1.0);
  EXPECT_EQ(K, 10);
  EXPECT_EQ(L, 20);
  EXPECT_EQ(nq, 1024);
  EXPECT_EQ(hg_model_validate(h.m), HG_OK);

  EXPECT_EQ(hg_model_set_beta(h.m, -1.0), HG_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(hg_last_error()), "");
  EXPECT_EQ(hg_model_set_modes(h.m, 0, 5), HG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(hg_model_set_gamma(h.m, NAN), HG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(hg_model_get(nullptr, &beta, &gamma, &K, &L, &nq), HG_ERR_INVALID_ARGUMENT);

  double v = 0.0;
  ASSERT_EQ(hg_eval_potential(h.m, M_PI, &v), HG_OK);
  EXPECT_NEAR(v, 2.0, 1e-15);
  ASSERT_EQ(hg_partition_function(h.m, &v), HG_OK);
  EXPECT_NEAR(v, 2.0 * M_PI * std::exp(-1.0) * std::cyl_bessel_i(0, 1.0), 1e-12);
}

TEST(CApi, FourierCoefficientsCapacity) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 3, 4), HG_OK);
  std::vector<double> g(5);
  EXPECT_EQ(hg_fourier_coefficients_of_one(h.m, g.data(), 4), HG_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(hg_fourier_coefficients_of_one(h.m, g.data(), 5), HG_OK);
  EXPECT_NEAR(g[0], 0.945, 5e-4);
  EXPECT_EQ(g[1], 0.0);
}

TEST(CApi, SolveAndDiffusion) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 10, 40), HG_OK);
  hg_system* sys = nullptr;
  hg_vector* y = nullptr;
  hg_solution* sol = nullptr;
  ASSERT_EQ(hg_system_assemble(h.m, &sys), HG_OK);
  ASSERT_EQ(hg_vector_observable(h.m, "velocity", &y), HG_OK);
  ASSERT_EQ(hg_solve(sys, y, &sol), HG_OK);
  double alpha, residual, mean;
  ASSERT_EQ(hg_solution_info(sol, &alpha, &residual, &mean), HG_OK);
  EXPECT_LE(residual, 1e-10);
  EXPECT_LE(std::abs(mean), 1e-10);
  double d = 0.0;
  ASSERT_EQ(hg_self_diffusion(sys, sol, &d), HG_OK);
  EXPECT_NEAR(d, 0.4826655, 1e-6);
  hg_factor_stats st;
  ASSERT_EQ(hg_solution_factor_stats(sol, &st), HG_OK);
  EXPECT_EQ(st.n, 19 * 40 + 1);

  hg_vector* x = nullptr;
  ASSERT_EQ(hg_solution_coefficients(sol, &x), HG_OK);
  int K, L, n;
  ASSERT_EQ(hg_vector_shape(x, &K, &L, &n), HG_OK);
  EXPECT_EQ(n, 19 * 40);
  std::vector<double> vals(n);
  EXPECT_EQ(hg_vector_values(x, vals.data(), n - 1), HG_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(hg_vector_values(x, vals.data(), n), HG_OK);

  hg_vector* wrong = nullptr;
  hg_model* other = nullptr;
  ASSERT_EQ(hg_model_clone(h.m, &other), HG_OK);
  ASSERT_EQ(hg_model_set_modes(other, 4, 4), HG_OK);
  ASSERT_EQ(hg_vector_observable(other, "sobolev", &wrong), HG_OK);
  hg_solution* bad = nullptr;
  EXPECT_EQ(hg_solve(sys, wrong, &bad), HG_ERR_SHAPE_MISMATCH);
  EXPECT_EQ(bad, nullptr);
  hg_vector* none = nullptr;
  EXPECT_EQ(hg_vector_observable(other, "rough", &none), HG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(none, nullptr);

  hg_vector_destroy(wrong);
  hg_model_destroy(other);
  hg_vector_destroy(x);
  hg_solution_destroy(sol);
  hg_vector_destroy(y);
  hg_system_destroy(sys);
}

TEST(CApi, ExportMatrix) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 3, 4), HG_OK);
  hg_system* sys = nullptr;
  ASSERT_EQ(hg_system_assemble(h.m, &sys), HG_OK);
  const std::string path = (fs::temp_directory_path() / "hypogal_capi.mtx").string();
  ASSERT_EQ(hg_system_export_matrix(sys, "augmented", path.c_str()), HG_OK);
  std::ifstream in(path);
  std::string banner;
  std::getline(in, banner);
  EXPECT_EQ(banner.rfind("%%MatrixMarket matrix coordinate real", 0), 0u);
  EXPECT_EQ(hg_system_export_matrix(sys, "nonsense", path.c_str()), HG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(hg_system_export_matrix(sys, "rigidity", "/nonexistent-dir/x.mtx"), HG_ERR_IO);
  hg_system_destroy(sys);
}

TEST(CApi, SpectralGap) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 6, 20), HG_OK);
  hg_gap* g = nullptr;
  ASSERT_EQ(hg_spectral_gap(h.m, -1.0, 0, &g), HG_OK);
  hg_gap_summary s;
  ASSERT_EQ(hg_gap_summary_get(g, &s), HG_OK);
  EXPECT_GT(s.gap, 0.5);
  EXPECT_LT(s.gap, 1.0);
  EXPECT_EQ(s.n_dropped, 1);
  EXPECT_TRUE(s.dense_checked);
  double re, im;
  ASSERT_EQ(hg_gap_eigenvalue(g, 1, 0, &re, &im), HG_OK);
  EXPECT_LE(std::hypot(re, im), s.drop_threshold);
  EXPECT_EQ(hg_gap_eigenvalue(g, 0, s.n_retained, &re, &im), HG_ERR_INVALID_ARGUMENT);
  EXPECT_NE(hg_gap_anomaly(g), nullptr);
  hg_gap_destroy(g);
}

TEST(CApi, Diagnostics) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 4, 6), HG_OK);
  double c, b, change;
  ASSERT_EQ(hg_norm_Lpm(h.m, 0, 0, &c, &b, &change), HG_OK);
  EXPECT_LE(c, b);
  ASSERT_EQ(hg_hypo_condition_norm(h.m, 0, 0, &c, &b, nullptr), HG_OK);
  EXPECT_LE(c, b);
  ASSERT_EQ(hg_norm_L_uK(h.m, &c, &b), HG_OK);
  EXPECT_LE(c, b);
  double e;
  ASSERT_EQ(hg_default_epsilon(10.0, 0.1, &e), HG_OK);
  EXPECT_NEAR(e, 0.01, 1e-15);
}

TEST(CApi, SweepAndSlopes) {
  ModelHandle h;
  ASSERT_EQ(hg_model_set_modes(h.m, 4, 30), HG_OK);
  const double grid[] = {3, 5, 8};
  hg_sweep* s = nullptr;
  ASSERT_EQ(hg_sweep_run(h.m, "K", grid, 3, "sobolev", 16, 30, "", 0, 1, &s), HG_OK);
  int rows, failed;
  ASSERT_EQ(hg_sweep_counts(s, &rows, &failed), HG_OK);
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(failed, 0);
  double value, approx, consist, total, gap, diff, res, alpha;
  ASSERT_EQ(hg_sweep_row(s, 2, &value, &approx, &consist, &total, &gap, &diff, &res, &alpha), HG_OK);
  EXPECT_EQ(value, 8.0);
  EXPECT_GT(approx, 0.0);
  EXPECT_TRUE(std::isnan(gap));
  EXPECT_EQ(hg_sweep_row(s, 3, &value, &approx, &consist, &total, &gap, &diff, &res, &alpha),
            HG_ERR_INVALID_ARGUMENT);
  hg_sweep_destroy(s);

  const double x[] = {1, 2, 4}, err[] = {1, 0.25, 0.0625};
  double slope, icpt, r2;
  ASSERT_EQ(hg_fit_loglog_slope(x, err, 3, 0.0, &slope, &icpt, &r2), HG_OK);
  EXPECT_NEAR(slope, -2.0, 1e-12);
  EXPECT_EQ(hg_fit_loglog_slope(x, err, 1, 0.0, &slope, &icpt, &r2), HG_ERR_INVALID_ARGUMENT);
}

TEST(CApi, MonteCarlo) {
  hg_mc_options o;
  hg_mc_options_default(&o);
  EXPECT_EQ(o.dt, 1e-2);
  EXPECT_EQ(o.t_max, 1e4);
  EXPECT_EQ(o.n_traj, 64);
  EXPECT_NE(std::string(hg_mc_rng_identifier()), "");
  ModelHandle h;
  o.t_max = 200.0;
  o.n_traj = 4;
  hg_mc_estimate a, b;
  ASSERT_EQ(hg_estimate_diffusion(h.m, &o, &a), HG_OK);
  ASSERT_EQ(hg_estimate_diffusion(h.m, &o, &b), HG_OK);
  EXPECT_EQ(a.value, b.value);
  EXPECT_GT(a.standard_error, 0.0);
  o.n_traj = 1;
  EXPECT_EQ(hg_estimate_diffusion(h.m, &o, &a), HG_ERR_INVALID_ARGUMENT);
}
