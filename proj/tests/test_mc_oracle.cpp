#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hypogal/error.hpp"
#include "hypogal/mc_oracle.hpp"

using namespace hypogal;

namespace {

ModelParams flat(double gamma) {
  ModelParams p;
  p.potential = Potential::flat();
  p.gamma = gamma;
  return p;
}

McOptions short_run(int n_traj, double t_max) {
  McOptions o;
  o.n_traj = n_traj;
  o.t_max = t_max;
  return o;
}

}  // namespace

TEST(Baoab, StrongFrictionForgetsMomentum) {
  ModelParams p = flat(1e6);
  p.beta = 2.0;
  std::mt19937_64 rng(3);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    LangevinState s{1.0, 5.0};
    baoab_step(s, 0.1, p, rng);
    sum += s.p;
    sum_sq += s.p * s.p;
  }
  const double mean = sum / n, var = sum_sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 4.0 * std::sqrt(0.5 / n));
  // Var of a sample variance of N(0, 1/2): 2 (1/2)^2 / n.
  EXPECT_NEAR(var, 0.5, 4.0 * std::sqrt(0.5 / n));
}

TEST(Baoab, FreeFlight) {
  const ModelParams p = flat(1e-300);
  std::mt19937_64 rng(1);
  LangevinState s{6.0, 0.7};
  baoab_step(s, 0.5, p, rng);
  EXPECT_NEAR(s.q, 6.35 - 2.0 * std::numbers::pi, 1e-14);
  EXPECT_EQ(s.p, 0.7);
  EXPECT_THROW(baoab_step(s, 0.0, p, rng), Error);
}

TEST(Baoab, PositionStaysOnTorus) {
  ModelParams p;
  std::mt19937_64 rng(9);
  LangevinState s{0.0, -3.0};
  for (int i = 0; i < 10000; ++i) {
    baoab_step(s, 0.05, p, rng);
    ASSERT_GE(s.q, 0.0);
    ASSERT_LT(s.q, 2.0 * std::numbers::pi);
  }
}

TEST(EstimateDiffusion, MomentumVarianceIsThermal) {
  const McEstimate e = estimate_diffusion(ModelParams{}, short_run(16, 2000.0));
  EXPECT_NEAR(e.momentum_variance, 1.0, 4.0 * e.momentum_variance_error);
  EXPECT_GT(e.momentum_variance_error, 0.0);
}

TEST(EstimateDiffusion, FlatPotentialIsInverseFriction) {
  const McEstimate e = estimate_diffusion(flat(1.0), short_run(16, 2000.0));
  EXPECT_NEAR(e.value, 1.0, 3.0 * e.standard_error);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_EQ(e.t_corr, 50.0);
  EXPECT_EQ(e.burn_in, 10.0);
  EXPECT_EQ(e.per_trajectory.size(), 16u);
}

TEST(EstimateDiffusion, SeededDeterminismAcrossThreads) {
  McOptions a = short_run(6, 300.0);
  a.seed = 42;
  McOptions b = a;
  b.threads = 3;
  const McEstimate x = estimate_diffusion(ModelParams{}, a);
  const McEstimate y = estimate_diffusion(ModelParams{}, b);
  EXPECT_EQ(x.per_trajectory, y.per_trajectory);
  EXPECT_EQ(x.value, y.value);
  EXPECT_EQ(x.standard_error, y.standard_error);
  McOptions c = a;
  c.seed = 43;
  EXPECT_NE(estimate_diffusion(ModelParams{}, c).value, x.value);
  EXPECT_EQ(x.rng, kMcRngIdentifier);
  EXPECT_EQ(x.seed, 42u);
}

TEST(EstimateDiffusion, StandardErrorFollowsCentralLimit) {
  // Four times the trajectories: expected ratio 2, i.e. sqrt 2 per doubling.
  // Per-trajectory estimates have heavy tails, so average the log ratio over
  // a few seeds.
  double log_ratio = 0.0;
  const int n_seeds = 5;
  for (uint64_t seed = 1; seed <= n_seeds; ++seed) {
    McOptions a = short_run(32, 500.0), b = short_run(128, 500.0);
    a.seed = b.seed = seed;
    log_ratio += std::log(estimate_diffusion(ModelParams{}, a).standard_error /
                          estimate_diffusion(ModelParams{}, b).standard_error);
  }
  const double ratio = std::exp(log_ratio / n_seeds);
  EXPECT_GT(ratio, 1.6);
  EXPECT_LT(ratio, 2.5);
}

TEST(EstimateDiffusion, HalvingStepWithinStatisticalError) {
  McOptions coarse = short_run(16, 2000.0);
  coarse.dt = 2e-2;
  McOptions fine = short_run(16, 2000.0);
  const McEstimate a = estimate_diffusion(ModelParams{}, coarse);
  const McEstimate b = estimate_diffusion(ModelParams{}, fine);
  EXPECT_LT(std::abs(a.value - b.value), 3.0 * std::hypot(a.standard_error, b.standard_error));
}

TEST(EstimateDiffusion, ShortCutoffIsFlagged) {
  McOptions o = short_run(16, 500.0);
  o.t_corr = 0.2;
  const McEstimate e = estimate_diffusion(ModelParams{}, o);
  EXPECT_TRUE(e.t_corr_warning);
  EXPECT_GT(e.autocorrelation_at_cutoff, 0.0);
}

TEST(EstimateDiffusion, RejectsBadOptions) {
  McOptions o = short_run(1, 100.0);
  EXPECT_THROW(estimate_diffusion(ModelParams{}, o), Error);
  o = short_run(4, 10.0);
  o.t_corr = 20.0;
  EXPECT_THROW(estimate_diffusion(ModelParams{}, o), Error);
}
