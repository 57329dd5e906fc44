#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hypogal/assembly.hpp"
#include "hypogal/diagnostics.hpp"
#include "hypogal/spectrum.hpp"
#include "oracles.hpp"

using namespace hypogal;

namespace {

ModelParams with_modes(int K, int L, double beta = 1.0, double gamma = 1.0) {
  ModelParams p;
  p.K = K;
  p.L = L;
  p.beta = beta;
  p.gamma = gamma;
  return p;
}

ModelParams flat(int K, int L) {
  ModelParams p = with_modes(K, L);
  p.potential = Potential::flat();
  return p;
}

std::vector<double> random_vector(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(TailMass, Examples) {
  for (int K : {1, 3, 10}) EXPECT_NEAR(tail_mass_one(flat(4, 4), K), 0.0, 1e-14);
  const double t2 = tail_mass_one(with_modes(4, 4), 2);
  EXPECT_GT(t2, 0.0);
  EXPECT_LT(t2, 0.05);
  // Bessel oracle: tail of sqrt2 I_n(1/2) / sqrt(I_0(1)) over n >= 2.
  double ref = 0.0;
  for (int n = 2; n < 40; ++n) ref += 2.0 * std::pow(std::cyl_bessel_i(n, 0.5), 2) / std::cyl_bessel_i(0, 1.0);
  EXPECT_NEAR(t2, std::sqrt(ref), 1e-14);
  double previous = tail_mass_one(with_modes(4, 4), 0);
  EXPECT_EQ(previous, 1.0);
  for (int K = 1; K < 20; ++K) {
    const double t = tail_mass_one(with_modes(4, 4), K);
    EXPECT_LE(t, previous);
    previous = t;
  }
}

TEST(NormLuK, FlatIsZeroAndBoundHolds) {
  EXPECT_EQ(norm_L_uK(flat(5, 4)).computed, 0.0);
  const NormCheck c = norm_L_uK(with_modes(5, 4));
  EXPECT_LE(c.computed, c.bound);
  EXPECT_GT(c.computed, 0.0);
}

TEST(NormLuK, SuperPolynomialDecay) {
  double previous = 0.0;
  for (int K = 4; K <= 16; ++K) {
    const double v = norm_L_uK(with_modes(K, 4)).computed;
    if (K > 4) EXPECT_LT(v * std::pow(K, 6), previous * std::pow(K - 1, 6)) << K;
    previous = v;
  }
}

TEST(Dpm, Examples) {
  for (int K : {2, 3, 7}) {
    std::vector<double> phi(2 * K + 3, 0.0);
    phi[0] = 1.0;
    for (double v : apply_Dpm(K, 1.0, phi)) EXPECT_EQ(v, 0.0);
    std::fill(phi.begin(), phi.end(), 0.0);
    phi[2 * K - 2] = 1.0;
    const std::vector<double> out = apply_Dpm(K, 2.0, phi);
    for (size_t j = 0; j < out.size(); ++j) EXPECT_EQ(out[j], j == size_t(2 * K - 1) ? 0.5 : 0.0);
  }
}

TEST(Dpm, MatchesExtendedBasis) {
  for (double beta : {1.0, 2.5}) {
    for (int K = 1; K <= 20; ++K) {
      ModelParams p = with_modes(K, 4, beta);
      const std::vector<double> phi = random_vector(2 * K + 5, K);
      const std::vector<double> a = apply_Dpm(K, beta, phi), b = apply_Dpm_extended(p, K, phi);
      ASSERT_EQ(a.size(), b.size());
      for (size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-10) << K << " " << j;
    }
  }
}

// ||D_K phi|| <= (beta/4) ||Pi^{q perp}_{K-1} Pi^q_K phi||: the right side is
// the mass of phi on the top frequency K-1.
TEST(Dpm, ProjectorInequality) {
  for (double beta : {1.0, 3.0}) {
    for (int K : {2, 4, 8, 16}) {
      for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> phi = random_vector(2 * K + 1, 1000 * K + trial);
        const double lhs = norm(apply_Dpm(K, beta, phi));
        const double top = std::hypot(phi[2 * K - 3], phi[2 * K - 2]);
        EXPECT_LE(lhs, beta / 4.0 * top * (1 + 1e-14));
      }
    }
  }
}

// Read literally with K+1, the projector composition is identically zero,
// which would force D = 0. That reading is not the intended one.
TEST(Dpm, LiteralProjectorCompositionVanishes) {
  const int K = 5;
  const std::vector<double> phi = random_vector(2 * K + 5, 3);
  std::vector<double> pi_k(phi.size(), 0.0);
  for (int j = 0; j < 2 * K - 1; ++j) pi_k[j] = phi[j];
  std::vector<double> perp = pi_k;
  for (int j = 0; j < 2 * (K + 1) - 1; ++j) perp[j] = 0.0;
  EXPECT_EQ(norm(perp), 0.0);
  EXPECT_GT(norm(apply_Dpm(K, 1.0, phi)), 0.0);
}

TEST(NormLpm, BoundAtTestedSizes) {
  for (auto [K, L] : {std::pair{4, 6}, {8, 12}, {16, 24}}) {
    const NormCheck c = norm_Lpm(with_modes(K, L));
    EXPECT_LE(c.computed, c.bound) << K;
    EXPECT_TRUE(c.converged);
    EXPECT_NEAR(c.bound, std::sqrt(static_cast<double>(L)) * K, 1e-12);
  }
}

// V = 0: only the Hermite raising out of l = L-1 leaves the space, with
// norm (K-1) sqrt(L/beta).
TEST(NormLpm, FlatPotentialClosedForm) {
  for (double beta : {1.0, 2.0}) {
    ModelParams p = flat(6, 9);
    p.beta = beta;
    const NormCheck c = norm_Lpm(p, 10, 12);
    EXPECT_NEAR(c.computed, 5.0 * std::sqrt(9.0 / beta), 1e-6);
    EXPECT_NEAR(c.bound, c.computed, 1e-6);
  }
}

TEST(NormLpm, IndependentOfFriction) {
  const double a = norm_Lpm(with_modes(5, 8, 1.0, 1.0), 9, 12).computed;
  const double b = norm_Lpm(with_modes(5, 8, 1.0, 7.5), 9, 12).computed;
  EXPECT_NEAR(a, b, 1e-7 * a);
  EXPECT_THROW(norm_Lpm(with_modes(5, 8), 5, 8), std::exception);
}

TEST(Lovd, DiagonalEntries) {
  const SparseMatrix m = build_one_minus_Lovd(12, 1.0);
  for (int k = 2; k < 12; ++k) {
    EXPECT_NEAR(m.at(2 * k - 1, 2 * k - 1), 1.0 + 1.0 / 8.0 + k * k, 1e-13) << k;
    EXPECT_NEAR(m.at(2 * k, 2 * k), 1.0 + 1.0 / 8.0 + k * k, 1e-13) << k;
  }
}

TEST(Lovd, SymmetricPositiveDefinite) {
  for (double beta : {1.0, 2.0}) {
    const SparseMatrix m = build_one_minus_Lovd(40, beta);
    const SparseMatrix mt = m.transpose();
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) EXPECT_NEAR(m.at(i, j), mt.at(i, j), 1e-13);
    }
    const std::vector<double> ev = dense_symmetric_eigenvalues(m);
    EXPECT_GE(*std::min_element(ev.begin(), ev.end()), 0.5);
  }
}

// <G_j, (1 - L_ovd) G_k>_nu = delta_jk + beta^{-1} <d G_j, d G_k>_nu.
TEST(Lovd, MatchesQuadrature) {
  const double beta = 1.5;
  const int K = 8;
  ModelParams p = with_modes(K, 4, beta);
  const SparseMatrix m = build_one_minus_Lovd(p, K);
  const SparseMatrix m2 = build_one_minus_Lovd(K, beta);
  const double Z = oracle::partition(oracle::cosine_potential, beta);
  const double h = 1e-3;
  auto G = [&](int j, double q) { return oracle::G(j, q, oracle::cosine_potential, beta, Z); };
  auto dG = [&](int j, double q) {
    return (8.0 * (G(j, q + h) - G(j, q - h)) - (G(j, q + 2 * h) - G(j, q - 2 * h))) / (12.0 * h);
  };
  for (int j = 0; j < 2 * K - 1; ++j) {
    for (int k = 0; k < 2 * K - 1; ++k) {
      const double ref = (j == k ? 1.0 : 0.0) +
                         oracle::nu_integral([&](double q) { return dG(j, q) * dG(k, q); },
                                             oracle::cosine_potential, beta) / beta;
      EXPECT_NEAR(m.at(j, k), ref, 1e-7) << j << "," << k;
      EXPECT_NEAR(m.at(j, k), m2.at(j, k), 1e-12);
    }
  }
}

TEST(HypoCondition, BoundAndScaling) {
  const NormCheck c = hypo_condition_norm(with_modes(8, 12));
  EXPECT_LE(c.computed, c.bound);
  EXPECT_NEAR(c.bound, (1 + std::numbers::sqrt2) / 16.0, 1e-15);
  double lo = 1e300, hi = 0.0;
  for (int K : {4, 6, 8, 12, 16}) {
    const double scaled = hypo_condition_norm(with_modes(K, 10)).computed * K;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  EXPECT_LT(hi, (1 + std::numbers::sqrt2) / 2.0);
  EXPECT_LT(hi / lo, 1.5);
}

TEST(GapCorrection, Examples) {
  const ModelParams p = with_modes(10, 20);
  EXPECT_EQ(gap_correction_term(p, 0.0), 0.0);
  EXPECT_NEAR(gap_correction_term(p, 0.1), (0.1 / 1.1) * (1 + std::numbers::sqrt2) / 20.0, 1e-6);
  const double r = gap_correction_term(with_modes(20, 20), 0.1) / gap_correction_term(with_modes(10, 20), 0.1);
  EXPECT_NEAR(r, 0.5, 1e-6);
  EXPECT_THROW(gap_correction_term(p, 1.0), std::exception);
  EXPECT_NEAR(default_epsilon(10.0), 0.01, 1e-15);
  EXPECT_NEAR(default_epsilon(0.5), 0.05, 1e-15);
}

TEST(SpectralGap, FlatPotentialBlocks) {
  ModelParams p = flat(4, 12);
  p.gamma = 1.0;
  const GapReport r = spectral_gap(p);
  EXPECT_LE(r.gap, p.gamma + 1e-10);
  EXPECT_GT(r.gap, 0.0);
  ASSERT_TRUE(r.dense_checked);
  const std::vector<std::complex<double>> all = dense_eigenvalues(build_rigidity(p));
  for (int l = 0; l < 12; ++l) {
    EXPECT_TRUE(std::any_of(all.begin(), all.end(), [&](auto z) { return std::abs(z - double(l)) < 1e-8; })) << l;
  }
}

TEST(SpectralGap, ArnoldiAgreesWithDense) {
  for (double gamma : {0.5, 1.0, 4.0}) {
    const GapReport r = spectral_gap(with_modes(6, 20, 1.0, gamma));
    ASSERT_TRUE(r.dense_checked);
    EXPECT_LE(r.dense_relative_difference, 1e-8) << gamma;
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.dropped.size(), 1u);
    EXPECT_LE(std::abs(r.dropped[0]), r.drop_threshold);
  }
}

TEST(SpectralGap, StableUnderRefinement) {
  const double a = spectral_gap(with_modes(7, 30)).gap;
  const double b = spectral_gap(with_modes(9, 40)).gap;
  EXPECT_LT(std::abs(a - b) / b, 1e-4);
}

TEST(SpectralGap, TracksMinOfFrictionAndInverse) {
  for (double gamma : {0.1, 10.0}) {
    const double g = spectral_gap(with_modes(9, 40, 1.0, gamma)).gap;
    const double m = std::min(gamma, 1.0 / gamma);
    EXPECT_GT(g, m / 2.0);
    EXPECT_LT(g, 2.0 * m);
  }
}
