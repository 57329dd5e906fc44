#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "hypogal/model_basis.hpp"
#include "hypogal/sparse_matrix.hpp"

namespace hypogal {

// ||(1 - Pi_{K'}) 1||_{L^2(nu)}: root of the summed squares of the Fourier
// coefficients of 1 at indices >= 2K'-1. K' = 0 gives 1.
double tail_mass_one(const ModelParams& params, int K_prime);

struct NormCheck {
  double computed = 0.0;
  double bound = 0.0;  // NaN when no closed-form bound applies
  int K_ext = 0;
  int L_ext = 0;
  // Relative change against a larger extension (0 when not checked).
  double extension_change = 0.0;
  bool converged = true;
};

// ||L u_K|| with u_K = Pi_K 1 / ||Pi_K 1||, and its tail-mass bound.
NormCheck norm_L_uK(const ModelParams& params);

// Closed form of Pi_K^perp d_q Pi_K^q for V = 1 - cos q (K >= 2). phi holds
// at least 2K+1 Fourier coefficients; the result has the same length.
std::vector<double> apply_Dpm(int K, double beta, std::span<const double> phi);
// Same map computed from Q on an extended basis, for any potential.
std::vector<double> apply_Dpm_extended(const ModelParams& params, int K,
                                       std::span<const double> phi);

// ||(1 - Pi_KL) L Pi_KL|| on an extended (K_ext, L_ext) basis.
NormCheck norm_Lpm(const ModelParams& params, int K_ext, int L_ext);
NormCheck norm_Lpm(const ModelParams& params);  // default extension + check

// 1 - L_ovd = 1 + beta^{-1} grad_q^* grad_q in the G basis, K_ext modes.
SparseMatrix build_one_minus_Lovd(const ModelParams& params, int K_ext);
SparseMatrix build_one_minus_Lovd(int K_ext, double beta);  // V = 1 - cos q

// ||(A + A^*) L^{+-}_{KL}|| on an extended basis. The value is itself the
// norm of a truncation of the infinite-dimensional operator.
NormCheck hypo_condition_norm(const ModelParams& params, int K_ext, int L_ext);
NormCheck hypo_condition_norm(const ModelParams& params);  // default extension + check

// epsilon/(1+epsilon) [ (1+sqrt2) beta/(2K) + bound on ||L u_K|| ].
double gap_correction_term(const ModelParams& params, double epsilon);
double default_epsilon(double gamma, double eps_bar = 0.1);

struct GapOptions {
  double drop_tol = -1.0;  // < 0: 1e-8 ||Lmat||_1
  int n_eigs = 16;
  double shift = 0.0;  // 0: -0.1 min(gamma, 1/gamma)
  double tol = 1e-10;
  int dense_check_max = 2000;  // dense cross-check when (2K-1)L <= this
  double eps_bar = 0.1;
  bool force_dense = false;  // use the dense eigenvalues as the result
};

struct GapReport {
  double gap = 0.0;
  std::complex<double> gap_eigenvalue;
  std::vector<std::complex<double>> dropped;
  std::vector<std::complex<double>> retained;
  double drop_threshold = 0.0;
  double correction = 0.0;
  double epsilon = 0.0;
  int K = 0;
  int L = 0;
  double gamma = 0.0;
  double beta = 0.0;
  std::string method;
  bool dense_checked = false;
  double dense_gap = 0.0;
  double dense_relative_difference = 0.0;
  bool converged = true;
  std::string anomaly;  // empty when nothing unusual was seen
};

GapReport spectral_gap(const ModelParams& params, const GapOptions& options = {});

}  // namespace hypogal
