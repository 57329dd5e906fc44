#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hypogal/sparse_matrix.hpp"

namespace hypogal {

using LinearMap = std::function<void(std::span<const double> in, std::span<double> out)>;

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NormOptions {
  double tol = 1e-8;
  int restarts = 3;
  int max_iterations = 5000;
  uint64_t seed = 12345;
};

// Largest singular value of a map from R^n_cols to R^n_rows by power
// iteration on A^T A from several random starts.
NormEstimate operator_norm_2(const LinearMap& apply, const LinearMap& apply_transpose,
                             int n_cols, int n_rows, const NormOptions& options = {});
NormEstimate operator_norm_2(const SparseMatrix& a, const NormOptions& options = {});

struct EigsOptions {
  int n_eigs = 6;
  std::complex<double> shift = 0.0;
  double tol = 1e-10;
  int subspace_dim = 0;  // 0: max(40, 4 n_eigs)
  int max_restarts = 500;
  uint64_t seed = 2024;
};

struct EigsResult {
  std::vector<std::complex<double>> values;  // sorted by distance to the shift
  std::vector<double> residuals;             // ||A v - lambda v|| / ||A||_1, ||v|| = 1
  std::complex<double> shift_used = 0.0;
  int restarts = 0;
  bool converged = false;
};

// Eigenvalues of A closest to the shift via Krylov-Schur on (A - shift)^{-1}.
EigsResult eigs_shift_invert(const SparseMatrix& a, const EigsOptions& options);

// Dense references (Eigen): all eigenvalues, sorted by real part then imag.
std::vector<std::complex<double>> dense_eigenvalues(const SparseMatrix& a);
std::vector<double> dense_symmetric_eigenvalues(const SparseMatrix& a);

}  // namespace hypogal
