#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hypogal/sparse_matrix.hpp"

namespace hypogal {

// Reverse Cuthill-McKee on the symmetrized pattern. Returns perm with
// perm[new] = old.
std::vector<int> reverse_cuthill_mckee(const SparseMatrix& a);

// Lower/upper bandwidth of P A P^T for perm[new] = old.
std::pair<int, int> permuted_bandwidth(const SparseMatrix& a, const std::vector<int>& perm);

enum class Ordering { kAuto, kRcm, kNatural };

struct LuOptions {
  // kAuto evaluates RCM and the natural order and keeps the cheaper band.
  Ordering ordering = Ordering::kAuto;
  // A pivot below pivot_tol * max_i ||row_i||_1 is reported as singular.
  double pivot_tol = 1e-14;
  bool estimate_condition = true;
};

struct FactorStats {
  int n = 0;
  std::string ordering;
  int lower_bandwidth = 0;
  int upper_bandwidth = 0;
  int64_t nnz_a = 0;
  int64_t nnz_l = 0;  // strictly lower, stored nonzeros
  int64_t nnz_u = 0;  // upper including diagonal
  int64_t fill_in = 0;
  double min_pivot = 0.0;
  double max_pivot = 0.0;
  double norm1 = 0.0;
  double growth_factor = 0.0;      // max|U| / max|A|
  double condition_estimate = 0.0; // ||A||_1 * est(||A^{-1}||_1)
  int64_t factor_bytes = 0;
};

class LUFactors {
 public:
  struct Impl;

  int size() const;
  const FactorStats& stats() const;
  const SparseMatrix& matrix() const;
  // Symmetric ordering applied before factorization (perm[new] = old).
  const std::vector<int>& ordering() const;

  // Plain triangular solves, no refinement.
  void solve_in_place(std::span<double> b) const;
  void solve_transpose_in_place(std::span<double> b) const;

 private:
  friend LUFactors lu_factorize(const SparseMatrix& a, const LuOptions& options);
  std::shared_ptr<const Impl> impl_;
};

// Band storage bytes the factorization of a would need with the chosen
// ordering; used to report memory needs before allocating.
int64_t lu_memory_estimate(const SparseMatrix& a, const LuOptions& options = {});

LUFactors lu_factorize(const SparseMatrix& a, const LuOptions& options = {});

struct SolveReport {
  double relative_residual = 0.0;  // ||Ax - b||_2 / ||b||_2 after refinement
  double initial_residual = 0.0;
};

// Solve with one step of iterative refinement.
std::vector<double> lu_solve(const LUFactors& factors, std::span<const double> b,
                             SolveReport* report = nullptr);

}  // namespace hypogal
