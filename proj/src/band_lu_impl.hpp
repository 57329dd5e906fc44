#pragma once

// Banded LU with partial pivoting, LAPACK gbtrf layout. Column-major band
// storage with kl extra rows for pivoting fill:
//   A(i, j) -> ab[(kl + ku + i - j) + j * ld],  ld = 2 kl + ku + 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <new>
#include <string>
#include <vector>

#include "hypogal/error.hpp"
#include "hypogal/sparse_matrix.hpp"

namespace hypogal::detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
class BandLU {
 public:
  BandLU() = default;

  static int64_t storage_bytes(int n, int kl, int ku) {
    return static_cast<int64_t>(2 * kl + ku + 1) * n * static_cast<int64_t>(sizeof(T));
  }

  // Factorizes A - shift * I. A must already be in its final ordering.
  BandLU(const SparseMatrix& a, T shift, double pivot_tol) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "LU needs a square matrix");
    n_ = a.rows();
    kl_ = a.lower_bandwidth();
    ku_ = a.upper_bandwidth();
    kv_ = kl_ + ku_;
    ld_ = 2 * kl_ + ku_ + 1;
    try {
      ab_.assign(static_cast<size_t>(ld_) * n_, T(0));
    } catch (const std::bad_alloc&) {
      throw Error(ErrorCode::kOutOfMemory,
                  "band LU needs " + std::to_string(storage_bytes(n_, kl_, ku_)) + " bytes");
    }
    ipiv_.assign(n_, 0);

    double max_row = 0.0;
    max_a_ = 0.0;
    const auto& rp = a.row_offsets();
    for (int r = 0; r < n_; ++r) {
      bool diag_seen = false;
      double row_sum = 0.0;
      for (int64_t p = rp[r]; p < rp[r + 1]; ++p) {
        const int c = a.col_indices()[p];
        T v = a.values()[p];
        if (c == r) {
          v -= shift;
          diag_seen = true;
        }
        at(r, c) = v;
        row_sum += magnitude(v);
        max_a_ = std::max(max_a_, magnitude(v));
      }
      if (!diag_seen) {
        at(r, r) = -shift;
        row_sum += magnitude(shift);
        max_a_ = std::max(max_a_, magnitude(shift));
      }
      max_row = std::max(max_row, row_sum);
    }
    const double threshold = pivot_tol * max_row;

    min_pivot_ = n_ > 0 ? INFINITY : 0.0;
    max_pivot_ = 0.0;
    int ju = 0;
    for (int j = 0; j < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);
      int p = 0;
      double best = magnitude(at(j, j));
      T* colj = &at(j, j);
      for (int i = 1; i <= km; ++i) {
        const double m = magnitude(colj[i]);
        if (m > best) {
          best = m;
          p = i;
        }
      }
      ipiv_[j] = j + p;
      if (!(best > threshold)) {
        throw Error(ErrorCode::kSingular,
                    "matrix is numerically singular: pivot " + std::to_string(best) +
                        " at column " + std::to_string(j) + " (threshold " +
                        std::to_string(threshold) + ")");
      }
      min_pivot_ = std::min(min_pivot_, best);
      max_pivot_ = std::max(max_pivot_, best);
      ju = std::max(ju, std::min(j + ku_ + p, n_ - 1));
      if (p != 0) {
        for (int c = j; c <= ju; ++c) std::swap(at(j, c), at(j + p, c));
      }
      const T inv = T(1) / at(j, j);
      for (int i = 1; i <= km; ++i) colj[i] *= inv;
      for (int c = j + 1; c <= ju; ++c) {
        const T t = at(j, c);
        if (t == T(0)) continue;
        T* colc = &at(j, c);
        for (int i = 1; i <= km; ++i) colc[i] -= colj[i] * t;
      }
    }
  }

  int size() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }
  double min_pivot() const { return min_pivot_; }
  double max_pivot() const { return max_pivot_; }

  void count_factor_nonzeros(int64_t& nnz_l, int64_t& nnz_u, double& max_u) const {
    nnz_l = 0;
    nnz_u = 0;
    max_u = 0.0;
    for (int j = 0; j < n_; ++j) {
      for (int i = std::max(0, j - kv_); i <= j; ++i) {
        const T v = entry(i, j);
        if (v != T(0)) ++nnz_u;
        max_u = std::max(max_u, magnitude(v));
      }
      const int km = std::min(kl_, n_ - 1 - j);
      for (int i = 1; i <= km; ++i) {
        if (entry(j + i, j) != T(0)) ++nnz_l;
      }
    }
  }
  double max_abs_input() const { return max_a_; }

  // Solves (A - shift I) x = b in place.
  void solve(T* b) const {
    for (int j = 0; j + 1 < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);
      const int l = ipiv_[j];
      if (l != j) std::swap(b[l], b[j]);
      const T bj = b[j];
      if (bj == T(0)) continue;
      const T* colj = &entry(j, j);
      for (int i = 1; i <= km; ++i) b[j + i] -= colj[i] * bj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      b[j] /= entry(j, j);
      const T bj = b[j];
      if (bj == T(0)) continue;
      const int i0 = std::max(0, j - kv_);
      const T* colj = &entry(i0, j);
      for (int i = i0; i < j; ++i) b[i] -= colj[i - i0] * bj;
    }
  }

  // Solves (A - shift I)^T x = b in place (plain transpose).
  void solve_transpose(T* b) const {
    for (int j = 0; j < n_; ++j) {
      const int i0 = std::max(0, j - kv_);
      const T* colj = &entry(i0, j);
      T s = b[j];
      for (int i = i0; i < j; ++i) s -= colj[i - i0] * b[i];
      b[j] = s / entry(j, j);
    }
    for (int j = n_ - 2; j >= 0; --j) {
      const int km = std::min(kl_, n_ - 1 - j);
      const T* colj = &entry(j, j);
      T s = b[j];
      for (int i = 1; i <= km; ++i) s -= colj[i] * b[j + i];
      b[j] = s;
      const int l = ipiv_[j];
      if (l != j) std::swap(b[l], b[j]);
    }
  }

 private:
  T& at(int i, int j) { return ab_[static_cast<size_t>(kv_ + i - j) + static_cast<size_t>(j) * ld_]; }
  const T& entry(int i, int j) const {
    return ab_[static_cast<size_t>(kv_ + i - j) + static_cast<size_t>(j) * ld_];
  }

  int n_ = 0, kl_ = 0, ku_ = 0, kv_ = 0, ld_ = 1;
  std::vector<T> ab_;
  std::vector<int> ipiv_;
  double min_pivot_ = 0.0, max_pivot_ = 0.0, max_a_ = 0.0;
};

}  // namespace hypogal::detail
