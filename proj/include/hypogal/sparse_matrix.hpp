#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hypogal {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse row storage with sorted, duplicate-free column indices.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols);

  // Sums duplicates; drops entries that are exactly zero after summation.
  static SparseMatrix from_triplets(int n_rows, int n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  int64_t nnz() const { return static_cast<int64_t>(values_.size()); }

  const std::vector<int64_t>& row_offsets() const { return row_ptr_; }
  const std::vector<int>& col_indices() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  // Entry lookup by binary search; 0 when not stored.
  double at(int row, int col) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  // B(i,j) = A(perm[i], perm[j]): perm maps new index to old index.
  SparseMatrix permute_symmetric(const std::vector<int>& perm) const;
  std::vector<Triplet> to_triplets() const;

  double norm1() const;
  double norm_inf() const;
  double norm_frobenius() const;
  int lower_bandwidth() const;
  int upper_bandwidth() const;

  std::vector<double> to_dense_row_major() const;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int64_t> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix operator*(double s, const SparseMatrix& a);
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

// MatrixMarket "coordinate real general".
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(const std::string& path, const SparseMatrix& a);
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace hypogal
