#include "hypogal/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypogal/error.hpp"

namespace hypogal {

SparseMatrix::SparseMatrix(int n_rows, int n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(n_rows + 1, 0) {
  if (n_rows < 0 || n_cols < 0) throw Error(ErrorCode::kInvalidArgument, "negative matrix size");
}

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         std::vector<Triplet> triplets) {
  SparseMatrix m(n_rows, n_cols);
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw Error(ErrorCode::kInvalidArgument, "triplet index out of range");
    }
    if (!std::isfinite(t.value)) throw Error(ErrorCode::kNonFinite, "non-finite matrix entry");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<int64_t> counts(n_rows, 0);
  for (size_t i = 0; i < triplets.size();) {
    size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      sum += triplets[j].value;
      ++j;
    }
    if (sum != 0.0) {
      m.col_idx_.push_back(triplets[i].col);
      m.values_.push_back(sum);
      ++counts[triplets[i].row];
    }
    i = j;
  }
  for (int r = 0; r < n_rows; ++r) m.row_ptr_[r + 1] = m.row_ptr_[r] + counts[r];
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::at(int row, int col) const {
  if (row < 0 || row >= n_rows_ || col < 0 || col >= n_cols_) {
    throw Error(ErrorCode::kInvalidArgument, "matrix index out of range");
  }
  const auto begin = col_idx_.begin() + row_ptr_[row];
  const auto end = col_idx_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  return (it != end && *it == col) ? values_[it - col_idx_.begin()] : 0.0;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != n_cols_ || static_cast<int>(y.size()) != n_rows_) {
    throw Error(ErrorCode::kShapeMismatch, "multiply: size mismatch");
  }
  for (int r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_rows_);
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != n_rows_ || static_cast<int>(y.size()) != n_cols_) {
    throw Error(ErrorCode::kShapeMismatch, "multiply_transpose: size mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (int r = 0; r < n_rows_; ++r) {
    for (int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) y[col_idx_[p]] += values_[p] * x[r];
  }
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const {
  std::vector<double> y(n_cols_);
  multiply_transpose(x, y);
  return y;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < n_rows_; ++r) {
    for (int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({r, col_idx_[p], values_[p]});
  }
  return t;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t = to_triplets();
  for (Triplet& e : t) std::swap(e.row, e.col);
  return from_triplets(n_cols_, n_rows_, std::move(t));
}

SparseMatrix SparseMatrix::permute_symmetric(const std::vector<int>& perm) const {
  if (n_rows_ != n_cols_ || static_cast<int>(perm.size()) != n_rows_) {
    throw Error(ErrorCode::kShapeMismatch, "permute_symmetric: bad permutation size");
  }
  std::vector<int> inv(n_rows_, -1);
  for (int i = 0; i < n_rows_; ++i) {
    if (perm[i] < 0 || perm[i] >= n_rows_ || inv[perm[i]] != -1) {
      throw Error(ErrorCode::kInvalidArgument, "permute_symmetric: not a permutation");
    }
    inv[perm[i]] = i;
  }
  std::vector<Triplet> t = to_triplets();
  for (Triplet& e : t) {
    e.row = inv[e.row];
    e.col = inv[e.col];
  }
  return from_triplets(n_rows_, n_cols_, std::move(t));
}

double SparseMatrix::norm1() const {
  std::vector<double> colsum(n_cols_, 0.0);
  for (size_t p = 0; p < values_.size(); ++p) colsum[col_idx_[p]] += std::abs(values_[p]);
  double m = 0.0;
  for (double v : colsum) m = std::max(m, v);
  return m;
}

double SparseMatrix::norm_inf() const {
  double m = 0.0;
  for (int r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += std::abs(values_[p]);
    m = std::max(m, s);
  }
  return m;
}

double SparseMatrix::norm_frobenius() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

int SparseMatrix::lower_bandwidth() const {
  int bw = 0;
  for (int r = 0; r < n_rows_; ++r) {
    if (row_ptr_[r] < row_ptr_[r + 1]) bw = std::max(bw, r - col_idx_[row_ptr_[r]]);
  }
  return bw;
}

int SparseMatrix::upper_bandwidth() const {
  int bw = 0;
  for (int r = 0; r < n_rows_; ++r) {
    if (row_ptr_[r] < row_ptr_[r + 1]) bw = std::max(bw, col_idx_[row_ptr_[r + 1] - 1] - r);
  }
  return bw;
}

std::vector<double> SparseMatrix::to_dense_row_major() const {
  std::vector<double> d(static_cast<size_t>(n_rows_) * n_cols_, 0.0);
  for (int r = 0; r < n_rows_; ++r) {
    for (int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      d[static_cast<size_t>(r) * n_cols_ + col_idx_[p]] = values_[p];
    }
  }
  return d;
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "matrix sum: size mismatch");
  }
  std::vector<Triplet> t = a.to_triplets();
  const std::vector<Triplet> tb = b.to_triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseMatrix operator*(double s, const SparseMatrix& a) {
  std::vector<Triplet> t = a.to_triplets();
  for (Triplet& e : t) e.value *= s;
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kShapeMismatch, "matrix product: size mismatch");
  std::vector<Triplet> t;
  const auto& ap = a.row_offsets();
  const auto& bp = b.row_offsets();
  for (int r = 0; r < a.rows(); ++r) {
    for (int64_t p = ap[r]; p < ap[r + 1]; ++p) {
      const int k = a.col_indices()[p];
      for (int64_t q = bp[k]; q < bp[k + 1]; ++q) {
        t.push_back({r, b.col_indices()[q], a.values()[p] * b.values()[q]});
      }
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  char buf[96];
  for (const Triplet& t : a.to_triplets()) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", t.row + 1, t.col + 1, t.value);
    out << buf;
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  write_matrix_market(out, a);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
    throw Error(ErrorCode::kIo, "missing MatrixMarket banner");
  }
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || field != "real") {
    throw Error(ErrorCode::kIo, "only coordinate real matrices are supported");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw Error(ErrorCode::kIo, "unsupported symmetry " + symmetry);
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream sizes(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(sizes >> rows >> cols >> nnz)) throw Error(ErrorCode::kIo, "bad MatrixMarket size line");
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (long i = 0; i < nnz; ++i) {
    long r, c;
    double v;
    if (!(in >> r >> c >> v)) throw Error(ErrorCode::kIo, "truncated MatrixMarket data");
    t.push_back({static_cast<int>(r - 1), static_cast<int>(c - 1), v});
    if (symmetric && r != c) t.push_back({static_cast<int>(c - 1), static_cast<int>(r - 1), v});
  }
  return SparseMatrix::from_triplets(static_cast<int>(rows), static_cast<int>(cols), std::move(t));
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_matrix_market(in);
}

}  // namespace hypogal
