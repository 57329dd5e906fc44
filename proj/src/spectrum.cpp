#include "hypogal/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "band_lu_impl.hpp"
#include "hypogal/band_lu.hpp"
#include "hypogal/error.hpp"

namespace hypogal {

using cplx = std::complex<double>;

NormEstimate operator_norm_2(const LinearMap& apply, const LinearMap& apply_transpose,
                             int n_cols, int n_rows, const NormOptions& options) {
  if (n_cols <= 0 || n_rows <= 0) return {0.0, 0, true};
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n_cols), y(n_rows), z(n_cols);
  NormEstimate best;
  for (int start = 0; start < std::max(options.restarts, 1); ++start) {
    for (double& v : x) v = normal(rng);
    double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (double& v : x) v /= nx;
    double sigma = 0.0, last_change = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      apply(x, y);
      const double s_new = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
      apply_transpose(y, z);
      const double nz = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
      if (nz == 0.0) {
        sigma = s_new;
        converged = true;
        break;
      }
      for (int i = 0; i < n_cols; ++i) x[i] = z[i] / nz;
      // Geometric tail estimate: the remaining error is about
      // change * r / (1 - r), with r the ratio of successive changes.
      const double change = std::abs(s_new - sigma);
      if (it > 1 && last_change > 0.0) {
        const double r = change / last_change;
        if (r < 1.0 && change * std::max(1.0, r / (1.0 - r)) <= options.tol * s_new) {
          sigma = s_new;
          converged = true;
          break;
        }
      }
      if (it > 0 && change == 0.0) {
        sigma = s_new;
        converged = true;
        break;
      }
      last_change = change;
      sigma = s_new;
    }
    if (sigma > best.value || start == 0) {
      best.value = std::max(best.value, sigma);
      best.converged = converged;
    }
    best.iterations += it;
  }
  return best;
}

NormEstimate operator_norm_2(const SparseMatrix& a, const NormOptions& options) {
  return operator_norm_2(
      [&](std::span<const double> in, std::span<double> out) { a.multiply(in, out); },
      [&](std::span<const double> in, std::span<double> out) { a.multiply_transpose(in, out); },
      a.cols(), a.rows(), options);
}

namespace {

using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

// Eigenvector of an upper-triangular T for the diagonal entry i.
CVector triangular_eigenvector(const CMatrix& t, int i) {
  CVector y = CVector::Zero(t.rows());
  y[i] = 1.0;
  const cplx theta = t(i, i);
  const double small = 1e-14 * std::max(std::abs(theta), 1e-300);
  for (int r = i - 1; r >= 0; --r) {
    cplx s = 0.0;
    for (int c = r + 1; c <= i; ++c) s += t(r, c) * y[c];
    cplx d = t(r, r) - theta;
    if (std::abs(d) < small) d = small;
    y[r] = -s / d;
  }
  return y / y.norm();
}

// Reorders a complex Schur form T = Z^* H Z so the diagonal is sorted by
// decreasing modulus, using adjacent Givens swaps.
void sort_schur(CMatrix& t, CMatrix& z) {
  const int m = static_cast<int>(t.rows());
  for (int pass = 0; pass < m; ++pass) {
    bool swapped = false;
    for (int k = 0; k + 1 < m; ++k) {
      if (std::abs(t(k, k)) >= std::abs(t(k + 1, k + 1))) continue;
      const cplx a = t(k, k), b = t(k + 1, k + 1), h = t(k, k + 1);
      // Rotation G with G^* [[a,h],[0,b]] G = [[b,*],[0,a]].
      Eigen::Vector2cd v(h, b - a);
      const double nv = v.norm();
      if (nv == 0.0) continue;
      v /= nv;
      Eigen::Matrix2cd g;
      g << v[0], -std::conj(v[1]), v[1], std::conj(v[0]);
      t.middleCols(k, 2) = t.middleCols(k, 2) * g;
      t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
      z.middleCols(k, 2) = z.middleCols(k, 2) * g;
      t(k + 1, k) = 0.0;
      swapped = true;
    }
    if (!swapped) break;
  }
}

struct ShiftedOperator {
  detail::BandLU<cplx> lu;
  std::vector<int> perm;
  std::vector<int> inv;

  void apply(const cplx* in, cplx* out) const {
    const int n = static_cast<int>(perm.size());
    std::vector<cplx> tmp(n);
    for (int i = 0; i < n; ++i) tmp[i] = in[perm[i]];
    lu.solve(tmp.data());
    for (int i = 0; i < n; ++i) out[perm[i]] = tmp[i];
  }
};

}  // namespace

EigsResult eigs_shift_invert(const SparseMatrix& a, const EigsOptions& options) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "eigs needs a square matrix");
  const int n = a.rows();
  if (options.n_eigs < 1 || options.n_eigs > n) {
    throw Error(ErrorCode::kInvalidArgument, "n_eigs must be in [1, n]");
  }
  const double anorm = std::max(a.norm1(), 1e-300);

  // Factorize A - shift, perturbing the shift on failure.
  ShiftedOperator op;
  op.perm = reverse_cuthill_mckee(a);
  {
    std::vector<int> natural(n);
    std::iota(natural.begin(), natural.end(), 0);
    const auto [kl_r, ku_r] = permuted_bandwidth(a, op.perm);
    if (static_cast<double>(a.lower_bandwidth()) * (2 * a.lower_bandwidth() + a.upper_bandwidth()) <
        static_cast<double>(kl_r) * (2 * kl_r + ku_r)) {
      op.perm = natural;
    }
  }
  const SparseMatrix permuted = a.permute_symmetric(op.perm);
  cplx shift = options.shift;
  bool factored = false;
  for (int attempt = 0; attempt < 4 && !factored; ++attempt) {
    try {
      op.lu = detail::BandLU<cplx>(permuted, shift, 1e-14);
      factored = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingular) throw;
      shift += cplx(1e-6 * anorm * (attempt + 1), 0.0);
    }
  }
  if (!factored) throw Error(ErrorCode::kSingular, "A - shift I is singular at every perturbed shift");

  const int k_want = options.n_eigs;
  int m = options.subspace_dim > 0 ? options.subspace_dim : std::max(40, 4 * k_want);
  m = std::min(std::max(m, k_want + 2), n);
  if (m < k_want) m = k_want;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&]() {
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(normal(rng), 0.0);
    return v;
  };

  CMatrix V = CMatrix::Zero(n, m + 1);
  CMatrix H = CMatrix::Zero(m + 1, m);
  CVector v0 = random_vector();
  V.col(0) = v0 / v0.norm();
  int p = 0;  // retained Krylov-Schur size

  auto orthogonalize = [&](CVector& w, int ncols, CVector* coeffs) {
    for (int pass = 0; pass < 2; ++pass) {
      CVector h = V.leftCols(ncols).adjoint() * w;
      w -= V.leftCols(ncols) * h;
      if (coeffs) *coeffs += h;
    }
  };

  EigsResult result;
  result.shift_used = shift;
  std::vector<cplx> in(n), out(n);
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    result.restarts = restart;
    for (int j = p; j < m; ++j) {
      for (int i = 0; i < n; ++i) in[i] = V(i, j);
      op.apply(in.data(), out.data());
      CVector w = Eigen::Map<CVector>(out.data(), n);
      const double wnorm0 = w.norm();
      CVector h = CVector::Zero(j + 1);
      orthogonalize(w, j + 1, &h);
      H.block(0, j, j + 1, 1) = h;
      const double beta = w.norm();
      if (j + 1 == n) {
        H(j + 1, j) = 0.0;
        V.col(j + 1).setZero();
      } else if (beta <= 1e-12 * std::max(wnorm0, 1e-300)) {
        // Invariant subspace: continue from a fresh orthogonal direction.
        H(j + 1, j) = 0.0;
        CVector r = random_vector();
        orthogonalize(r, j + 1, nullptr);
        V.col(j + 1) = r / r.norm();
      } else {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<CMatrix> schur(H.topRows(m));
    CMatrix T = schur.matrixT();
    CMatrix Z = schur.matrixU();
    sort_schur(T, Z);
    const Eigen::Matrix<cplx, 1, Eigen::Dynamic> b = H.row(m) * Z;

    bool all_converged = true;
    for (int i = 0; i < k_want; ++i) {
      const CVector y = triangular_eigenvector(T, i);
      const double est = std::abs(b.dot(y.conjugate()));
      if (est > options.tol * std::abs(T(i, i))) {
        all_converged = false;
        break;
      }
    }

    if (all_converged || restart == options.max_restarts) {
      const CMatrix X = V.leftCols(m) * Z;
      std::vector<std::pair<cplx, double>> found;
      bool verified = true;
      for (int i = 0; i < k_want; ++i) {
        const CVector y = triangular_eigenvector(T, i);
        CVector x = X * y;
        x /= x.norm();
        const cplx lambda = shift + 1.0 / T(i, i);
        std::vector<double> xr(n), xi(n), ar(n), ai(n);
        for (int r = 0; r < n; ++r) {
          xr[r] = x[r].real();
          xi[r] = x[r].imag();
        }
        a.multiply(xr, ar);
        a.multiply(xi, ai);
        double res = 0.0;
        for (int r = 0; r < n; ++r) res += std::norm(cplx(ar[r], ai[r]) - lambda * x[r]);
        res = std::sqrt(res) / anorm;
        if (res > options.tol) verified = false;
        found.emplace_back(lambda, res);
      }
      if (verified || restart == options.max_restarts) {
        std::stable_sort(found.begin(), found.end(), [&](const auto& u, const auto& v) {
          return std::abs(u.first - shift) < std::abs(v.first - shift);
        });
        for (const auto& [lam, res] : found) {
          result.values.push_back(lam);
          result.residuals.push_back(res);
        }
        result.converged = verified;
        return result;
      }
    }

    // Thick restart: keep the leading p Schur vectors.
    p = std::min(m - 1, k_want + (m - k_want) / 2);
    if (p < k_want) p = k_want;
    CMatrix Vnew(n, m + 1);
    Vnew.setZero();
    Vnew.leftCols(p) = V.leftCols(m) * Z.leftCols(p);
    Vnew.col(p) = V.col(m);
    CMatrix Hnew = CMatrix::Zero(m + 1, m);
    Hnew.topLeftCorner(p, p) = T.topLeftCorner(p, p).triangularView<Eigen::Upper>();
    Hnew.block(p, 0, 1, p) = b.leftCols(p);
    V = std::move(Vnew);
    H = std::move(Hnew);
    if (V.col(p).norm() == 0.0) {
      CVector r = random_vector();
      orthogonalize(r, p, nullptr);
      V.col(p) = r / r.norm();
      H.block(p, 0, 1, p).setZero();
    }
  }
  return result;
}

std::vector<cplx> dense_eigenvalues(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "eigenvalues need a square matrix");
  const int n = a.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const Triplet& t : a.to_triplets()) d(t.row, t.col) = t.value;
  Eigen::EigenSolver<Eigen::MatrixXd> es(d, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::kNotConverged, "dense eigensolver failed");
  std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(v.begin(), v.end(), [](const cplx& x, const cplx& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return v;
}

std::vector<double> dense_symmetric_eigenvalues(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "eigenvalues need a square matrix");
  const int n = a.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const Triplet& t : a.to_triplets()) d(t.row, t.col) = t.value;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::kNotConverged, "dense eigensolver failed");
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return v;
}

}  // namespace hypogal
