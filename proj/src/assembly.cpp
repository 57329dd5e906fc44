#include "hypogal/assembly.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hypogal/error.hpp"

namespace hypogal {

ModeIndex::ModeIndex(int K, int L) : K_(K), L_(L) {
  if (K < 1 || L < 1) throw Error(ErrorCode::kInvalidArgument, "mode counts must be positive");
  if (static_cast<int64_t>(2 * static_cast<int64_t>(K) - 1) * L > INT_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "index overflow: (2K-1)L exceeds 32-bit range");
  }
}

CoefficientVector::CoefficientVector(int K, int L)
    : index_(K, L), values_(static_cast<size_t>(index_.size()), 0.0) {}

CoefficientVector::CoefficientVector(int K, int L, std::vector<double> values)
    : index_(K, L), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != index_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "coefficient count does not match (2K-1)L");
  }
}

double CoefficientVector::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double CoefficientVector::dot(const CoefficientVector& other) const {
  if (K() != other.K() || L() != other.L()) throw Error(ErrorCode::kShapeMismatch, "dot: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
  return s;
}

namespace {

// Closed-form derivatives for V = c0 + a1 cos q with coupling b = -a1 beta:
//   dG_0 = b/(2 sqrt2) G_1
//   dG_1 = b/(2 sqrt2) G_0 + G_2 - b/4 G_4
//   dG_{2k} = -b/4 G_{2k-3} - k G_{2k-1} + b/4 G_{2k+1}        (k >= 1)
//   dG_{2k-1} = b/4 G_{2k-2} + k G_{2k} - b/4 G_{2k+2}         (k >= 2)
SparseMatrix build_Q_formula(const ModelParams& params, int K) {
  const double b = -params.potential.cos_coeff(1) * params.beta;
  const int n = fourier_size(K);
  std::vector<Triplet> t;
  auto add = [&](int row, int col, double v) {
    if (row >= 0 && row < n && col < n && v != 0.0) t.push_back({row, col, v});
  };
  const double c = b / (2.0 * std::numbers::sqrt2);
  add(1, 0, c);
  add(0, 1, c);
  add(2, 1, 1.0);
  add(4, 1, -b / 4.0);
  for (int k = 1; 2 * k < n; ++k) {
    add(2 * k - 3, 2 * k, -b / 4.0);
    add(2 * k - 1, 2 * k, -static_cast<double>(k));
    add(2 * k + 1, 2 * k, b / 4.0);
  }
  for (int k = 2; 2 * k - 1 < n; ++k) {
    add(2 * k - 2, 2 * k - 1, b / 4.0);
    add(2 * k, 2 * k - 1, static_cast<double>(k));
    add(2 * k + 2, 2 * k - 1, -b / 4.0);
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix build_Q_quadrature(const ModelParams& params, int K) {
  const int deg = params.potential.degree();
  if (params.n_quad_q < ModelParams::min_quadrature(K, deg)) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_quad_q too small for quadrature assembly at K = " + std::to_string(K));
  }
  const FourierBasis basis(params);
  const int n = fourier_size(K);
  const int nq = params.n_quad_q;
  std::vector<double> gv(static_cast<size_t>(n) * nq), dv(static_cast<size_t>(n) * nq);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < nq; ++i) {
      const double q = basis.nodes()[i];
      gv[static_cast<size_t>(j) * nq + i] = basis.value(j, q) * basis.nu_weights()[i];
      dv[static_cast<size_t>(j) * nq + i] = basis.derivative(j, q);
    }
  }
  const int band = 2 * deg + 1;
  std::vector<Triplet> t;
  for (int k = 0; k < n; ++k) {
    for (int j = std::max(0, k - band); j <= std::min(n - 1, k + band); ++j) {
      double s = 0.0;
      for (int i = 0; i < nq; ++i) {
        s += gv[static_cast<size_t>(j) * nq + i] * dv[static_cast<size_t>(k) * nq + i];
      }
      // Entries that vanish analytically come out at rounding level.
      if (std::abs(s) > 1e-13) t.push_back({j, k, s});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

SparseMatrix build_Q(const ModelParams& params, int K, QMethod method) {
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (method == QMethod::kAuto) {
    method = params.potential.is_cosine_family() ? QMethod::kFormula : QMethod::kQuadrature;
  }
  if (method == QMethod::kFormula) {
    if (!params.potential.is_cosine_family()) {
      throw Error(ErrorCode::kInvalidArgument, "closed-form Q needs V = c0 + a1 cos q");
    }
    return build_Q_formula(params, K);
  }
  return build_Q_quadrature(params, K);
}

SparseMatrix build_Q(const ModelParams& params) { return build_Q(params, params.K); }

SparseMatrix build_P(int L, double beta) {
  if (L < 1) throw Error(ErrorCode::kInvalidArgument, "L must be >= 1");
  std::vector<Triplet> t;
  for (int l = 0; l + 1 < L; ++l) t.push_back({l, l + 1, std::sqrt(beta * (l + 1))});
  return SparseMatrix::from_triplets(L, L, std::move(t));
}

std::vector<double> build_N(int L) {
  std::vector<double> n(L);
  for (int l = 0; l < L; ++l) n[l] = l;
  return n;
}

SparseMatrix build_rigidity(const SparseMatrix& Q, const SparseMatrix& P,
                            const std::vector<double>& N, double beta, double gamma) {
  if (Q.rows() != Q.cols() || P.rows() != P.cols() || static_cast<int>(N.size()) != P.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "rigidity: incompatible Q, P, N");
  }
  const int nk = Q.rows();
  const int nl = P.rows();
  const ModeIndex index((nk + 1) / 2, nl);
  const std::vector<Triplet> qt = Q.to_triplets();
  const std::vector<Triplet> pt = P.to_triplets();
  std::vector<Triplet> t;
  t.reserve(2 * qt.size() * pt.size() + static_cast<size_t>(nk) * nl);
  for (const Triplet& q : qt) {
    for (const Triplet& p : pt) {
      const double v = q.value * p.value / beta;
      // -Q_{k,k'} P_{l',l}: k = q.row, k' = q.col, l' = p.row, l = p.col.
      t.push_back({index.zeta(q.row, p.col), index.zeta(q.col, p.row), -v});
      // +Q_{k',k} P_{l,l'}: k' = q.row, k = q.col, l = p.row, l' = p.col.
      t.push_back({index.zeta(q.col, p.row), index.zeta(q.row, p.col), v});
    }
  }
  for (int l = 0; l < nl; ++l) {
    for (int k = 0; k < nk; ++k) t.push_back({index.zeta(k, l), index.zeta(k, l), gamma * N[l]});
  }
  return SparseMatrix::from_triplets(index.size(), index.size(), std::move(t));
}

SparseMatrix build_rigidity(const ModelParams& params) {
  params.validate();
  return build_rigidity(build_Q(params), build_P(params.L, params.beta), build_N(params.L),
                        params.beta, params.gamma);
}

std::vector<double> build_U(const GalerkinSystem& system) {
  double s = 0.0;
  for (double v : system.g) s += v * v;
  s = std::sqrt(s);
  if (!(s > 0.0)) throw Error(ErrorCode::kAssembly, "projection of 1 vanishes");
  std::vector<double> u(static_cast<size_t>(system.index.size()), 0.0);
  for (int k = 0; k < system.index.n_fourier(); ++k) u[system.index.zeta(k, 0)] = system.g[k] / s;
  return u;
}

GalerkinSystem assemble_system(const ModelParams& params, QMethod method) {
  params.validate();
  GalerkinSystem s;
  s.params = params;
  s.index = ModeIndex(params.K, params.L);
  s.Q = build_Q(params, params.K, method);
  s.P = build_P(params.L, params.beta);
  s.N = build_N(params.L);
  s.Lmat = build_rigidity(s.Q, s.P, s.N, params.beta, params.gamma);
  s.g = fourier_coefficients_of_one(params);
  s.U = build_U(s);
  return s;
}

SparseMatrix build_augmented(const SparseMatrix& Lmat, const std::vector<double>& U) {
  if (Lmat.rows() != Lmat.cols() || static_cast<int>(U.size()) != Lmat.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "augmented: incompatible sizes");
  }
  const int m = Lmat.rows();
  std::vector<Triplet> t = Lmat.to_triplets();
  for (int i = 0; i < m; ++i) {
    if (U[i] == 0.0) continue;
    t.push_back({i, m, U[i]});
    t.push_back({m, i, U[i]});
  }
  return SparseMatrix::from_triplets(m + 1, m + 1, std::move(t));
}

CoefficientVector observable_velocity(const ModelParams& params) {
  if (params.L < 2) throw Error(ErrorCode::kInvalidArgument, "velocity observable needs L >= 2");
  CoefficientVector y(params.K, params.L);
  const std::vector<double> g = fourier_coefficients_of_one(params);
  const double scale = 1.0 / std::sqrt(params.beta);
  for (int k = 0; k < fourier_size(params.K); ++k) y.at(k, 1) = scale * g[k];
  return y;
}

CoefficientVector observable_sobolev(const ModelParams& params) {
  CoefficientVector y(params.K, params.L);
  for (int l = 0; l < params.L; ++l) {
    for (int k = 0; k < fourier_size(params.K); ++k) {
      y.at(k, l) = std::pow(std::max(1, k), -2.5) * std::pow(std::max(1, l), -1.5);
    }
  }
  return y;
}

void write_coefficients_csv(const std::string& path, const CoefficientVector& x) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << "k,l,value\n";
  char buf[96];
  for (int l = 0; l < x.L(); ++l) {
    for (int k = 0; k < x.index().n_fourier(); ++k) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", k, l, x.at(k, l));
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

namespace {

struct CsvEntry {
  int k, l;
  double v;
};

std::vector<CsvEntry> parse_coefficients(const std::string& path, int& kmax, int& lmax) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  std::vector<CsvEntry> entries;
  kmax = -1;
  lmax = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.find_first_not_of("0123456789+-.,eE \t\r") != std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    CsvEntry e{};
    if (!(ss >> e.k >> e.l >> e.v) || e.k < 0 || e.l < 0) {
      throw Error(ErrorCode::kIo, path + ":" + std::to_string(line_no) + ": expected k,l,value");
    }
    kmax = std::max(kmax, e.k);
    lmax = std::max(lmax, e.l);
    entries.push_back(e);
  }
  if (entries.empty()) throw Error(ErrorCode::kIo, path + ": no coefficients");
  return entries;
}

}  // namespace

CoefficientVector read_coefficients_csv(const std::string& path) {
  int kmax, lmax;
  const std::vector<CsvEntry> entries = parse_coefficients(path, kmax, lmax);
  const int K = (kmax + 3) / 2;
  CoefficientVector x(K, lmax + 1);
  for (const CsvEntry& e : entries) x.at(e.k, e.l) = e.v;
  return x;
}

CoefficientVector observable_from_file(const std::string& path, int K, int L) {
  int kmax, lmax;
  const std::vector<CsvEntry> entries = parse_coefficients(path, kmax, lmax);
  CoefficientVector x(K, L);
  for (const CsvEntry& e : entries) {
    if (e.k < fourier_size(K) && e.l < L) x.at(e.k, e.l) = e.v;
  }
  return x;
}

}  // namespace hypogal
