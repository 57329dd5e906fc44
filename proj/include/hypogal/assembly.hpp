#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hypogal/model_basis.hpp"
#include "hypogal/sparse_matrix.hpp"

namespace hypogal {

// zeta(k, l) = k + (2K-1) l, Fourier index fastest.
class ModeIndex {
 public:
  ModeIndex() = default;
  ModeIndex(int K, int L);

  int K() const { return K_; }
  int L() const { return L_; }
  int n_fourier() const { return 2 * K_ - 1; }
  int size() const { return n_fourier() * L_; }
  int zeta(int k, int l) const { return k + n_fourier() * l; }
  std::pair<int, int> inverse(int i) const { return {i % n_fourier(), i / n_fourier()}; }

 private:
  int K_ = 1;
  int L_ = 1;
};

class CoefficientVector {
 public:
  CoefficientVector() = default;
  CoefficientVector(int K, int L);
  CoefficientVector(int K, int L, std::vector<double> values);

  int K() const { return index_.K(); }
  int L() const { return index_.L(); }
  const ModeIndex& index() const { return index_; }
  int size() const { return static_cast<int>(values_.size()); }

  double& at(int k, int l) { return values_[index_.zeta(k, l)]; }
  double at(int k, int l) const { return values_[index_.zeta(k, l)]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double norm() const;
  double dot(const CoefficientVector& other) const;

 private:
  ModeIndex index_;
  std::vector<double> values_;
};

enum class QMethod { kAuto, kFormula, kQuadrature };

// Q_{j,k} = <G_j, d_q G_k>_nu on 2K-1 Fourier modes; images beyond the
// retained modes are dropped.
SparseMatrix build_Q(const ModelParams& params, int K, QMethod method = QMethod::kAuto);
SparseMatrix build_Q(const ModelParams& params);
SparseMatrix build_P(int L, double beta);
std::vector<double> build_N(int L);

// Rigidity entries -beta^{-1} Q_{k,k'} P_{l',l} + beta^{-1} Q_{k',k} P_{l,l'}
// + gamma delta_{kk'} N_{l,l'}.
SparseMatrix build_rigidity(const SparseMatrix& Q, const SparseMatrix& P,
                            const std::vector<double>& N, double beta, double gamma);

struct GalerkinSystem {
  ModelParams params;
  ModeIndex index;
  SparseMatrix Q;
  SparseMatrix P;
  std::vector<double> N;
  SparseMatrix Lmat;
  std::vector<double> g;  // Fourier coefficients of 1
  std::vector<double> U;
};

GalerkinSystem assemble_system(const ModelParams& params, QMethod method = QMethod::kAuto);
SparseMatrix build_rigidity(const ModelParams& params);
std::vector<double> build_U(const GalerkinSystem& system);
SparseMatrix build_augmented(const SparseMatrix& Lmat, const std::vector<double>& U);

CoefficientVector observable_velocity(const ModelParams& params);
CoefficientVector observable_sobolev(const ModelParams& params);

// CSV rows "k,l,value" with a header line.
void write_coefficients_csv(const std::string& path, const CoefficientVector& x);
CoefficientVector read_coefficients_csv(const std::string& path);
// Reads coefficients and places them into a (K, L) vector, dropping modes
// outside the shape.
CoefficientVector observable_from_file(const std::string& path, int K, int L);

}  // namespace hypogal
