#include "hypogal/solver.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hypogal/error.hpp"

namespace hypogal {

namespace {

std::string describe(const ModelParams& p) {
  std::ostringstream s;
  s << "K=" << p.K << " L=" << p.L << " gamma=" << p.gamma << " beta=" << p.beta;
  return s.str();
}

int64_t available_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  int64_t value;
  std::string unit;
  while (in >> key >> value >> unit) {
    if (key == "MemAvailable:") return value * 1024;
  }
  return -1;
}

}  // namespace

PoissonSolver::PoissonSolver(const GalerkinSystem& system, const SolverOptions& options)
    : system_(system), options_(options) {
  const SparseMatrix aug = build_augmented(system_.Lmat, system_.U);
  const int64_t need = lu_memory_estimate(aug, options_.lu);
  const int64_t have = available_memory_bytes();
  if (have > 0 && need > have) {
    throw Error(ErrorCode::kOutOfMemory, "factorization needs about " + std::to_string(need) +
                                             " bytes, " + std::to_string(have) + " available (" +
                                             describe(system_.params) + ")");
  }
  try {
    factors_ = lu_factorize(aug, options_.lu);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingular) {
      throw Error(ErrorCode::kSingular,
                  "augmented matrix singular (" + describe(system_.params) + "): " + e.what());
    }
    throw;
  }
}

SolveResult PoissonSolver::solve(const CoefficientVector& Y) const {
  const ModeIndex& idx = system_.index;
  if (Y.K() != idx.K() || Y.L() != idx.L()) {
    throw Error(ErrorCode::kShapeMismatch, "observable shape differs from the system");
  }
  const int m = idx.size();
  std::vector<double> rhs(m + 1, 0.0);
  std::copy(Y.values().begin(), Y.values().end(), rhs.begin());
  SolveReport report;
  std::vector<double> x = lu_solve(factors_, rhs, &report);
  SolveResult r;
  r.alpha = x[m];
  x.resize(m);
  r.X = CoefficientVector(idx.K(), idx.L(), std::move(x));
  r.residual = report.relative_residual;
  double c = 0.0;
  for (int i = 0; i < m; ++i) c += r.X.values()[i] * system_.U[i];
  r.mean_constraint = c;
  r.factor_stats = factors_.stats();
  if (!(r.residual <= options_.residual_tol)) {
    throw Error(ErrorCode::kResidual, "relative residual " + std::to_string(r.residual) +
                                          " exceeds " + std::to_string(options_.residual_tol) +
                                          " (" + describe(system_.params) + ")");
  }
  if (!(std::abs(r.mean_constraint) <= options_.mean_tol)) {
    throw Error(ErrorCode::kResidual, "mean constraint <X,U> = " + std::to_string(r.mean_constraint) +
                                          " (" + describe(system_.params) + ")");
  }
  return r;
}

SolveResult solve_poisson(const GalerkinSystem& system, const CoefficientVector& Y,
                          const SolverOptions& options) {
  return PoissonSolver(system, options).solve(Y);
}

CoefficientVector truncate(const CoefficientVector& x, int K, int L) {
  if (K < 1 || L < 1 || K > x.K() || L > x.L()) {
    throw Error(ErrorCode::kShapeMismatch, "truncate: target shape exceeds source");
  }
  CoefficientVector y(K, L);
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < fourier_size(K); ++k) y.at(k, l) = x.at(k, l);
  }
  return y;
}

CoefficientVector embed(const CoefficientVector& x, int K, int L) {
  if (K < x.K() || L < x.L()) throw Error(ErrorCode::kShapeMismatch, "embed: target shape too small");
  CoefficientVector y(K, L);
  for (int l = 0; l < x.L(); ++l) {
    for (int k = 0; k < x.index().n_fourier(); ++k) y.at(k, l) = x.at(k, l);
  }
  return y;
}

CoefficientVector ObservableSpec::build(const ModelParams& params) const {
  switch (kind) {
    case ObservableKind::kVelocity: return observable_velocity(params);
    case ObservableKind::kSobolev: return observable_sobolev(params);
    case ObservableKind::kFile: return observable_from_file(path, params.K, params.L);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown observable");
}

ObservableSpec ObservableSpec::parse(const std::string& text) {
  ObservableSpec s;
  if (text == "velocity") {
    s.kind = ObservableKind::kVelocity;
  } else if (text == "sobolev") {
    s.kind = ObservableKind::kSobolev;
  } else if (text.rfind("file:", 0) == 0 && text.size() > 5) {
    s.kind = ObservableKind::kFile;
    s.path = text.substr(5);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "observable must be velocity, sobolev or file:<path>, got '" + text + "'");
  }
  return s;
}

}  // namespace hypogal
