#pragma once

#include <optional>
#include <string>

#include "hypogal/assembly.hpp"
#include "hypogal/band_lu.hpp"

namespace hypogal {

struct SolveResult {
  CoefficientVector X;
  double alpha = 0.0;
  double residual = 0.0;    // augmented system, constraint row included
  double mean_constraint = 0.0;  // <X, U>
  FactorStats factor_stats;
};

struct SolverOptions {
  double residual_tol = 1e-10;
  double mean_tol = 1e-10;  // bound on |<X, U>|
  LuOptions lu;
};

// Factorizes the augmented matrix once; solves for any number of
// right-hand sides.
class PoissonSolver {
 public:
  explicit PoissonSolver(const GalerkinSystem& system, const SolverOptions& options = {});

  SolveResult solve(const CoefficientVector& Y) const;
  const GalerkinSystem& system() const { return system_; }
  const FactorStats& factor_stats() const { return factors_.stats(); }

 private:
  GalerkinSystem system_;
  SolverOptions options_;
  LUFactors factors_;
};

SolveResult solve_poisson(const GalerkinSystem& system, const CoefficientVector& Y,
                          const SolverOptions& options = {});

CoefficientVector truncate(const CoefficientVector& x, int K, int L);
// Zero-padding into a larger shape.
CoefficientVector embed(const CoefficientVector& x, int K, int L);

enum class ObservableKind { kVelocity, kSobolev, kFile };

struct ObservableSpec {
  ObservableKind kind = ObservableKind::kVelocity;
  std::string path;  // kFile only

  CoefficientVector build(const ModelParams& params) const;
  // Stable tag used in cache keys and reports.
  std::string tag() const;
  static ObservableSpec parse(const std::string& text);  // velocity | sobolev | file:<path>
};

struct ReferenceResult {
  CoefficientVector X;
  double alpha = 0.0;
  double residual = 0.0;
  double condition_estimate = 0.0;
  bool from_cache = false;
  std::string cache_path;
};

// Solves at (K_ref, L_ref) with params' potential, beta, gamma. When
// cache_dir is non-empty the coefficients are stored there keyed by
// (potential, beta, gamma, observable, K_ref, L_ref).
ReferenceResult reference_solution(const ModelParams& params, int K_ref, int L_ref,
                                   const ObservableSpec& observable,
                                   const std::string& cache_dir,
                                   const SolverOptions& options = {});

// Cache file primitives (exposed for tests).
struct ReferenceKey {
  Potential potential;
  double beta = 1.0;
  double gamma = 1.0;
  std::string observable;
  int K = 0;
  int L = 0;

  std::string file_name() const;
  bool operator==(const ReferenceKey& other) const;
};

void write_reference_cache(const std::string& path, const ReferenceKey& key,
                           const ReferenceResult& result);
// Returns nullopt when missing, corrupt, or the key differs.
std::optional<ReferenceResult> read_reference_cache(const std::string& path,
                                                    const ReferenceKey& key);

}  // namespace hypogal
