#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypogal/diagnostics.hpp"
#include "hypogal/solver.hpp"

namespace hypogal {

// kPiKL: errors measured against the truncation Pi_KL Phi.
// kPiKL0: against Pi_KL Phi with its component along U removed.
enum class Projector { kPiKL, kPiKL0 };

struct ErrorRecord {
  int K = 0;
  int L = 0;
  double gamma = 0.0;
  double beta = 0.0;
  double approx_err = 0.0;   // ||(1 - Pi) Phi||
  double consist_err = 0.0;  // ||Phi_KL - Pi Phi||
  double total_err = 0.0;    // ||Phi_KL - Phi||
  std::string observable;
};

// U is only read for kPiKL0.
ErrorRecord error_record(const CoefficientVector& reference, const SolveResult& result,
                         const ModelParams& params, const std::string& observable,
                         Projector projector = Projector::kPiKL,
                         const std::vector<double>* U = nullptr);

// D = <Phi, Y> for the velocity observable.
double self_diffusion(const SolveResult& result, const CoefficientVector& Y);
double self_diffusion(const GalerkinSystem& system, const SolveResult& result);

enum class SweepAxis { kK, kL, kGamma };
const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& text);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kK;
  std::vector<double> grid;
  ModelParams fixed;
  ObservableSpec observable;
  int K_ref = 100;
  int L_ref = 1000;
  std::string cache_dir;
  bool with_gap = false;
  Projector projector = Projector::kPiKL;
  int threads = 1;
};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  int K = 0;
  int L = 0;
  double gamma = 0.0;
  double beta = 0.0;
  std::optional<double> approx_err, consist_err, total_err, gap, diffusion, residual, alpha;
  std::optional<double> mean_constraint;  // <X, U>; JSON only
  std::string error;  // non-empty when the point failed
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<ReferenceResult> reference;
  std::optional<double> reference_diffusion;
  std::string observable;
};

SweepResult sweep(const SweepConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n_used = 0;
  std::vector<int> excluded;  // indices dropped as nonpositive or below the floor
};

// Least squares on (log x, log err). Points with err <= floor are excluded.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points, double floor = 0.0);
// Least squares on (x, log10 err).
SlopeFit fit_semilog_slope(const std::vector<std::pair<double, double>>& points, double floor = 0.0);

extern const char* const kSweepCsvHeader;
void write_sweep_csv(const std::string& path, const SweepResult& result);
void write_sweep_json(const std::string& path, const SweepResult& result);

}  // namespace hypogal
