#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hypogal/model_basis.hpp"

namespace hypogal {

struct LangevinState {
  double q = 0.0;
  double p = 0.0;
};

// One BAOAB step (half kick, half drift, exact OU, half drift, half kick).
// q is wrapped to [0, 2 pi).
void baoab_step(LangevinState& state, double dt, const ModelParams& params,
                std::mt19937_64& rng);

struct McOptions {
  double dt = 1e-2;
  double t_max = 1e4;
  double t_corr = 0.0;   // 0: 50 / min(gamma, 1/gamma)
  double burn_in = 0.0;  // 0: 10 / min(gamma, 1/gamma)
  int n_traj = 64;
  uint64_t seed = 1;
  int threads = 1;
};

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  int n_traj = 0;
  double dt = 0.0;
  double t_max = 0.0;
  double t_corr = 0.0;
  double burn_in = 0.0;
  uint64_t seed = 0;
  std::string rng;
  // Autocorrelation at the cutoff not yet below three standard errors.
  bool t_corr_warning = false;
  double autocorrelation_at_cutoff = 0.0;
  double momentum_variance = 0.0;
  double momentum_variance_error = 0.0;
  std::vector<double> per_trajectory;
};

extern const char* const kMcRngIdentifier;

// Green-Kubo estimate of D from the velocity autocorrelation.
McEstimate estimate_diffusion(const ModelParams& params, const McOptions& options = {});

// Per-trajectory generator: mt19937_64 seeded by seed_seq(seed, stream).
std::mt19937_64 make_stream(uint64_t seed, uint64_t stream);

}  // namespace hypogal
