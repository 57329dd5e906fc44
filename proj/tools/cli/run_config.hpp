#pragma once

#include <cstdint>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypogal_cli {

// Raised for anything that should exit with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

extern const char* const kCommands[7];

struct RunConfig {
  std::string command;

  // Model. V(q) = v0 + sum vcos[n-1] cos(nq) + vsin[n-1] sin(nq).
  double beta = 1.0;
  double gamma = 1.0;
  double v0 = 1.0;
  std::vector<double> vcos{-1.0};
  std::vector<double> vsin;
  int K = 10;
  int L = 20;
  int n_quad_q = 1024;
  std::string observable = "velocity";

  // sweep
  std::string axis = "K";
  std::vector<double> grid;
  int K_ref = 100;
  int L_ref = 1000;
  std::string cache_dir;
  bool with_gap = false;

  // gap
  double drop_tol = -1.0;
  int n_eigs = 16;

  // diagnose
  int K_ext = 0;
  int L_ext = 0;

  // MC
  uint64_t seed = 1;
  double dt = 1e-2;
  double t_max = 1e4;
  double t_corr = 0.0;
  double burn_in = 0.0;
  int n_traj = 64;

  // export-matrix
  std::string matrix = "augmented";

  std::string out_dir = ".";
  int threads = 1;

  bool operator==(const RunConfig& other) const = default;
};

// Throws ConfigError. Creates out_dir when missing.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

}  // namespace hypogal_cli
