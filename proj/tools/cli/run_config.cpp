#include "cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace hypogal_cli {

const char* const kCommands[7] = {"solve",    "sweep",       "gap",          "diffusion",
                                  "diagnose", "mc-validate", "export-matrix"};

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

}  // namespace

void validate(const RunConfig& c) {
  namespace fs = std::filesystem;
  check(std::find(std::begin(kCommands), std::end(kCommands), c.command) != std::end(kCommands),
        "unknown command '" + c.command + "'");
  check(positive(c.beta), "--beta must be > 0");
  check(positive(c.gamma), "--gamma must be > 0");
  check(std::isfinite(c.v0), "--v0 must be finite");
  for (double v : c.vcos) check(std::isfinite(v), "--vcos entries must be finite");
  for (double v : c.vsin) check(std::isfinite(v), "--vsin entries must be finite");
  check(c.K >= 1, "--K must be >= 1");
  check(c.L >= 2, "--L must be >= 2");
  check(c.n_quad_q >= 1, "--n-quad must be >= 1");
  check(c.threads >= 1, "--threads must be >= 1");

  const bool is_file = c.observable.rfind("file:", 0) == 0;
  check(c.observable == "velocity" || c.observable == "sobolev" || is_file,
        "--observable must be velocity, sobolev or file:<path>");
  if (is_file) {
    check(fs::is_regular_file(c.observable.substr(5)),
          "observable file not found: " + c.observable.substr(5));
  }
  if (c.command == "diffusion" || c.command == "mc-validate") {
    check(c.observable == "velocity", c.command + " needs the velocity observable");
  }

  if (c.command == "sweep") {
    check(c.axis == "K" || c.axis == "L" || c.axis == "gamma", "--axis must be K, L or gamma");
    check(!c.grid.empty(), "--grid must not be empty");
    check(std::is_sorted(c.grid.begin(), c.grid.end()), "--grid must be sorted");
    for (double v : c.grid) check(positive(v), "--grid values must be > 0");
    if (c.axis == "K") {
      for (double v : c.grid) check(v >= 1 && v == std::floor(v), "K grid needs integers >= 1");
      check(c.grid.back() <= c.K_ref && c.L <= c.L_ref, "K sweep exceeds the reference size");
    }
    if (c.axis == "L") {
      for (double v : c.grid) check(v >= 2 && v == std::floor(v), "L grid needs integers >= 2");
      check(c.grid.back() <= c.L_ref && c.K <= c.K_ref, "L sweep exceeds the reference size");
    }
  }
  check(c.K_ref >= 1 && c.L_ref >= 2, "reference size must satisfy K_ref >= 1, L_ref >= 2");
  check(c.n_eigs >= 1, "--n-eigs must be >= 1");
  check((c.K_ext == 0) == (c.L_ext == 0), "--K-ext and --L-ext go together");
  check(positive(c.dt) && positive(c.t_max), "--dt and --t-max must be > 0");
  check(c.t_corr >= 0.0 && c.burn_in >= 0.0, "--t-corr and --burn-in must be >= 0");
  check(c.n_traj >= 2, "--n-traj must be >= 2");
  check(c.matrix == "rigidity" || c.matrix == "augmented" || c.matrix == "Q" || c.matrix == "P",
        "--matrix must be rigidity, augmented, Q or P");

  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  check(fs::is_directory(c.out_dir), "cannot create output directory " + c.out_dir);
  if (!c.cache_dir.empty()) {
    fs::create_directories(c.cache_dir, ec);
    check(fs::is_directory(c.cache_dir), "cannot create cache directory " + c.cache_dir);
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"command", c.command},
                        {"beta", c.beta},
                        {"gamma", c.gamma},
                        {"v0", c.v0},
                        {"vcos", c.vcos},
                        {"vsin", c.vsin},
                        {"K", c.K},
                        {"L", c.L},
                        {"n_quad_q", c.n_quad_q},
                        {"observable", c.observable},
                        {"axis", c.axis},
                        {"grid", c.grid},
                        {"K_ref", c.K_ref},
                        {"L_ref", c.L_ref},
                        {"cache_dir", c.cache_dir},
                        {"with_gap", c.with_gap},
                        {"drop_tol", c.drop_tol},
                        {"n_eigs", c.n_eigs},
                        {"K_ext", c.K_ext},
                        {"L_ext", c.L_ext},
                        {"seed", c.seed},
                        {"dt", c.dt},
                        {"t_max", c.t_max},
                        {"t_corr", c.t_corr},
                        {"burn_in", c.burn_in},
                        {"n_traj", c.n_traj},
                        {"matrix", c.matrix},
                        {"out_dir", c.out_dir},
                        {"threads", c.threads}};
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    j.at("command").get_to(c.command);
    j.at("beta").get_to(c.beta);
    j.at("gamma").get_to(c.gamma);
    j.at("v0").get_to(c.v0);
    j.at("vcos").get_to(c.vcos);
    j.at("vsin").get_to(c.vsin);
    j.at("K").get_to(c.K);
    j.at("L").get_to(c.L);
    j.at("n_quad_q").get_to(c.n_quad_q);
    j.at("observable").get_to(c.observable);
    j.at("axis").get_to(c.axis);
    j.at("grid").get_to(c.grid);
    j.at("K_ref").get_to(c.K_ref);
    j.at("L_ref").get_to(c.L_ref);
    j.at("cache_dir").get_to(c.cache_dir);
    j.at("with_gap").get_to(c.with_gap);
    j.at("drop_tol").get_to(c.drop_tol);
    j.at("n_eigs").get_to(c.n_eigs);
    j.at("K_ext").get_to(c.K_ext);
    j.at("L_ext").get_to(c.L_ext);
    j.at("seed").get_to(c.seed);
    j.at("dt").get_to(c.dt);
    j.at("t_max").get_to(c.t_max);
    j.at("t_corr").get_to(c.t_corr);
    j.at("burn_in").get_to(c.burn_in);
    j.at("n_traj").get_to(c.n_traj);
    j.at("matrix").get_to(c.matrix);
    j.at("out_dir").get_to(c.out_dir);
    j.at("threads").get_to(c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config record: ") + e.what());
  }
  return c;
}

}  // namespace hypogal_cli
