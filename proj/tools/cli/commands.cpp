#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "hypogal/hypogal.h"

namespace hypogal_cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const char* const kCliVersion = "1.0.0";

class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Status check for calls made after validation: failures are computation
// errors except for invalid arguments, which are configuration errors.
void call(hg_status status, const char* what) {
  if (status == HG_OK) return;
  const std::string message = std::string(what) + ": " + hg_status_name(status) + ": " + hg_last_error();
  if (status == HG_ERR_INVALID_ARGUMENT) throw ConfigError(message);
  throw ComputeError(message);
}

struct ModelDeleter {
  void operator()(hg_model* p) const { hg_model_destroy(p); }
};
struct SystemDeleter {
  void operator()(hg_system* p) const { hg_system_destroy(p); }
};
struct VectorDeleter {
  void operator()(hg_vector* p) const { hg_vector_destroy(p); }
};
struct SolutionDeleter {
  void operator()(hg_solution* p) const { hg_solution_destroy(p); }
};
struct SweepDeleter {
  void operator()(hg_sweep* p) const { hg_sweep_destroy(p); }
};
struct GapDeleter {
  void operator()(hg_gap* p) const { hg_gap_destroy(p); }
};
using Model = std::unique_ptr<hg_model, ModelDeleter>;
using System = std::unique_ptr<hg_system, SystemDeleter>;
using Vector = std::unique_ptr<hg_vector, VectorDeleter>;
using Solution = std::unique_ptr<hg_solution, SolutionDeleter>;
using Sweep = std::unique_ptr<hg_sweep, SweepDeleter>;
using Gap = std::unique_ptr<hg_gap, GapDeleter>;

Model make_model(const RunConfig& c) {
  hg_model* raw = nullptr;
  call(hg_model_create(&raw), "model");
  Model m(raw);
  call(hg_model_set_beta(raw, c.beta), "beta");
  call(hg_model_set_gamma(raw, c.gamma), "gamma");
  call(hg_model_set_modes(raw, c.K, c.L), "modes");
  call(hg_model_set_quadrature(raw, c.n_quad_q), "quadrature");
  call(hg_model_set_potential(raw, c.v0, c.vcos.data(), static_cast<int>(c.vcos.size()),
                              c.vsin.data(), static_cast<int>(c.vsin.size())),
       "potential");
  call(hg_model_validate(raw), "model");
  return m;
}

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ComputeError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw ComputeError("write failed: " + path.string());
}

struct Outcome {
  std::vector<std::string> outputs;
  std::string summary;
  int exit_code = kExitOk;
};

struct Solved {
  System system;
  Solution solution;
  double alpha = 0.0, residual = 0.0, mean_constraint = 0.0;
};

Solved solve_model(const RunConfig& c, const hg_model* model) {
  Solved s;
  hg_system* sys = nullptr;
  call(hg_system_assemble(model, &sys), "assemble");
  s.system.reset(sys);
  hg_vector* y = nullptr;
  call(hg_vector_observable(model, c.observable.c_str(), &y), "observable");
  Vector Y(y);
  hg_solution* sol = nullptr;
  call(hg_solve(sys, y, &sol), "solve");
  s.solution.reset(sol);
  call(hg_solution_info(sol, &s.alpha, &s.residual, &s.mean_constraint), "solution");
  return s;
}

double diffusion_of(const Solved& s) {
  double d = 0.0;
  call(hg_self_diffusion(s.system.get(), s.solution.get(), &d), "diffusion");
  return d;
}

json model_record(const RunConfig& c) {
  return json{{"K", c.K},       {"L", c.L},       {"beta", c.beta}, {"gamma", c.gamma},
              {"v0", c.v0},     {"vcos", c.vcos}, {"vsin", c.vsin}, {"observable", c.observable}};
}

Outcome cmd_solve(const RunConfig& c, const hg_model* model) {
  Solved s = solve_model(c, model);
  hg_vector* x = nullptr;
  call(hg_solution_coefficients(s.solution.get(), &x), "coefficients");
  Vector X(x);
  const fs::path csv = fs::path(c.out_dir) / "coefficients.csv";
  call(hg_vector_write_csv(x, csv.c_str()), "write coefficients");
  hg_factor_stats st{};
  call(hg_solution_factor_stats(s.solution.get(), &st), "factor stats");

  json doc = model_record(c);
  doc["alpha"] = s.alpha;
  doc["residual"] = s.residual;
  doc["mean_constraint"] = s.mean_constraint;
  doc["factor"] = {{"n", st.n},
                   {"lower_bandwidth", st.lower_bandwidth},
                   {"upper_bandwidth", st.upper_bandwidth},
                   {"nnz_a", st.nnz_a},
                   {"nnz_l", st.nnz_l},
                   {"nnz_u", st.nnz_u},
                   {"fill_in", st.fill_in},
                   {"min_pivot", st.min_pivot},
                   {"max_pivot", st.max_pivot},
                   {"growth_factor", st.growth_factor},
                   {"condition_estimate", st.condition_estimate},
                   {"factor_bytes", st.factor_bytes}};
  std::string summary = "solve K=" + std::to_string(c.K) + " L=" + std::to_string(c.L) +
                        " gamma=" + fmt(c.gamma) + " residual=" + fmt(s.residual);
  if (c.observable == "velocity") {
    const double d = diffusion_of(s);
    doc["diffusion"] = d;
    summary += " D=" + fmt(d);
  }
  const fs::path js = fs::path(c.out_dir) / "solve.json";
  write_json(js, doc);
  return {{csv.string(), js.string()}, summary};
}

Outcome cmd_diffusion(const RunConfig& c, const hg_model* model) {
  Solved s = solve_model(c, model);
  const double d = diffusion_of(s);
  json doc = model_record(c);
  doc["diffusion"] = d;
  doc["diffusion_times_gamma"] = d * c.gamma;
  doc["residual"] = s.residual;
  doc["mean_constraint"] = s.mean_constraint;
  const fs::path js = fs::path(c.out_dir) / "diffusion.json";
  write_json(js, doc);
  return {{js.string()},
          "diffusion K=" + std::to_string(c.K) + " L=" + std::to_string(c.L) +
              " gamma=" + fmt(c.gamma) + " D=" + fmt(d) + " D*gamma=" + fmt(d * c.gamma)};
}

Outcome cmd_sweep(const RunConfig& c, const hg_model* model) {
  hg_sweep* raw = nullptr;
  call(hg_sweep_run(model, c.axis.c_str(), c.grid.data(), static_cast<int>(c.grid.size()),
                    c.observable.c_str(), c.K_ref, c.L_ref, c.cache_dir.c_str(), c.with_gap ? 1 : 0,
                    c.threads, &raw),
       "sweep");
  Sweep sw(raw);
  const fs::path csv = fs::path(c.out_dir) / "sweep.csv";
  const fs::path js = fs::path(c.out_dir) / "sweep.json";
  call(hg_sweep_write_csv(raw, csv.c_str()), "write sweep csv");
  call(hg_sweep_write_json(raw, js.c_str()), "write sweep json");
  int rows = 0, failed = 0;
  call(hg_sweep_counts(raw, &rows, &failed), "sweep counts");
  Outcome o{{csv.string(), js.string()},
            "sweep axis=" + c.axis + " rows=" + std::to_string(rows) +
                " failed=" + std::to_string(failed) + " -> " + csv.string()};
  if (failed > 0) o.exit_code = kExitCompute;
  return o;
}

Outcome cmd_gap(const RunConfig& c, const hg_model* model) {
  hg_gap* raw = nullptr;
  call(hg_spectral_gap(model, c.drop_tol, c.n_eigs, &raw), "gap");
  Gap gap(raw);
  hg_gap_summary s{};
  call(hg_gap_summary_get(raw, &s), "gap summary");
  auto eigen_list = [&](int kind, int count) {
    json list = json::array();
    for (int i = 0; i < count; ++i) {
      double re = 0.0, im = 0.0;
      call(hg_gap_eigenvalue(raw, kind, i, &re, &im), "gap eigenvalue");
      list.push_back({re, im});
    }
    return list;
  };
  json doc = model_record(c);
  doc.erase("observable");
  doc["gap"] = s.gap;
  doc["gap_eigenvalue"] = {s.gap_re, s.gap_im};
  doc["retained"] = eigen_list(0, s.n_retained);
  doc["dropped"] = eigen_list(1, s.n_dropped);
  doc["drop_threshold"] = s.drop_threshold;
  doc["correction"] = s.correction;
  doc["epsilon"] = s.epsilon;
  doc["dense_checked"] = s.dense_checked != 0;
  doc["dense_gap"] = s.dense_checked ? json(s.dense_gap) : json(nullptr);
  doc["dense_relative_difference"] = s.dense_checked ? json(s.dense_relative_difference) : json(nullptr);
  doc["converged"] = s.converged != 0;
  const std::string anomaly = hg_gap_anomaly(raw);
  doc["anomaly"] = anomaly.empty() ? json(nullptr) : json(anomaly);
  const fs::path js = fs::path(c.out_dir) / "gap.json";
  write_json(js, doc);
  Outcome o{{js.string()},
            "gap K=" + std::to_string(c.K) + " L=" + std::to_string(c.L) + " gamma=" + fmt(c.gamma) +
                " gap=" + fmt(s.gap) + " correction=" + fmt(s.correction) +
                (s.converged ? "" : " (not converged)")};
  if (!s.converged) o.exit_code = kExitCompute;
  return o;
}

Outcome cmd_diagnose(const RunConfig& c, const hg_model* model) {
  json doc = model_record(c);
  doc.erase("observable");
  int violated = 0;
  auto check = [&](const char* name, double computed, double bound, double change) {
    const bool has_bound = std::isfinite(bound);
    const bool holds = !has_bound || computed <= bound;
    violated += holds ? 0 : 1;
    doc[name] = {{"computed", computed},
                 {"bound", nan_as_null(bound)},
                 {"holds", has_bound ? json(holds) : json(nullptr)},
                 {"extension_change", change}};
  };
  double computed = 0.0, bound = 0.0, change = 0.0;
  call(hg_norm_L_uK(model, &computed, &bound), "norm_L_uK");
  check("norm_L_uK", computed, bound, 0.0);
  call(hg_norm_Lpm(model, c.K_ext, c.L_ext, &computed, &bound, &change), "norm_Lpm");
  check("norm_Lpm", computed, bound, change);
  call(hg_hypo_condition_norm(model, c.K_ext, c.L_ext, &computed, &bound, &change),
       "hypo_condition_norm");
  check("hypo_condition_norm", computed, bound, change);
  double tail = 0.0, eps = 0.0, corr = 0.0;
  call(hg_tail_mass_one(model, c.K, &tail), "tail_mass_one");
  call(hg_default_epsilon(c.gamma, 0.1, &eps), "epsilon");
  call(hg_gap_correction_term(model, eps, &corr), "gap correction");
  doc["tail_mass_one"] = tail;
  doc["epsilon"] = eps;
  doc["gap_correction"] = corr;
  doc["violations"] = violated;
  const fs::path js = fs::path(c.out_dir) / "diagnose.json";
  write_json(js, doc);
  return {{js.string()},
          "diagnose K=" + std::to_string(c.K) + " L=" + std::to_string(c.L) +
              (violated ? " violations=" + std::to_string(violated) : " all bounds hold")};
}

hg_mc_options mc_options(const RunConfig& c) {
  hg_mc_options o;
  hg_mc_options_default(&o);
  o.dt = c.dt;
  o.t_max = c.t_max;
  o.t_corr = c.t_corr;
  o.burn_in = c.burn_in;
  o.n_traj = c.n_traj;
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

Outcome cmd_mc_validate(const RunConfig& c, const hg_model* model) {
  Solved s = solve_model(c, model);
  const double spectral = diffusion_of(s);
  const hg_mc_options opts = mc_options(c);
  hg_mc_estimate e{};
  call(hg_estimate_diffusion(model, &opts, &e), "monte carlo");
  const double diff = std::abs(spectral - e.value);
  const bool agree = diff <= 3.0 * e.standard_error;
  json doc = model_record(c);
  doc["spectral_diffusion"] = spectral;
  doc["spectral_residual"] = s.residual;
  doc["mc"] = {{"diffusion", e.value},
               {"standard_error", e.standard_error},
               {"n_traj", e.n_traj},
               {"dt", e.dt},
               {"t_max", e.t_max},
               {"t_corr", e.t_corr},
               {"burn_in", e.burn_in},
               {"seed", e.seed},
               {"rng", hg_mc_rng_identifier()},
               {"t_corr_warning", e.t_corr_warning != 0},
               {"autocorrelation_at_cutoff", e.autocorrelation_at_cutoff},
               {"momentum_variance", e.momentum_variance},
               {"momentum_variance_error", e.momentum_variance_error}};
  doc["abs_difference"] = diff;
  doc["difference_in_stderr"] = e.standard_error > 0.0 ? json(diff / e.standard_error) : json(nullptr);
  doc["agree"] = agree;
  const fs::path js = fs::path(c.out_dir) / "mc_validate.json";
  write_json(js, doc);
  return {{js.string()},
          "mc-validate gamma=" + fmt(c.gamma) + " spectral D=" + fmt(spectral) + " MC D=" +
              fmt(e.value) + " +- " + fmt(e.standard_error) + (agree ? " agree" : " DISAGREE")};
}

Outcome cmd_export_matrix(const RunConfig& c, const hg_model* model) {
  hg_system* raw = nullptr;
  call(hg_system_assemble(model, &raw), "assemble");
  System sys(raw);
  const fs::path mtx = fs::path(c.out_dir) / (c.matrix + ".mtx");
  call(hg_system_export_matrix(raw, c.matrix.c_str(), mtx.c_str()), "export");
  int n = 0;
  int64_t nnz = 0;
  call(hg_system_size(raw, &n, &nnz), "size");
  return {{mtx.string()},
          "export-matrix " + c.matrix + " K=" + std::to_string(c.K) + " L=" + std::to_string(c.L) +
              " unknowns=" + std::to_string(n) + " -> " + mtx.string()};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

bool parse_args(const std::vector<std::string>& args, RunConfig& c, std::ostream& out) {
  CLI::App app{"Spectral Galerkin solver for Poisson problems of the Langevin generator."};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.set_version_flag("--version", std::string(kCliVersion) + " (library " + hg_version() + ")");
  app.get_formatter()->column_width(32);

  const std::vector<std::string> commands(std::begin(kCommands), std::end(kCommands));
  c.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  app.add_option("command", c.command, "solve | sweep | gap | diffusion | diagnose | mc-validate | export-matrix")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--beta", c.beta, "inverse temperature")->capture_default_str();
  app.add_option("--gamma", c.gamma, "friction")->capture_default_str();
  app.add_option("--v0", c.v0, "constant term of V")->capture_default_str();
  app.add_option("--vcos", c.vcos, "cosine coefficients of V, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--vsin", c.vsin, "sine coefficients of V, comma separated")->delimiter(',');
  app.add_option("--K", c.K, "Fourier modes")->capture_default_str();
  app.add_option("--L", c.L, "Hermite modes")->capture_default_str();
  app.add_option("--n-quad", c.n_quad_q, "quadrature nodes in q")->capture_default_str();
  app.add_option("--observable", c.observable, "velocity | sobolev | file:<csv>")->capture_default_str();
  app.add_option("--axis", c.axis, "sweep axis: K | L | gamma")->capture_default_str();
  app.add_option("--grid", c.grid, "sweep values, comma separated")->delimiter(',');
  app.add_option("--K-ref", c.K_ref, "reference Fourier modes")->capture_default_str();
  app.add_option("--L-ref", c.L_ref, "reference Hermite modes")->capture_default_str();
  app.add_option("--cache-dir", c.cache_dir, "reference solution cache");
  app.add_flag("--with-gap", c.with_gap, "add the spectral gap to sweep rows");
  app.add_option("--drop-tol", c.drop_tol, "near-zero eigenvalue threshold (<0: 1e-8 |L|_1)")
      ->capture_default_str();
  app.add_option("--n-eigs", c.n_eigs, "eigenvalues requested near the shift")->capture_default_str();
  app.add_option("--K-ext", c.K_ext, "diagnose extension in K (0: default)")->capture_default_str();
  app.add_option("--L-ext", c.L_ext, "diagnose extension in L (0: default)")->capture_default_str();
  app.add_option("--seed", c.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--dt", c.dt, "Monte Carlo time step")->capture_default_str();
  app.add_option("--t-max", c.t_max, "trajectory length")->capture_default_str();
  app.add_option("--t-corr", c.t_corr, "autocorrelation cutoff (0: 50/min(gamma,1/gamma))")
      ->capture_default_str();
  app.add_option("--burn-in", c.burn_in, "equilibration time (0: 10/min(gamma,1/gamma))")
      ->capture_default_str();
  app.add_option("--n-traj", c.n_traj, "trajectories")->capture_default_str();
  app.add_option("--matrix", c.matrix, "rigidity | augmented | Q | P")->capture_default_str();
  app.add_option("--out", c.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (default: available cores)");

  std::vector<const char*> argv{"hypogal-cli"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return false;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "\n\n" + app.help());
  }
  return true;
}

int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  json manifest;
  manifest["schema"] = "hypogal-manifest-1";
  manifest["config"] = to_json(c);
  manifest["versions"] = {{"cli", kCliVersion}, {"library", hg_version()}, {"mc_rng", hg_mc_rng_identifier()}};
  manifest["started_at"] = started;

  Outcome o;
  int code = kExitOk;
  try {
    const Model model = make_model(c);
    if (c.command == "solve") o = cmd_solve(c, model.get());
    if (c.command == "sweep") o = cmd_sweep(c, model.get());
    if (c.command == "gap") o = cmd_gap(c, model.get());
    if (c.command == "diffusion") o = cmd_diffusion(c, model.get());
    if (c.command == "diagnose") o = cmd_diagnose(c, model.get());
    if (c.command == "mc-validate") o = cmd_mc_validate(c, model.get());
    if (c.command == "export-matrix") o = cmd_export_matrix(c, model.get());
    code = o.exit_code;
    out << o.summary << "\n";
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitConfig;
    manifest["error"] = e.what();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kExitCompute;
    manifest["error"] = e.what();
  }
  manifest["outputs"] = o.outputs;
  manifest["summary"] = o.summary;
  manifest["exit_code"] = code;
  manifest["timings"] = {
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  try {
    write_json(fs::path(c.out_dir) / "manifest.json", manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (code == kExitOk) code = kExitCompute;
  }
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    if (!parse_args(args, config, out)) return kExitOk;
    validate(config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return execute(config, out, err);
}

}  // namespace hypogal_cli
