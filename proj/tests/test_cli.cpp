#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "cli/commands.hpp"

using namespace hypogal_cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "hypogal_cli_test" / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int run_binary(const std::string& args) {
  const char* exe = std::getenv("HYPOGAL_CLI");
  if (exe == nullptr) return -1;
  const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, SolveWritesCoefficientsAndSummary) {
  const fs::path dir = fresh_dir("solve");
  const CliRun r = run_cli({"solve", "--observable", "velocity", "--K", "10", "--L", "40", "--gamma", "1",
                         "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("D=0.4826655"), std::string::npos) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  ASSERT_TRUE(fs::exists(dir / "coefficients.csv"));
  const json s = read_json(dir / "solve.json");
  EXPECT_LE(s["residual"].get<double>(), 1e-10);
  const json m = read_json(dir / "manifest.json");
  EXPECT_EQ(m["schema"], "hypogal-manifest-1");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_TRUE(m.contains("timings"));
}

TEST(Cli, SweepExampleMatchesModuleSchema) {
  const fs::path dir = fresh_dir("sweep");
  const CliRun r = run_cli({"sweep", "--axis", "K", "--grid", "5,10,20,40", "--L", "500", "--observable",
                         "sobolev", "--cache-dir", HYPOGAL_TEST_CACHE, "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream csv(dir / "sweep.csv");
  std::string header, line;
  std::getline(csv, header);
  EXPECT_EQ(header, "axis,value,approx_err,consist_err,total_err,gap,diffusion,residual,alpha");
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("K,5,", 0), 0u);
  const json j = read_json(dir / "sweep.json");
  double previous = 1e300;
  for (const json& row : j["rows"]) {
    const double a = row["approx_err"].get<double>();
    EXPECT_LT(a, previous);
    EXPECT_LT(row["consist_err"].get<double>(), a);
    previous = a;
  }
}

TEST(Cli, McValidateExample) {
  const fs::path dir = fresh_dir("mc");
  const CliRun r = run_cli({"mc-validate", "--gamma", "1", "--seed", "7", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = read_json(dir / "mc_validate.json");
  EXPECT_TRUE(j["agree"].get<bool>());
  EXPECT_EQ(j["mc"]["seed"], 7);
  EXPECT_EQ(j["mc"]["n_traj"], 64);
  EXPECT_NEAR(j["spectral_diffusion"].get<double>(), 0.4827, 1e-3);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = fresh_dir("bad");
  EXPECT_EQ(run_cli({"solve", "--frobnicate", "3"}).code, 2);
  EXPECT_EQ(run_cli({"launch"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--gamma", "-1", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--K", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"sweep", "--grid", "20,10", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--observable", "file:/does/not/exist.csv", "--out", dir.string()}).code, 2);
  const CliRun usage = run_cli({"solve", "--frobnicate"});
  EXPECT_NE(usage.err.find("Usage"), std::string::npos) << usage.err;
}

TEST(Cli, BinaryExitCodes) {
  if (std::getenv("HYPOGAL_CLI") == nullptr) GTEST_SKIP() << "HYPOGAL_CLI not set";
  const fs::path dir = fresh_dir("binary");
  EXPECT_EQ(run_binary("solve --no-such-flag"), 2);
  EXPECT_EQ(run_binary("solve --K 4 --L 6 --out " + dir.string()), 0);
  EXPECT_EQ(run_binary("--version"), 0);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "K=6\nL=12\ngamma=2.5\nobservable=sobolev\n";
  const CliRun r = run_cli({"solve", "--config", (dir / "run.cfg").string(), "--L", "14", "--out",
                         (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = read_json(dir / "o" / "manifest.json");
  EXPECT_EQ(m["config"]["K"], 6);
  EXPECT_EQ(m["config"]["L"], 14);
  EXPECT_EQ(m["config"]["gamma"], 2.5);
  EXPECT_EQ(m["config"]["observable"], "sobolev");
}

TEST(Cli, ManifestReparsesToSameConfig) {
  const fs::path dir = fresh_dir("roundtrip");
  const std::vector<std::string> args{"gap", "--K", "5", "--L", "16", "--gamma", "0.5", "--vcos", "-1,0.25",
                                      "--vsin", "0.1", "--drop-tol", "1e-7", "--n-eigs", "8", "--out",
                                      dir.string(), "--threads", "1"};
  RunConfig parsed;
  std::ostringstream sink;
  ASSERT_TRUE(parse_args(args, parsed, sink));
  ASSERT_EQ(run_cli(args).code, 0);
  const RunConfig back = config_from_json(read_json(dir / "manifest.json")["config"]);
  EXPECT_TRUE(back == parsed);
  EXPECT_EQ(back.vcos, (std::vector<double>{-1.0, 0.25}));
  EXPECT_TRUE(config_from_json(to_json(back)) == back);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  auto args = [](const fs::path& d, const std::string& threads) {
    return std::vector<std::string>{"sweep", "--axis", "L", "--grid", "4,8,12", "--K", "6", "--K-ref", "8",
                                    "--L-ref", "24", "--with-gap", "--out", d.string(), "--threads", threads};
  };
  ASSERT_EQ(run_cli(args(a, "1")).code, 0);
  ASSERT_EQ(run_cli(args(b, "2")).code, 0);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  EXPECT_EQ(slurp(a / "sweep.json"), slurp(b / "sweep.json"));

  auto mc = [](const fs::path& d, const std::string& threads) {
    return std::vector<std::string>{"diffusion", "--K", "8", "--L", "20", "--out", d.string(), "--threads", threads};
  };
  ASSERT_EQ(run_cli(mc(a, "1")).code, 0);
  ASSERT_EQ(run_cli(mc(b, "3")).code, 0);
  EXPECT_EQ(slurp(a / "diffusion.json"), slurp(b / "diffusion.json"));

  auto mcv = [](const fs::path& d, const std::string& threads) {
    return std::vector<std::string>{"mc-validate", "--K", "8", "--L", "20", "--t-max", "200", "--n-traj", "4",
                                    "--seed", "11", "--out", d.string(), "--threads", threads};
  };
  ASSERT_EQ(run_cli(mcv(a, "1")).code, 0);
  ASSERT_EQ(run_cli(mcv(b, "2")).code, 0);
  EXPECT_EQ(slurp(a / "mc_validate.json"), slurp(b / "mc_validate.json"));
}

TEST(Cli, ExportMatrixAndDiagnose) {
  const fs::path dir = fresh_dir("export");
  ASSERT_EQ(run_cli({"export-matrix", "--K", "3", "--L", "4", "--matrix", "rigidity", "--out", dir.string()}).code, 0);
  std::ifstream in(dir / "rigidity.mtx");
  std::string banner, dims;
  std::getline(in, banner);
  EXPECT_EQ(banner.rfind("%%MatrixMarket", 0), 0u);
  while (std::getline(in, dims) && dims.rfind('%', 0) == 0) {
  }
  std::istringstream ds(dims);
  int rows = 0, cols = 0;
  ds >> rows >> cols;
  EXPECT_EQ(rows, 20);
  EXPECT_EQ(cols, 20);

  ASSERT_EQ(run_cli({"diagnose", "--K", "4", "--L", "6", "--out", dir.string()}).code, 0);
  const json d = read_json(dir / "diagnose.json");
  EXPECT_TRUE(d.contains("norm_Lpm"));
}
