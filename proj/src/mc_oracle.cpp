#include "hypogal/mc_oracle.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include "hypogal/error.hpp"

namespace hypogal {

const char* const kMcRngIdentifier =
    "std::mt19937_64 seeded by std::seed_seq{seed_lo, seed_hi, stream}; std::normal_distribution";

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double q) {
  q = std::fmod(q, kTwoPi);
  return q < 0.0 ? q + kTwoPi : q;
}

struct Stepper {
  const Potential& v;
  double dt, c, sigma;

  void step(LangevinState& s, std::mt19937_64& rng, std::normal_distribution<double>& normal) const {
    s.p -= 0.5 * dt * v.derivative(s.q);
    s.q += 0.5 * dt * s.p;
    s.p = c * s.p + sigma * normal(rng);
    s.q += 0.5 * dt * s.p;
    s.p -= 0.5 * dt * v.derivative(s.q);
    s.q = wrap(s.q);
  }
};

Stepper make_stepper(const ModelParams& params, double dt) {
  const double c = std::exp(-params.gamma * dt);
  return Stepper{params.potential, dt, c, std::sqrt((1.0 - c * c) / params.beta)};
}

std::mutex fftw_plan_mutex;

// Sum_t x_t x_{t+tau} for tau <= max_lag, via zero-padded FFT.
std::vector<double> lagged_products(const std::vector<double>& x, int max_lag) {
  const size_t n = x.size();
  size_t m = 1;
  while (m < 2 * n) m <<= 1;
  double* buf = fftw_alloc_real(m);
  fftw_complex* spec = fftw_alloc_complex(m / 2 + 1);
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec, buf, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), buf);
  std::fill(buf + n, buf + m, 0.0);
  fftw_execute(fwd);
  for (size_t i = 0; i < m / 2 + 1; ++i) {
    spec[i][0] = spec[i][0] * spec[i][0] + spec[i][1] * spec[i][1];
    spec[i][1] = 0.0;
  }
  fftw_execute(bwd);
  std::vector<double> out(max_lag + 1);
  for (int t = 0; t <= max_lag; ++t) out[t] = buf[t] / static_cast<double>(m);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(buf);
  fftw_free(spec);
  return out;
}

struct TrajectoryResult {
  double diffusion = 0.0;
  double acf_at_cutoff = 0.0;
  double p_variance = 0.0;
};

TrajectoryResult run_trajectory(const ModelParams& params, const McOptions& o, double t_corr,
                                double burn_in, int index) {
  std::mt19937_64 rng = make_stream(o.seed, static_cast<uint64_t>(index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  LangevinState s;
  s.q = uniform(rng);
  s.p = normal(rng) / std::sqrt(params.beta);
  const Stepper stepper = make_stepper(params, o.dt);
  const long n_burn = std::lround(burn_in / o.dt);
  for (long i = 0; i < n_burn; ++i) stepper.step(s, rng, normal);
  const long n = std::lround(o.t_max / o.dt);
  std::vector<double> p(n);
  double sum_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    stepper.step(s, rng, normal);
    p[i] = s.p;
    sum_sq += s.p * s.p;
  }
  const int lags = static_cast<int>(std::lround(t_corr / o.dt));
  const std::vector<double> prod = lagged_products(p, lags);
  std::vector<double> acf(lags + 1);
  for (int t = 0; t <= lags; ++t) acf[t] = prod[t] / static_cast<double>(n - t);
  double integral = 0.5 * (acf[0] + acf[lags]);
  for (int t = 1; t < lags; ++t) integral += acf[t];
  TrajectoryResult r;
  r.diffusion = integral * o.dt;
  r.acf_at_cutoff = acf[lags];
  r.p_variance = sum_sq / static_cast<double>(n);
  return r;
}

void mean_and_error(const std::vector<double>& v, double& mean, double& err) {
  const double n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var = v.size() > 1 ? var / (n - 1.0) : 0.0;
  err = std::sqrt(var / n);
}

}  // namespace

std::mt19937_64 make_stream(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed & 0xffffffffu), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream & 0xffffffffu), static_cast<uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void baoab_step(LangevinState& state, double dt, const ModelParams& params,
                std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  std::normal_distribution<double> normal;
  make_stepper(params, dt).step(state, rng, normal);
}

McEstimate estimate_diffusion(const ModelParams& params, const McOptions& options) {
  if (!(options.dt > 0.0) || !(options.t_max > 0.0) || options.n_traj < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need dt > 0, t_max > 0 and n_traj >= 2");
  }
  if (!(params.beta > 0.0) || !(params.gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta and gamma must be > 0");
  }
  const double slow = std::min(params.gamma, 1.0 / params.gamma);
  McEstimate e;
  e.dt = options.dt;
  e.t_max = options.t_max;
  e.t_corr = options.t_corr > 0.0 ? options.t_corr : 50.0 / slow;
  e.burn_in = std::max(options.burn_in, 10.0 / slow);
  e.n_traj = options.n_traj;
  e.seed = options.seed;
  e.rng = kMcRngIdentifier;
  if (!(e.t_corr < e.t_max)) {
    throw Error(ErrorCode::kInvalidArgument, "t_corr must be shorter than t_max");
  }

  std::vector<TrajectoryResult> runs(options.n_traj);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < options.n_traj; i = next++) {
      runs[i] = run_trajectory(params, options, e.t_corr, e.burn_in, i);
    }
  };
  const int threads = std::max(1, std::min(options.threads, options.n_traj));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> d, c, v;
  for (const TrajectoryResult& r : runs) {
    d.push_back(r.diffusion);
    c.push_back(r.acf_at_cutoff);
    v.push_back(r.p_variance);
  }
  e.per_trajectory = d;
  mean_and_error(d, e.value, e.standard_error);
  double c_mean, c_err;
  mean_and_error(c, c_mean, c_err);
  e.autocorrelation_at_cutoff = c_mean;
  e.t_corr_warning = std::abs(c_mean) > 3.0 * c_err;
  mean_and_error(v, e.momentum_variance, e.momentum_variance_error);
  return e;
}

}  // namespace hypogal
