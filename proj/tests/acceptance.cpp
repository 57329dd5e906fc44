// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypogal/analysis.hpp"
#include "hypogal/assembly.hpp"
#include "hypogal/diagnostics.hpp"
#include "hypogal/mc_oracle.hpp"
#include "hypogal/solver.hpp"
#include "hypogal/spectrum.hpp"

using namespace hypogal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every solve made by the run, for the solver-contract criterion.
struct ContractLog {
  double worst_residual = 0.0;
  double worst_mean = 0.0;
  int solves = 0;
  void add(double residual, double mean) {
    worst_residual = std::max(worst_residual, residual);
    worst_mean = std::max(worst_mean, std::abs(mean));
    ++solves;
  }
} contract;

ModelParams make(int K, int L, double gamma = 1.0, double beta = 1.0) {
  ModelParams p;
  p.K = K;
  p.L = L;
  p.gamma = gamma;
  p.beta = beta;
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

SolveResult logged_solve(const GalerkinSystem& s, const CoefficientVector& Y) {
  const SolveResult r = solve_poisson(s, Y);
  contract.add(r.residual, r.mean_constraint);
  return r;
}

double diffusion_at(const ModelParams& p) {
  const GalerkinSystem s = assemble_system(p);
  const CoefficientVector Y = observable_velocity(p);
  return logged_solve(s, Y).X.dot(Y);
}

Outcome basis_exactness() {
  double worst_orth = 0.0, worst_deriv = 0.0;
  const ModelParams p = make(40, 60);
  const FourierBasis basis(p);
  const int n = fourier_size(40);
  const auto& q = basis.nodes();
  const auto& w = basis.nu_weights();
  std::vector<std::vector<double>> g(n, std::vector<double>(q.size()));
  for (int j = 0; j < n; ++j) {
    for (size_t i = 0; i < q.size(); ++i) g[j][i] = basis.value(j, q[i]);
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      double s = 0.0;
      for (size_t i = 0; i < q.size(); ++i) s += w[i] * g[j][i] * g[k][i];
      worst_orth = std::max(worst_orth, std::abs(s - (j == k ? 1.0 : 0.0)));
    }
  }
  // Derivative identity in q: closed-form coefficients of d_q G against quadrature.
  const SparseMatrix a = build_Q(p, 40, QMethod::kFormula);
  const SparseMatrix b = build_Q(p, 40, QMethod::kQuadrature);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) worst_deriv = std::max(worst_deriv, std::abs(a.at(j, k) - b.at(j, k)));
  }
  // Hermite functions: orthonormality and <H_m, d_p H_l> = sqrt(beta l) delta_{m,l-1}.
  for (double beta : {1.0, 2.0}) {
    const GaussHermiteRule rule = gauss_hermite_kappa(128, beta);
    const int L = 60;
    std::vector<std::vector<double>> h(L, std::vector<double>(rule.nodes.size()));
    std::vector<std::vector<double>> dh(L, std::vector<double>(rule.nodes.size()));
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      for (int l = 0; l < L; ++l) {
        h[l][i] = eval_H(l, rule.nodes[i], beta);
        dh[l][i] = eval_dH(l, rule.nodes[i], beta);
      }
    }
    for (int m = 0; m < L; ++m) {
      for (int l = 0; l < L; ++l) {
        double s = 0.0, d = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
          s += rule.weights[i] * h[m][i] * h[l][i];
          d += rule.weights[i] * h[m][i] * dh[l][i];
        }
        worst_orth = std::max(worst_orth, std::abs(s - (m == l ? 1.0 : 0.0)));
        worst_deriv = std::max(worst_deriv, std::abs(d - (m == l - 1 ? std::sqrt(beta * l) : 0.0)));
      }
    }
  }
  return {worst_orth <= 1e-10 && worst_deriv <= 1e-10,
          "orthonormality " + fmt(worst_orth) + ", derivative identities " + fmt(worst_deriv) + " (tol 1e-10)"};
}

Outcome flat_closed_form() {
  double worst_d = 0.0, worst_ev = 0.0;
  for (double gamma : {0.1, 1.0, 10.0}) {
    ModelParams p = make(3, 10, gamma);
    p.potential = Potential::flat();
    worst_d = std::max(worst_d, std::abs(diffusion_at(p) - 1.0 / gamma));
    const SparseMatrix Lm = build_rigidity(p);
    const ModeIndex idx(3, 10);
    std::vector<Triplet> t;
    for (int l = 0; l < 10; ++l) {
      for (int m = 0; m < 10; ++m) {
        const double v = Lm.at(idx.zeta(0, l), idx.zeta(0, m));
        if (v != 0.0) t.push_back({l, m, v});
      }
    }
    const auto ev = dense_eigenvalues(SparseMatrix::from_triplets(10, 10, t));
    for (int l = 0; l < 10; ++l) {
      double best = 1e300;
      for (auto z : ev) best = std::min(best, std::abs(z - gamma * l));
      worst_ev = std::max(worst_ev, best);
    }
  }
  return {worst_d <= 1e-8 && worst_ev <= 1e-8,
          "|D - 1/gamma| " + fmt(worst_d) + ", k=0 eigenvalues " + fmt(worst_ev) + " (tol 1e-8)"};
}

std::vector<std::pair<double, double>> column(const SweepResult& r,
                                              const std::optional<double> SweepRow::*field) {
  std::vector<std::pair<double, double>> pts;
  for (const SweepRow& row : r.rows) {
    if (row.residual) contract.add(*row.residual, row.mean_constraint.value_or(0.0));
    if (row.*field) pts.push_back({row.value, *(row.*field)});
  }
  return pts;
}

bool rows_ok(const SweepResult& r, std::string& why) {
  for (const SweepRow& row : r.rows) {
    if (!row.error.empty()) {
      why = "row " + fmt(row.value) + " failed: " + row.error;
      return false;
    }
  }
  return true;
}

Outcome rough_observable_rates() {
  SweepConfig c;
  c.observable = ObservableSpec::parse("sobolev");
  c.K_ref = 100;
  c.L_ref = 1000;
  c.cache_dir = HYPOGAL_TEST_CACHE;
  c.axis = SweepAxis::kK;
  c.grid = {5, 7, 10, 14, 20, 28, 40};
  c.fixed = make(5, 1000);
  const SweepResult ks = sweep(c);
  c.axis = SweepAxis::kL;
  c.grid = {10, 20, 40, 80, 160, 320};
  c.fixed = make(100, 10);
  const SweepResult ls = sweep(c);
  std::string why;
  if (!rows_ok(ks, why) || !rows_ok(ls, why)) return {false, why};
  contract.add(ks.reference->residual, 0.0);
  const double ka = fit_loglog_slope(column(ks, &SweepRow::approx_err)).slope;
  const double kc = fit_loglog_slope(column(ks, &SweepRow::consist_err)).slope;
  const double la = fit_loglog_slope(column(ls, &SweepRow::approx_err)).slope;
  const bool ok = ka >= -3.4 && ka <= -2.6 && kc <= ka - 0.3 && la >= -2.3 && la <= -1.7;
  return {ok, "K-slope approx " + fmt(ka) + " in [-3.4,-2.6], consist " + fmt(kc) +
                  " <= approx-0.3, L-slope approx " + fmt(la) + " in [-2.3,-1.7]"};
}

Outcome velocity_observable_rates() {
  SweepConfig c;
  c.observable = ObservableSpec::parse("velocity");
  c.K_ref = 50;
  c.L_ref = 100;
  c.axis = SweepAxis::kK;
  c.grid = {2, 3, 4, 5, 6, 7, 8};
  c.fixed = make(2, 100);
  const SweepResult ks = sweep(c);
  c.axis = SweepAxis::kL;
  c.grid = {4, 8, 12, 16, 20, 24, 28, 32};
  c.fixed = make(50, 4);
  const SweepResult ls = sweep(c);
  std::string why;
  if (!rows_ok(ks, why) || !rows_ok(ls, why)) return {false, why};
  const double d_ref = *ks.reference_diffusion;
  std::vector<std::pair<double, double>> mobility;
  for (const SweepRow& row : ks.rows) mobility.push_back({row.value, std::abs(*row.diffusion - d_ref)});
  const SlopeFit ka = fit_semilog_slope(column(ks, &SweepRow::approx_err), 1e-15);
  const SlopeFit km = fit_semilog_slope(mobility, 1e-15);
  const SlopeFit la = fit_semilog_slope(column(ls, &SweepRow::approx_err), 1e-15);
  const bool ok = ka.slope <= -0.7 && km.slope <= -2.0 && la.slope <= -0.15;
  return {ok, "semilog K-slope approx " + fmt(ka.slope) + " <= -0.7, mobility " + fmt(km.slope) +
                  " <= -2.0 (" + std::to_string(km.n_used) + " pts), L-slope approx " + fmt(la.slope) +
                  " <= -0.15"};
}

Outcome friction_prefactors() {
  const double lo = diffusion_at(make(50, 100, 1e-2)) * 1e-2;
  const double hi = diffusion_at(make(50, 100, 1e2)) * 1e2;
  return {lo >= 0.13 && lo <= 0.17 && hi >= 0.5 && hi <= 0.7,
          "D*gamma " + fmt(lo) + " at gamma=1e-2 in [0.13,0.17], " + fmt(hi) + " at gamma=1e2 in [0.5,0.7]"};
}

Outcome mc_cross_check() {
  const ModelParams p = make(50, 100);
  const double spectral = diffusion_at(p);
  const McEstimate e = estimate_diffusion(p);
  const double diff = std::abs(spectral - e.value);
  return {diff <= 3.0 * e.standard_error,
          "spectral " + fmt(spectral) + ", MC " + fmt(e.value) + " +- " + fmt(e.standard_error) +
              ", |diff| = " + fmt(diff / e.standard_error) + " stderr (tol 3)"};
}

Outcome certificates() {
  bool ok = true;
  std::ostringstream d;
  for (auto [K, L] : {std::pair{4, 6}, {8, 12}, {16, 24}}) {
    const ModelParams p = make(K, L);
    const NormCheck lpm = norm_Lpm(p);
    const NormCheck hypo = hypo_condition_norm(p);
    const double hypo_bound = (1.0 + std::numbers::sqrt2) * p.beta / (2.0 * K);
    const NormCheck luk = norm_L_uK(p);
    double worst = 0.0;
    std::mt19937_64 rng(1000 + K);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> phi(fourier_size(K) + 2);
      for (double& v : phi) v = g(rng);
      double lhs = 0.0;
      for (double v : apply_Dpm(K, p.beta, phi)) lhs += v * v;
      // Pi^{q perp}_{K-1} Pi^q_K phi keeps the two top modes of frequency K-1.
      const double rhs = p.beta / 4.0 * std::hypot(phi[2 * K - 3], phi[2 * K - 2]);
      worst = std::max(worst, std::sqrt(lhs) / rhs);
    }
    const bool here = lpm.computed <= lpm.bound && hypo.computed <= hypo_bound && luk.computed <= luk.bound &&
                      worst <= 1.0 + 1e-12;
    ok = ok && here;
    d << "(" << K << "," << L << ") Lpm " << fmt(lpm.computed) << "/" << fmt(lpm.bound) << " hypo "
      << fmt(hypo.computed) << "/" << fmt(hypo_bound) << " LuK " << fmt(luk.computed) << "/" << fmt(luk.bound)
      << " Dpm ratio " << fmt(worst) << "; ";
  }
  return {ok, d.str()};
}

Outcome gap_stability() {
  const double a = spectral_gap(make(7, 30)).gap;
  const double b = spectral_gap(make(9, 40)).gap;
  const double rel = std::abs(a - b) / b;
  const double lo = spectral_gap(make(9, 40, 0.1)).gap;
  const double hi = spectral_gap(make(9, 40, 10.0)).gap;
  const bool ok = rel < 1e-4 && lo > 0.05 && lo < 0.2 && hi > 0.05 && hi < 0.2;
  return {ok, "gap (7,30) " + fmt(a) + " vs (9,40) " + fmt(b) + " rel " + fmt(rel) + " (tol 1e-4); gamma=0.1 " +
                  fmt(lo) + ", gamma=10 " + fmt(hi) + " within factor 2 of 0.1"};
}

Outcome solver_contract() {
  const ModelParams p = make(100, 1000);
  const ObservableSpec obs = ObservableSpec::parse("sobolev");
  const ReferenceResult ref = reference_solution(p, 100, 1000, obs, HYPOGAL_TEST_CACHE);
  const GalerkinSystem s = assemble_system(p);
  const double mean = ref.X.dot(CoefficientVector(100, 1000, s.U));
  // Recompute the residual of the cached solution from scratch.
  const SparseMatrix A = build_augmented(s.Lmat, s.U);
  std::vector<double> x(ref.X.values().begin(), ref.X.values().end());
  x.push_back(ref.alpha);
  const CoefficientVector Y = obs.build(p);
  std::vector<double> rhs(Y.values().begin(), Y.values().end());
  rhs.push_back(0.0);
  const std::vector<double> ax = A.multiply(x);
  double r = 0.0, nb = 0.0;
  for (size_t i = 0; i < rhs.size(); ++i) {
    r += (ax[i] - rhs[i]) * (ax[i] - rhs[i]);
    nb += rhs[i] * rhs[i];
  }
  contract.add(std::sqrt(r / nb), mean);
  const bool ok = contract.worst_residual <= 1e-10 && contract.worst_mean <= 1e-10;
  return {ok, std::to_string(contract.solves) + " solves, worst residual " + fmt(contract.worst_residual) +
                  ", worst |<X,U>| " + fmt(contract.worst_mean) + " (tol 1e-10, includes (100,1000))"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double max_seconds;  // <= 0: no runtime limit
  };
  const std::vector<Criterion> criteria{
      {1, "basis exactness", basis_exactness, 10.0},
      {2, "flat-potential closed form", flat_closed_form, 5.0},
      {3, "algebraic rates, rough observable", rough_observable_rates, 600.0},
      {4, "exponential rates, velocity observable", velocity_observable_rates, 300.0},
      {5, "low/high friction prefactors", friction_prefactors, 300.0},
      {6, "Monte-Carlo cross-validation", mc_cross_check, 600.0},
      {7, "certificate inequalities", certificates, 120.0},
      {8, "spectral-gap stability", gap_stability, 300.0},
      {9, "solver contract", solver_contract, 0.0},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.max_seconds > 0.0 && secs > c.max_seconds) {
      o.pass = false;
      o.detail += " [runtime over " + fmt(c.max_seconds) + " s]";
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s  %s  (%.1f s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
