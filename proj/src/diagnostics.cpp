#include "hypogal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hypogal/assembly.hpp"
#include "hypogal/band_lu.hpp"
#include "hypogal/error.hpp"
#include "hypogal/spectrum.hpp"

namespace hypogal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ModelParams with_modes(const ModelParams& params, int K, int L) {
  ModelParams p = params;
  p.K = K;
  p.L = L;
  p.n_quad_q = std::max(params.n_quad_q, ModelParams::min_quadrature(K, params.potential.degree()));
  return p;
}

// Fourier modes needed beyond K so that d_q of the first 2K-1 modes is
// represented without clipping.
int derivative_margin(const ModelParams& params) {
  return std::max(params.potential.degree(), 1) + 1;
}

// Coupling b = -a1 beta of the closed-form tables; NaN outside the family.
double cosine_coupling(const ModelParams& params) {
  if (!params.potential.is_cosine_family()) return kNaN;
  return -params.potential.cos_coeff(1) * params.beta;
}

// Norm-level bound on ||L u_K|| for V = c0 + a1 cos q.
double L_uK_bound(const ModelParams& params, int K) {
  const double b = cosine_coupling(params);
  if (std::isnan(b)) return kNaN;
  const double t_lo = tail_mass_one(params, K - 1);
  const double t_hi = tail_mass_one(params, K);
  return std::sqrt(b * b / (16.0 * params.beta) * t_lo * t_lo / (1.0 - t_hi * t_hi));
}

// Rows of the extended rigidity matrix outside the (K, L) block, columns
// inside it. Rows keep their extended numbering (block rows are empty).
SparseMatrix off_block(const SparseMatrix& Lext, const ModeIndex& ext, int K, int L,
                       std::vector<int>& block_cols) {
  const int nk = fourier_size(K);
  std::vector<int> local(ext.size(), -1);
  block_cols.clear();
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < nk; ++k) {
      local[ext.zeta(k, l)] = static_cast<int>(block_cols.size());
      block_cols.push_back(ext.zeta(k, l));
    }
  }
  std::vector<Triplet> t;
  for (const Triplet& e : Lext.to_triplets()) {
    if (local[e.row] >= 0 || local[e.col] < 0) continue;
    t.push_back({e.row, local[e.col], e.value});
  }
  return SparseMatrix::from_triplets(ext.size(), static_cast<int>(block_cols.size()), std::move(t));
}

void check_extension(const ModelParams& params, int K_ext, int L_ext, int min_K_ext) {
  if (K_ext < min_K_ext || L_ext < params.L + 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "extension too small: need K_ext >= " + std::to_string(min_K_ext) +
                    " and L_ext >= " + std::to_string(params.L + 2));
  }
}

}  // namespace

double tail_mass_one(const ModelParams& params, int K_prime) {
  if (K_prime <= 0) return 1.0;
  const int K_big = K_prime + 8 + static_cast<int>(std::ceil(2.0 * params.beta));
  const std::vector<double> g = fourier_coefficients_of_one(params, K_big);
  double total = 0.0, tail = 0.0;
  for (size_t j = 0; j < g.size(); ++j) {
    total += g[j] * g[j];
    if (static_cast<int>(j) >= fourier_size(K_prime)) tail += g[j] * g[j];
  }
  if (1.0 - total < -1e-12) {
    throw Error(ErrorCode::kAssembly, "Fourier coefficients of 1 exceed unit mass");
  }
  return std::sqrt(tail);
}

NormCheck norm_L_uK(const ModelParams& params) {
  const int K = params.K;
  const int deg = std::max(params.potential.degree(), 1);
  const int K_e = K + 2 * deg + 1;
  const ModelParams ext = with_modes(params, K_e, params.L);
  const SparseMatrix Q = build_Q(ext, K_e);
  // d_q 1 = 0, so Q Pi_K g = -Q (1 - Pi_K) g on the rows Pi_K g reaches.
  // The tail form avoids cancelling O(1) terms.
  const std::vector<double> g = fourier_coefficients_of_one(params, K_e);
  const int nk = fourier_size(K);
  std::vector<double> tail(g.size(), 0.0);
  std::copy(g.begin() + nk, g.end(), tail.begin() + nk);
  const std::vector<double> dg = Q.multiply(tail);
  const int reach = fourier_size(K + deg);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < reach; ++j) num += dg[j] * dg[j];
  for (int j = 0; j < nk; ++j) den += g[j] * g[j];
  NormCheck r;
  r.computed = std::sqrt(num / den / params.beta);
  r.bound = L_uK_bound(params, K);
  r.K_ext = K_e;
  r.L_ext = params.L;
  return r;
}

std::vector<double> apply_Dpm(int K, double beta, std::span<const double> phi) {
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (static_cast<int>(phi.size()) < 2 * K + 1) {
    throw Error(ErrorCode::kShapeMismatch, "phi needs at least 2K+1 coefficients");
  }
  if (K == 1) {
    ModelParams p;
    p.beta = beta;
    return apply_Dpm_extended(p, K, phi);
  }
  std::vector<double> out(phi.size(), 0.0);
  out[2 * K - 1] = 0.25 * beta * phi[2 * K - 2];
  out[2 * K] = -0.25 * beta * phi[2 * K - 3];
  return out;
}

std::vector<double> apply_Dpm_extended(const ModelParams& params, int K,
                                       std::span<const double> phi) {
  const int n = static_cast<int>(phi.size());
  if (n < 2 * K + 1) throw Error(ErrorCode::kShapeMismatch, "phi needs at least 2K+1 coefficients");
  const int K_e = std::max((n + 1) / 2, K) + derivative_margin(params);
  const ModelParams ext = with_modes(params, K_e, params.L);
  const SparseMatrix Q = build_Q(ext, K_e);
  std::vector<double> x(fourier_size(K_e), 0.0);
  for (int j = 0; j < fourier_size(K); ++j) x[j] = phi[j];
  const std::vector<double> y = Q.multiply(x);
  std::vector<double> out(n, 0.0);
  for (int j = fourier_size(K); j < n; ++j) out[j] = y[j];
  return out;
}

NormCheck norm_Lpm(const ModelParams& params, int K_ext, int L_ext) {
  check_extension(params, K_ext, L_ext, params.K + std::max(2, derivative_margin(params)));
  const ModelParams ext = with_modes(params, K_ext, L_ext);
  const SparseMatrix Lext = build_rigidity(ext);
  std::vector<int> cols;
  const SparseMatrix off = off_block(Lext, ModeIndex(K_ext, L_ext), params.K, params.L, cols);
  const NormEstimate est = operator_norm_2(off);
  NormCheck r;
  r.computed = est.value;
  r.converged = est.converged;
  const double b = cosine_coupling(params);
  r.bound = std::isnan(b) ? kNaN
                          : std::sqrt(params.L / params.beta) * (params.K - 1 + std::abs(b));
  r.K_ext = K_ext;
  r.L_ext = L_ext;
  return r;
}

NormCheck norm_Lpm(const ModelParams& params) {
  const int K_ext = std::max(2 * params.K, params.K + std::max(2, derivative_margin(params)));
  NormCheck r = norm_Lpm(params, K_ext, params.L + 4);
  const NormCheck big = norm_Lpm(params, K_ext + 4, params.L + 8);
  r.extension_change = std::abs(big.computed - r.computed) / std::max(r.computed, 1e-300);
  r.converged = r.converged && big.converged && r.extension_change <= 1e-3;
  return r;
}

SparseMatrix build_one_minus_Lovd(const ModelParams& params, int K_ext) {
  if (K_ext < 1) throw Error(ErrorCode::kInvalidArgument, "K_ext must be >= 1");
  const int K_big = K_ext + derivative_margin(params);
  const ModelParams ext = with_modes(params, K_big, params.L);
  const SparseMatrix Q = build_Q(ext, K_big);
  const SparseMatrix gram = multiply(Q.transpose(), Q);
  const int n = fourier_size(K_ext);
  std::vector<Triplet> t;
  for (const Triplet& e : gram.to_triplets()) {
    if (e.row < n && e.col < n) t.push_back({e.row, e.col, e.value / params.beta});
  }
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix build_one_minus_Lovd(int K_ext, double beta) {
  ModelParams p;
  p.beta = beta;
  return build_one_minus_Lovd(p, K_ext);
}

NormCheck hypo_condition_norm(const ModelParams& params, int K_ext, int L_ext) {
  check_extension(params, K_ext, L_ext,
                  std::max(2 * params.K, params.K + std::max(2, derivative_margin(params))));
  const ModelParams ext = with_modes(params, K_ext, L_ext);
  const ModeIndex idx(K_ext, L_ext);
  const SparseMatrix Lext = build_rigidity(ext);
  std::vector<int> cols;
  const SparseMatrix off = off_block(Lext, idx, params.K, params.L, cols);

  const SparseMatrix Q = build_Q(ext, K_ext);
  const LUFactors M = lu_factorize(build_one_minus_Lovd(params, K_ext));
  const int ne = idx.n_fourier();
  const double scale = 1.0 / std::sqrt(params.beta);

  // (A + A^*) y: A maps (k, l=1) -> (j, l=0) by beta^{-1/2} M^{-1} Q^T, and
  // A^* maps (j, l=0) -> (k, l=1) by beta^{-1/2} Q M^{-1}.
  auto apply_sym = [&](std::span<const double> y, std::span<double> z) {
    std::fill(z.begin(), z.end(), 0.0);
    std::vector<double> y1(y.begin() + idx.zeta(0, 1), y.begin() + idx.zeta(0, 1) + ne);
    std::vector<double> t0 = Q.multiply_transpose(y1);
    M.solve_in_place(t0);
    for (int j = 0; j < ne; ++j) z[idx.zeta(j, 0)] += scale * t0[j];
    std::vector<double> y0(y.begin(), y.begin() + ne);
    M.solve_in_place(y0);
    const std::vector<double> t1 = Q.multiply(y0);
    for (int k = 0; k < ne; ++k) z[idx.zeta(k, 1)] += scale * t1[k];
  };
  std::vector<double> work(idx.size()), work2(idx.size());
  const NormEstimate est = operator_norm_2(
      [&](std::span<const double> in, std::span<double> out) {
        off.multiply(in, work);
        apply_sym(work, out);
      },
      [&](std::span<const double> in, std::span<double> out) {
        apply_sym(in, work2);
        off.multiply_transpose(work2, out);
      },
      off.cols(), idx.size());
  NormCheck r;
  r.computed = est.value;
  r.converged = est.converged;
  r.bound = (1.0 + std::numbers::sqrt2) * params.beta / (2.0 * params.K);
  r.K_ext = K_ext;
  r.L_ext = L_ext;
  return r;
}

NormCheck hypo_condition_norm(const ModelParams& params) {
  const int K_ext = std::max(2 * params.K, params.K + std::max(2, derivative_margin(params)));
  NormCheck r = hypo_condition_norm(params, K_ext, params.L + 4);
  const NormCheck big = hypo_condition_norm(params, K_ext + 4, params.L + 8);
  r.extension_change = std::abs(big.computed - r.computed) / std::max(r.computed, 1e-300);
  r.converged = r.converged && big.converged && r.extension_change <= 1e-3;
  return r;
}

double default_epsilon(double gamma, double eps_bar) {
  return eps_bar * std::min(gamma, 1.0 / gamma);
}

double gap_correction_term(const ModelParams& params, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1)");
  }
  if (epsilon == 0.0) return 0.0;
  double lu = L_uK_bound(params, params.K);
  if (std::isnan(lu)) lu = norm_L_uK(params).computed;
  const double lead = (1.0 + std::numbers::sqrt2) * params.beta / (2.0 * params.K);
  return epsilon / (1.0 + epsilon) * (lead + lu);
}

namespace {

double min_real_part(const std::vector<std::complex<double>>& v, std::complex<double>& arg) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : v) {
    if (z.real() < best || (z.real() == best && z.imag() > arg.imag())) {
      best = z.real();
      arg = z;
    }
  }
  return best;
}

}  // namespace

GapReport spectral_gap(const ModelParams& params, const GapOptions& options) {
  params.validate();
  const SparseMatrix Lmat = build_rigidity(params);
  const int n = Lmat.rows();
  GapReport rep;
  rep.K = params.K;
  rep.L = params.L;
  rep.gamma = params.gamma;
  rep.beta = params.beta;
  rep.drop_threshold = options.drop_tol >= 0.0 ? options.drop_tol : 1e-8 * Lmat.norm1();
  rep.epsilon = default_epsilon(params.gamma, options.eps_bar);
  rep.correction = gap_correction_term(params, rep.epsilon);

  auto split = [&](const std::vector<std::complex<double>>& all) {
    std::vector<std::complex<double>> kept, dropped;
    for (const auto& z : all) (std::abs(z) <= rep.drop_threshold ? dropped : kept).push_back(z);
    return std::make_pair(kept, dropped);
  };

  const bool dense_possible = n <= options.dense_check_max;
  std::vector<std::complex<double>> dense;
  if (dense_possible || options.force_dense) dense = dense_eigenvalues(Lmat);

  if (options.force_dense) {
    rep.method = "dense";
    std::tie(rep.retained, rep.dropped) = split(dense);
  } else {
    rep.method = "shift-invert";
    EigsOptions eo;
    eo.n_eigs = std::min(options.n_eigs, n);
    eo.shift = options.shift != 0.0 ? options.shift : -0.1 * std::min(params.gamma, 1.0 / params.gamma);
    eo.tol = options.tol;
    const EigsResult er = eigs_shift_invert(Lmat, eo);
    rep.converged = er.converged;
    std::tie(rep.retained, rep.dropped) = split(er.values);
  }
  if (rep.retained.empty()) {
    throw Error(ErrorCode::kNotConverged, "spectral gap: every computed eigenvalue was dropped");
  }
  rep.gap = min_real_part(rep.retained, rep.gap_eigenvalue);
  if (rep.dropped.empty()) rep.anomaly = "no eigenvalue below the drop threshold";

  if (dense_possible) {
    const auto [kept, dropped] = split(dense);
    std::complex<double> arg;
    rep.dense_checked = true;
    rep.dense_gap = kept.empty() ? kNaN : min_real_part(kept, arg);
    rep.dense_relative_difference = std::abs(rep.dense_gap - rep.gap) / std::abs(rep.dense_gap);
    if (!(rep.dense_relative_difference <= 1e-6)) {
      if (!rep.anomaly.empty()) rep.anomaly += "; ";
      rep.anomaly += "dense and shift-invert gaps differ";
    }
  }
  return rep;
}

}  // namespace hypogal
