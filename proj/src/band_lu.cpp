#include "hypogal/band_lu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "band_lu_impl.hpp"
#include "hypogal/error.hpp"

namespace hypogal {

namespace {

// Symmetrized adjacency (no self loops) in CSR form.
void symmetric_pattern(const SparseMatrix& a, std::vector<int64_t>& ptr, std::vector<int>& adj) {
  const int n = a.rows();
  std::vector<std::vector<int>> lists(n);
  const auto& rp = a.row_offsets();
  for (int r = 0; r < n; ++r) {
    for (int64_t p = rp[r]; p < rp[r + 1]; ++p) {
      const int c = a.col_indices()[p];
      if (c == r) continue;
      lists[r].push_back(c);
      lists[c].push_back(r);
    }
  }
  ptr.assign(n + 1, 0);
  adj.clear();
  for (int r = 0; r < n; ++r) {
    auto& l = lists[r];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    adj.insert(adj.end(), l.begin(), l.end());
    ptr[r + 1] = static_cast<int64_t>(adj.size());
  }
}

// BFS level structure from root over unvisited-in-component nodes.
int bfs_levels(int root, const std::vector<int64_t>& ptr, const std::vector<int>& adj,
               std::vector<int>& level, std::vector<int>& last_level) {
  std::fill(level.begin(), level.end(), -1);
  std::vector<int> frontier{root};
  level[root] = 0;
  int depth = 0;
  last_level = frontier;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int64_t p = ptr[v]; p < ptr[v + 1]; ++p) {
        const int w = adj[p];
        if (level[w] < 0) {
          level[w] = depth + 1;
          next.push_back(w);
        }
      }
    }
    if (next.empty()) break;
    ++depth;
    last_level = next;
    frontier = std::move(next);
  }
  return depth;
}

double band_cost(int kl, int ku) {
  return static_cast<double>(kl) * (2.0 * kl + ku + 1.0);
}

std::vector<int> choose_ordering(const SparseMatrix& a, Ordering ordering, std::string& name) {
  std::vector<int> natural(a.rows());
  std::iota(natural.begin(), natural.end(), 0);
  if (ordering == Ordering::kNatural) {
    name = "natural";
    return natural;
  }
  std::vector<int> rcm = reverse_cuthill_mckee(a);
  if (ordering == Ordering::kRcm) {
    name = "rcm";
    return rcm;
  }
  const auto [kl_r, ku_r] = permuted_bandwidth(a, rcm);
  const double cost_rcm = band_cost(kl_r, ku_r);
  const double cost_nat = band_cost(a.lower_bandwidth(), a.upper_bandwidth());
  if (cost_nat < cost_rcm) {
    name = "natural";
    return natural;
  }
  name = "rcm";
  return rcm;
}

}  // namespace

std::vector<int> reverse_cuthill_mckee(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "RCM needs a square matrix");
  const int n = a.rows();
  std::vector<int64_t> ptr;
  std::vector<int> adj;
  symmetric_pattern(a, ptr, adj);
  auto degree = [&](int v) { return static_cast<int>(ptr[v + 1] - ptr[v]); };

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> placed(n, 0);
  std::vector<int> level(n, -1), last_level;
  for (int seed = 0; seed < n; ++seed) {
    if (placed[seed]) continue;
    // Pseudo-peripheral root (George-Liu).
    int root = seed;
    int depth = bfs_levels(root, ptr, adj, level, last_level);
    for (int it = 0; it < 8; ++it) {
      int cand = last_level.front();
      for (int v : last_level) {
        if (degree(v) < degree(cand)) cand = v;
      }
      std::vector<int> cand_last;
      const int cand_depth = bfs_levels(cand, ptr, adj, level, cand_last);
      if (cand_depth <= depth) break;
      root = cand;
      depth = cand_depth;
      last_level = std::move(cand_last);
    }
    const size_t start = order.size();
    order.push_back(root);
    placed[root] = 1;
    std::vector<int> nbrs;
    for (size_t head = start; head < order.size(); ++head) {
      const int v = order[head];
      nbrs.clear();
      for (int64_t p = ptr[v]; p < ptr[v + 1]; ++p) {
        if (!placed[adj[p]]) nbrs.push_back(adj[p]);
      }
      std::stable_sort(nbrs.begin(), nbrs.end(),
                       [&](int x, int y) { return degree(x) < degree(y); });
      for (int w : nbrs) {
        placed[w] = 1;
        order.push_back(w);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::pair<int, int> permuted_bandwidth(const SparseMatrix& a, const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  int kl = 0, ku = 0;
  const auto& rp = a.row_offsets();
  for (int r = 0; r < a.rows(); ++r) {
    for (int64_t p = rp[r]; p < rp[r + 1]; ++p) {
      const int d = inv[r] - inv[a.col_indices()[p]];
      kl = std::max(kl, d);
      ku = std::max(ku, -d);
    }
  }
  return {kl, ku};
}

struct LUFactors::Impl {
  SparseMatrix original;
  std::vector<int> perm;  // new -> old
  detail::BandLU<double> band;
  FactorStats stats;

  void solve(double* b) const {
    std::vector<double> tmp(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) tmp[i] = b[perm[i]];
    band.solve(tmp.data());
    for (size_t i = 0; i < perm.size(); ++i) b[perm[i]] = tmp[i];
  }
  void solve_transpose(double* b) const {
    std::vector<double> tmp(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) tmp[i] = b[perm[i]];
    band.solve_transpose(tmp.data());
    for (size_t i = 0; i < perm.size(); ++i) b[perm[i]] = tmp[i];
  }
};

int LUFactors::size() const { return impl_->stats.n; }
const FactorStats& LUFactors::stats() const { return impl_->stats; }
const SparseMatrix& LUFactors::matrix() const { return impl_->original; }
const std::vector<int>& LUFactors::ordering() const { return impl_->perm; }

void LUFactors::solve_in_place(std::span<double> b) const {
  if (static_cast<int>(b.size()) != size()) throw Error(ErrorCode::kShapeMismatch, "solve: size mismatch");
  impl_->solve(b.data());
}

void LUFactors::solve_transpose_in_place(std::span<double> b) const {
  if (static_cast<int>(b.size()) != size()) throw Error(ErrorCode::kShapeMismatch, "solve: size mismatch");
  impl_->solve_transpose(b.data());
}

int64_t lu_memory_estimate(const SparseMatrix& a, const LuOptions& options) {
  std::string name;
  const std::vector<int> perm = choose_ordering(a, options.ordering, name);
  const auto [kl, ku] = permuted_bandwidth(a, perm);
  return detail::BandLU<double>::storage_bytes(a.rows(), kl, ku);
}

namespace {

// Hager's estimator of ||A^{-1}||_1 with Higham's alternate vector.
double inverse_norm1_estimate(const LUFactors::Impl& f) {
  const int n = static_cast<int>(f.perm.size());
  if (n == 0) return 0.0;
  std::vector<double> x(n, 1.0 / n), y, z;
  double est = 0.0;
  int last_j = -1;
  for (int it = 0; it < 5; ++it) {
    y = x;
    f.solve(y.data());
    double ynorm = 0.0;
    for (double v : y) ynorm += std::abs(v);
    est = std::max(est, ynorm);
    z.resize(n);
    for (int i = 0; i < n; ++i) z[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    f.solve_transpose(z.data());
    int j = 0;
    double zmax = 0.0, ztx = 0.0;
    for (int i = 0; i < n; ++i) {
      ztx += z[i] * x[i];
      if (std::abs(z[i]) > zmax) {
        zmax = std::abs(z[i]);
        j = i;
      }
    }
    if (zmax <= ztx || j == last_j) break;
    last_j = j;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    x[i] = sign * (1.0 + (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0));
  }
  f.solve(x.data());
  double alt = 0.0;
  for (double v : x) alt += std::abs(v);
  return std::max(est, 2.0 * alt / (3.0 * n));
}

}  // namespace

LUFactors lu_factorize(const SparseMatrix& a, const LuOptions& options) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeMismatch, "LU needs a square matrix");
  auto impl = std::make_shared<LUFactors::Impl>();
  impl->original = a;
  std::string name;
  impl->perm = choose_ordering(a, options.ordering, name);
  const SparseMatrix permuted = a.permute_symmetric(impl->perm);
  impl->band = detail::BandLU<double>(permuted, 0.0, options.pivot_tol);

  FactorStats& s = impl->stats;
  s.n = a.rows();
  s.ordering = name;
  s.lower_bandwidth = impl->band.kl();
  s.upper_bandwidth = impl->band.ku();
  s.nnz_a = a.nnz();
  double max_u = 0.0;
  impl->band.count_factor_nonzeros(s.nnz_l, s.nnz_u, max_u);
  // Fill counts entries of L+U that are not entries of A.
  s.fill_in = s.nnz_l + s.nnz_u - s.nnz_a;
  s.min_pivot = impl->band.min_pivot();
  s.max_pivot = impl->band.max_pivot();
  s.norm1 = a.norm1();
  const double max_a = impl->band.max_abs_input();
  s.growth_factor = max_a > 0.0 ? max_u / max_a : 0.0;
  s.factor_bytes = detail::BandLU<double>::storage_bytes(s.n, s.lower_bandwidth, s.upper_bandwidth);
  if (options.estimate_condition) s.condition_estimate = s.norm1 * inverse_norm1_estimate(*impl);

  LUFactors f;
  f.impl_ = std::move(impl);
  return f;
}

std::vector<double> lu_solve(const LUFactors& factors, std::span<const double> b,
                             SolveReport* report) {
  const int n = factors.size();
  if (static_cast<int>(b.size()) != n) throw Error(ErrorCode::kShapeMismatch, "lu_solve: size mismatch");
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  std::vector<double> x(b.begin(), b.end());
  if (bnorm == 0.0) {
    if (report) *report = SolveReport{};
    std::fill(x.begin(), x.end(), 0.0);
    return x;
  }
  factors.solve_in_place(x);
  const SparseMatrix& a = factors.matrix();
  std::vector<double> r(n);
  auto residual = [&]() {
    a.multiply(x, r);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      r[i] = b[i] - r[i];
      s += r[i] * r[i];
    }
    return std::sqrt(s) / bnorm;
  };
  const double r0 = residual();
  factors.solve_in_place(r);
  for (int i = 0; i < n; ++i) x[i] += r[i];
  const double r1 = residual();
  if (report) {
    report->initial_residual = r0;
    report->relative_residual = r1;
  }
  return x;
}

}  // namespace hypogal
