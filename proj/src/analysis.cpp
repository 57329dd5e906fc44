#include "hypogal/analysis.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "hypogal/error.hpp"

namespace hypogal {

const char* const kSweepCsvHeader =
    "axis,value,approx_err,consist_err,total_err,gap,diffusion,residual,alpha";

ErrorRecord error_record(const CoefficientVector& reference, const SolveResult& result,
                         const ModelParams& params, const std::string& observable,
                         Projector projector, const std::vector<double>* U) {
  const CoefficientVector& X = result.X;
  if (X.K() > reference.K() || X.L() > reference.L()) {
    throw Error(ErrorCode::kShapeMismatch, "error_record: solution larger than the reference");
  }
  CoefficientVector proj = truncate(reference, X.K(), X.L());
  if (projector == Projector::kPiKL0) {
    if (!U || static_cast<int>(U->size()) != proj.size()) {
      throw Error(ErrorCode::kShapeMismatch, "error_record: Pi_KL0 needs U of the solution shape");
    }
    double c = 0.0;
    for (int i = 0; i < proj.size(); ++i) c += proj.values()[i] * (*U)[i];
    for (int i = 0; i < proj.size(); ++i) proj.values()[i] -= c * (*U)[i];
  }
  // Sums over coefficients directly; differences of norms lose digits.
  double approx = 0.0, consist = 0.0, total = 0.0;
  const int nk = X.index().n_fourier();
  for (int l = 0; l < reference.L(); ++l) {
    for (int k = 0; k < reference.index().n_fourier(); ++k) {
      const double r = reference.at(k, l);
      const bool inside = k < nk && l < X.L();
      const double p = inside ? proj.at(k, l) : 0.0;
      const double x = inside ? X.at(k, l) : 0.0;
      approx += (r - p) * (r - p);
      total += (x - r) * (x - r);
      if (inside) consist += (x - p) * (x - p);
    }
  }
  ErrorRecord e;
  e.K = X.K();
  e.L = X.L();
  e.gamma = params.gamma;
  e.beta = params.beta;
  e.approx_err = std::sqrt(approx);
  e.consist_err = std::sqrt(consist);
  e.total_err = std::sqrt(total);
  e.observable = observable;
  return e;
}

double self_diffusion(const SolveResult& result, const CoefficientVector& Y) {
  return result.X.dot(Y);
}

double self_diffusion(const GalerkinSystem& system, const SolveResult& result) {
  return self_diffusion(result, observable_velocity(system.params));
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kK: return "K";
    case SweepAxis::kL: return "L";
    case SweepAxis::kGamma: return "gamma";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& text) {
  if (text == "K") return SweepAxis::kK;
  if (text == "L") return SweepAxis::kL;
  if (text == "gamma") return SweepAxis::kGamma;
  throw Error(ErrorCode::kInvalidArgument, "axis must be K, L or gamma, got '" + text + "'");
}

namespace {

SweepRow sweep_point(const SweepConfig& cfg, double value, const ReferenceResult* ref) {
  SweepRow row;
  row.axis = axis_name(cfg.axis);
  row.value = value;
  ModelParams p = cfg.fixed;
  if (cfg.axis == SweepAxis::kK) p.K = static_cast<int>(std::lround(value));
  if (cfg.axis == SweepAxis::kL) p.L = static_cast<int>(std::lround(value));
  if (cfg.axis == SweepAxis::kGamma) p.gamma = value;
  p.n_quad_q = std::max(p.n_quad_q, ModelParams::min_quadrature(p.K, p.potential.degree()));
  row.K = p.K;
  row.L = p.L;
  row.gamma = p.gamma;
  row.beta = p.beta;
  try {
    const GalerkinSystem system = assemble_system(p);
    const CoefficientVector Y = cfg.observable.build(p);
    const SolveResult res = PoissonSolver(system).solve(Y);
    row.residual = res.residual;
    row.mean_constraint = res.mean_constraint;
    row.alpha = res.alpha;
    if (cfg.observable.kind == ObservableKind::kVelocity) row.diffusion = self_diffusion(res, Y);
    if (ref) {
      const ErrorRecord e = error_record(ref->X, res, p, cfg.observable.tag(), cfg.projector, &system.U);
      row.approx_err = e.approx_err;
      row.consist_err = e.consist_err;
      row.total_err = e.total_err;
    }
    if (cfg.with_gap) row.gap = spectral_gap(p).gap;
  } catch (const std::exception& ex) {
    row.error = ex.what();
  }
  return row;
}

}  // namespace

SweepResult sweep(const SweepConfig& cfg) {
  if (cfg.grid.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep grid is empty");
  if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end())) {
    throw Error(ErrorCode::kInvalidArgument, "sweep grid must be sorted");
  }
  SweepResult out;
  out.observable = cfg.observable.tag();
  if (cfg.axis != SweepAxis::kGamma) {
    const double top = cfg.grid.back();
    if ((cfg.axis == SweepAxis::kK && (top > cfg.K_ref || cfg.fixed.L > cfg.L_ref)) ||
        (cfg.axis == SweepAxis::kL && (top > cfg.L_ref || cfg.fixed.K > cfg.K_ref))) {
      throw Error(ErrorCode::kInvalidArgument, "sweep exceeds the reference size");
    }
    out.reference = reference_solution(cfg.fixed, cfg.K_ref, cfg.L_ref, cfg.observable, cfg.cache_dir);
    if (cfg.observable.kind == ObservableKind::kVelocity) {
      ModelParams rp = cfg.fixed;
      rp.K = cfg.K_ref;
      rp.L = cfg.L_ref;
      rp.n_quad_q = std::max(rp.n_quad_q, ModelParams::min_quadrature(rp.K, rp.potential.degree()));
      out.reference_diffusion = out.reference->X.dot(observable_velocity(rp));
    }
  }
  const ReferenceResult* ref = out.reference ? &*out.reference : nullptr;
  out.rows.resize(cfg.grid.size());
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cfg.grid.size())));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < cfg.grid.size(); i = next++) {
      out.rows[i] = sweep_point(cfg, cfg.grid[i], ref);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

namespace {

SlopeFit least_squares(const std::vector<std::pair<double, double>>& points, double floor,
                       bool log_x) {
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto [x, e] = points[i];
    if (!(e > 0.0) || !(e > floor) || (log_x && !(x > 0.0)) || !std::isfinite(e)) {
      fit.excluded.push_back(static_cast<int>(i));
      continue;
    }
    xs.push_back(log_x ? std::log(x) : x);
    ys.push_back(log_x ? std::log(e) : std::log10(e));
  }
  fit.n_used = static_cast<int>(xs.size());
  if (fit.n_used < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "slope fit needs at least 3 usable points, got " + std::to_string(fit.n_used));
  }
  const double n = fit.n_used;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::kInvalidArgument, "slope fit needs distinct abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::string csv_field(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points, double floor) {
  return least_squares(points, floor, true);
}

SlopeFit fit_semilog_slope(const std::vector<std::pair<double, double>>& points, double floor) {
  return least_squares(points, floor, false);
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << kSweepCsvHeader << "\n";
  for (const SweepRow& r : result.rows) {
    out << r.axis << ',' << csv_field(r.value) << ',' << csv_field(r.approx_err) << ','
        << csv_field(r.consist_err) << ',' << csv_field(r.total_err) << ',' << csv_field(r.gap)
        << ',' << csv_field(r.diffusion) << ',' << csv_field(r.residual) << ','
        << csv_field(r.alpha) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_sweep_json(const std::string& path, const SweepResult& result) {
  using nlohmann::json;
  json rows = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const SweepRow& r : result.rows) {
    json j;
    j["axis"] = r.axis;
    j["value"] = r.value;
    j["K"] = r.K;
    j["L"] = r.L;
    j["gamma"] = r.gamma;
    j["beta"] = r.beta;
    j["approx_err"] = opt(r.approx_err);
    j["consist_err"] = opt(r.consist_err);
    j["total_err"] = opt(r.total_err);
    j["gap"] = opt(r.gap);
    j["diffusion"] = opt(r.diffusion);
    j["residual"] = opt(r.residual);
    j["mean_constraint"] = opt(r.mean_constraint);
    j["alpha"] = opt(r.alpha);
    j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
    rows.push_back(j);
  }
  json doc;
  doc["schema"] = "hypogal-sweep-1";
  doc["observable"] = result.observable;
  doc["rows"] = rows;
  if (result.reference) {
    doc["reference"] = {{"K", result.reference->X.K()},
                        {"L", result.reference->X.L()},
                        {"residual", result.reference->residual},
                        {"condition_estimate", result.reference->condition_estimate},
                        {"alpha", result.reference->alpha}};
  }
  if (result.reference_diffusion) doc["reference_diffusion"] = *result.reference_diffusion;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace hypogal
