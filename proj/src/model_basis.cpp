#include "hypogal/model_basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hypogal/error.hpp"

namespace hypogal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double trig_mode(int k, double q) {
  if (k == 0) return 1.0;
  const int n = mode_frequency(k);
  return (k % 2 == 1) ? std::sin(n * q) : std::cos(n * q);
}

double trig_mode_derivative(int k, double q) {
  if (k == 0) return 0.0;
  const int n = mode_frequency(k);
  return (k % 2 == 1) ? n * std::cos(n * q) : -n * std::sin(n * q);
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFinite,
                std::string("non-finite integrand value in ") + what);
  }
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kSingular: return "singular";
    case ErrorCode::kNotConverged: return "not_converged";
    case ErrorCode::kResidual: return "residual";
    case ErrorCode::kAssembly: return "assembly";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kCacheCorrupt: return "cache_corrupt";
    case ErrorCode::kOutOfMemory: return "out_of_memory";
    case ErrorCode::kNonFinite: return "non_finite";
  }
  return "unknown";
}

Potential::Potential() : Potential(cosine()) {}

Potential::Potential(double c0, std::vector<double> cos_coeffs,
                     std::vector<double> sin_coeffs)
    : c0_(c0), a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
  for (double v : a_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite potential coefficient");
  }
  for (double v : b_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite potential coefficient");
  }
  while (!a_.empty() && a_.back() == 0.0) a_.pop_back();
  while (!b_.empty() && b_.back() == 0.0) b_.pop_back();
}

Potential Potential::cosine() { return Potential(1.0, {-1.0}, {}); }
Potential Potential::flat() { return Potential(0.0, {}, {}); }

double Potential::value(double q) const {
  double v = c0_;
  for (size_t n = 0; n < a_.size(); ++n) v += a_[n] * std::cos((n + 1) * q);
  for (size_t n = 0; n < b_.size(); ++n) v += b_[n] * std::sin((n + 1) * q);
  return v;
}

double Potential::derivative(double q) const {
  double v = 0.0;
  for (size_t n = 0; n < a_.size(); ++n) v -= (n + 1) * a_[n] * std::sin((n + 1) * q);
  for (size_t n = 0; n < b_.size(); ++n) v += (n + 1) * b_[n] * std::cos((n + 1) * q);
  return v;
}

double Potential::cos_coeff(int n) const {
  return (n >= 1 && n <= static_cast<int>(a_.size())) ? a_[n - 1] : 0.0;
}

double Potential::sin_coeff(int n) const {
  return (n >= 1 && n <= static_cast<int>(b_.size())) ? b_[n - 1] : 0.0;
}

int Potential::degree() const {
  return static_cast<int>(std::max(a_.size(), b_.size()));
}

bool Potential::is_even() const { return b_.empty(); }

bool Potential::is_cosine_family() const { return b_.empty() && a_.size() <= 1; }

bool Potential::operator==(const Potential& other) const {
  return c0_ == other.c0_ && a_ == other.a_ && b_ == other.b_;
}

int ModelParams::min_quadrature(int K, int degree) { return 8 * (K + degree); }

void ModelParams::validate() const {
  std::ostringstream msg;
  if (!(beta > 0.0) || !std::isfinite(beta)) msg << "beta must be > 0; ";
  if (!(gamma > 0.0) || !std::isfinite(gamma)) msg << "gamma must be > 0; ";
  if (K < 1) msg << "K must be >= 1; ";
  if (L < 2) msg << "L must be >= 2; ";
  if (n_quad_q < min_quadrature(K, potential.degree())) {
    msg << "n_quad_q must be >= " << min_quadrature(K, potential.degree()) << "; ";
  }
  const std::string s = msg.str();
  if (!s.empty()) throw Error(ErrorCode::kInvalidArgument, s.substr(0, s.size() - 2));
}

double eval_potential(const ModelParams& params, double q) {
  return params.potential.value(q);
}

double partition_function_nu(const ModelParams& params) {
  if (params.n_quad_q < 1) throw Error(ErrorCode::kInvalidArgument, "n_quad_q must be positive");
  const int n = params.n_quad_q;
  const double h = kTwoPi / n;
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(-params.beta * params.potential.value(i * h));
  return z * h;
}

FourierBasis::FourierBasis(const ModelParams& params) : params_(params) {
  const int n = params.n_quad_q;
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n_quad_q must be positive");
  z_ = partition_function_nu(params);
  nodes_.resize(n);
  weights_.resize(n);
  const double h = kTwoPi / n;
  for (int i = 0; i < n; ++i) {
    nodes_[i] = i * h;
    weights_[i] = h * std::exp(-params.beta * params.potential.value(nodes_[i])) / z_;
  }
}

double FourierBasis::value(int k, double q) const {
  const double norm = std::sqrt(z_ / (k == 0 ? kTwoPi : std::numbers::pi));
  return norm * trig_mode(k, q) * std::exp(0.5 * params_.beta * params_.potential.value(q));
}

double FourierBasis::derivative(int k, double q) const {
  const double norm = std::sqrt(z_ / (k == 0 ? kTwoPi : std::numbers::pi));
  const double v = params_.potential.value(q);
  const double dv = params_.potential.derivative(q);
  return norm * (trig_mode_derivative(k, q) + 0.5 * params_.beta * dv * trig_mode(k, q)) *
         std::exp(0.5 * params_.beta * v);
}

double eval_G(int k, double q, const ModelParams& params) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "mode index must be >= 0");
  return FourierBasis(params).value(k, q);
}

void eval_H_all(int count, double p, double beta, double* out) {
  if (count <= 0) return;
  const double y = std::sqrt(beta) * p;
  out[0] = 1.0;
  if (count > 1) out[1] = y;
  for (int n = 1; n + 1 < count; ++n) {
    out[n + 1] = (y * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) /
                 std::sqrt(static_cast<double>(n + 1));
  }
}

double eval_H(int l, double p, double beta) {
  if (l < 0) throw Error(ErrorCode::kInvalidArgument, "Hermite index must be >= 0");
  const double y = std::sqrt(beta) * p;
  double prev = 0.0, cur = 1.0;
  for (int n = 0; n < l; ++n) {
    const double next = (y * cur - std::sqrt(static_cast<double>(n)) * prev) /
                        std::sqrt(static_cast<double>(n + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

// Differentiates the recurrence term by term.
double eval_dH(int l, double p, double beta) {
  if (l < 0) throw Error(ErrorCode::kInvalidArgument, "Hermite index must be >= 0");
  const double y = std::sqrt(beta) * p;
  double h_prev = 0.0, h_cur = 1.0;
  double d_prev = 0.0, d_cur = 0.0;
  for (int n = 0; n < l; ++n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double sn1 = std::sqrt(static_cast<double>(n + 1));
    const double h_next = (y * h_cur - sn * h_prev) / sn1;
    const double d_next = (h_cur + y * d_cur - sn * d_prev) / sn1;
    h_prev = h_cur;
    h_cur = h_next;
    d_prev = d_cur;
    d_cur = d_next;
  }
  return std::sqrt(beta) * d_cur;
}

GaussHermiteRule gauss_hermite_kappa(int n_nodes, double beta) {
  if (n_nodes < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one node");
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be > 0");
  // Golub-Welsch for the standard normal weight, then Newton polish.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_nodes);
  Eigen::VectorXd sub(std::max(n_nodes - 1, 0));
  for (int i = 0; i + 1 < n_nodes; ++i) sub[i] = std::sqrt(static_cast<double>(i + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> h(n_nodes + 1);
  GaussHermiteRule rule;
  rule.nodes.resize(n_nodes);
  rule.weights.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    double y = eig.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      eval_H_all(n_nodes + 1, y, 1.0, h.data());
      const double dh = std::sqrt(static_cast<double>(n_nodes)) * h[n_nodes - 1];
      if (dh == 0.0) break;
      y -= h[n_nodes] / dh;
    }
    eval_H_all(n_nodes, y, 1.0, h.data());
    double s = 0.0;
    for (int k = 0; k < n_nodes; ++k) s += h[k] * h[k];
    rule.nodes[i] = y / std::sqrt(beta);
    rule.weights[i] = 1.0 / s;
  }
  return rule;
}

double inner_product_nu(const ScalarFunction& f, const ScalarFunction& g,
                        const ModelParams& params) {
  const FourierBasis basis(params);
  double s = 0.0;
  for (size_t i = 0; i < basis.nodes().size(); ++i) {
    const double v = f(basis.nodes()[i]) * g(basis.nodes()[i]);
    check_finite(v, "inner_product_nu");
    s += basis.nu_weights()[i] * v;
  }
  return s;
}

double inner_product_kappa(const ScalarFunction& f, const ScalarFunction& g,
                           double beta, int n_nodes) {
  const GaussHermiteRule rule = gauss_hermite_kappa(n_nodes, beta);
  double s = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double v = f(rule.nodes[i]) * g(rule.nodes[i]);
    check_finite(v, "inner_product_kappa");
    s += rule.weights[i] * v;
  }
  return s;
}

std::vector<double> fourier_coefficients_of_one(const ModelParams& params) {
  return fourier_coefficients_of_one(params, params.K);
}

std::vector<double> fourier_coefficients_of_one(const ModelParams& params, int K) {
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  const int n = fourier_size(K);
  std::vector<double> g(n, 0.0);
  const Potential& v = params.potential;
  if (v.is_cosine_family() && std::abs(params.beta * v.cos_coeff(1)) < 600.0) {
    // e^{-x cos q} = I_0(x) + 2 sum_n I_n(-x) cos(nq); keeps relative accuracy
    // in the tail where quadrature only resolves absolute roundoff.
    const double x = 0.5 * params.beta * v.cos_coeff(1);
    const double ax = std::abs(x);
    const double root_z = std::sqrt(std::cyl_bessel_i(0.0, 2.0 * ax));
    g[0] = std::cyl_bessel_i(0.0, ax) / root_z;
    for (int m = 1; 2 * m < n; ++m) {
      const double sign = (x > 0.0 && m % 2 == 1) ? -1.0 : 1.0;
      g[2 * m] = sign * std::numbers::sqrt2 * std::cyl_bessel_i(static_cast<double>(m), ax) / root_z;
    }
    return g;
  }
  const FourierBasis basis(params);
  const bool even = params.potential.is_even();
  for (size_t i = 0; i < basis.nodes().size(); ++i) {
    const double q = basis.nodes()[i];
    const double w = basis.nu_weights()[i];
    for (int j = 0; j < n; ++j) {
      if (even && j % 2 == 1) continue;  // sine modes vanish by parity
      g[j] += w * basis.value(j, q);
    }
  }
  return g;
}

}  // namespace hypogal
