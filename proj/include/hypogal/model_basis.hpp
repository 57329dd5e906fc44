#pragma once

#include <functional>
#include <vector>

namespace hypogal {

// V(q) = c0 + sum_{n>=1} a_n cos(nq) + b_n sin(nq). Coefficient vectors are
// indexed by n-1.
class Potential {
 public:
  Potential();  // 1 - cos q
  Potential(double c0, std::vector<double> cos_coeffs,
            std::vector<double> sin_coeffs);

  static Potential cosine();
  static Potential flat();

  double value(double q) const;
  double derivative(double q) const;

  double constant() const { return c0_; }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }
  double cos_coeff(int n) const;
  double sin_coeff(int n) const;

  // Highest frequency with a nonzero coefficient (0 for a constant).
  int degree() const;
  bool is_even() const;
  // c0 + a1 cos q; the closed-form derivative tables apply.
  bool is_cosine_family() const;

  bool operator==(const Potential& other) const;

 private:
  double c0_ = 1.0;
  std::vector<double> a_;
  std::vector<double> b_;
};

struct ModelParams {
  double beta = 1.0;
  double gamma = 1.0;
  Potential potential;
  int K = 10;
  int L = 20;
  int n_quad_q = 1024;

  // Throws Error(kInvalidArgument) when an invariant is violated.
  void validate() const;
  // Smallest node count satisfying the quadrature invariant for K modes.
  static int min_quadrature(int K, int degree);
};

// Fourier index j: 0 is the constant, 2k-1 is sin(kq), 2k is cos(kq).
inline int mode_frequency(int j) { return (j + 1) / 2; }
inline int fourier_size(int K) { return 2 * K - 1; }

double eval_potential(const ModelParams& params, double q);
double partition_function_nu(const ModelParams& params);

// Orthonormal basis of L^2(nu): G_k = phi_k(q) e^{beta V/2} * normalization.
class FourierBasis {
 public:
  explicit FourierBasis(const ModelParams& params);

  double value(int k, double q) const;
  double derivative(int k, double q) const;
  double partition_function() const { return z_; }
  const ModelParams& params() const { return params_; }

  // Trapezoid nodes q_i and the nu-weights w_i (sum to 1).
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& nu_weights() const { return weights_; }

 private:
  ModelParams params_;
  double z_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

double eval_G(int k, double q, const ModelParams& params);

// Normalized Hermite functions H_l(p) = He_l(sqrt(beta) p) / sqrt(l!).
double eval_H(int l, double p, double beta);
double eval_dH(int l, double p, double beta);
// Values H_0..H_{count-1} at p.
void eval_H_all(int count, double p, double beta, double* out);

struct GaussHermiteRule {
  std::vector<double> nodes;    // momenta p_i
  std::vector<double> weights;  // kappa-weights, sum to 1
};
GaussHermiteRule gauss_hermite_kappa(int n_nodes, double beta);

using ScalarFunction = std::function<double(double)>;

double inner_product_nu(const ScalarFunction& f, const ScalarFunction& g,
                        const ModelParams& params);
double inner_product_kappa(const ScalarFunction& f, const ScalarFunction& g,
                           double beta, int n_nodes);

// g_j = int G_j dnu for j < 2K-1 (K from params, or explicit).
std::vector<double> fourier_coefficients_of_one(const ModelParams& params);
std::vector<double> fourier_coefficients_of_one(const ModelParams& params,
                                                int K);

}  // namespace hypogal
