#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mflab/measures.hpp"

namespace mflab {

struct MollifierParams {
  int n = 4;                 // lattice fineness, n >= 3
  int mc_samples = 256;      // draws of the simplex perturbation y
  int simplex_exponent = 3;  // |y_i| <= N_n^{-e}
  std::uint64_t seed = 0;
  int dim = 1;

  // N_n = (4n^2 + 1)^d
  double lattice_size() const;
  void validate() const;
};

// U(mu) with optional structure the mollifier can exploit.
struct ScalarMeasureFunctional {
  std::function<double(const EmpiricalMeasure&)> eval;
  // d=1 analytic Lions gradient d_mu U(mu, x), for oracle tests
  std::function<double(const EmpiricalMeasure&, double)> lions_gradient;
  // U(mu) = integral of g dmu; enables the closed form in any d
  std::function<double(const double*)> linear_integrand;

  static ScalarMeasureFunctional constant(double c);
  static ScalarMeasureFunctional linear(std::function<double(double)> g,
                                        std::function<double(double)> dg = {});
};

using XMeasureFunctional = std::function<double(double, const EmpiricalMeasure&)>;

double clamp_I(double x, int n);
double clamp_I_derivative(double x, int n);

// phi_i(x) = prod_l I(|n x_l - i_l|) on the cell neighbourhood
double bump_phi(const std::vector<int>& i, const std::vector<double>& x, int n);
double bump_phi_derivative_1d(int i, double x, int n);

// Truncation: 1 on Q_n, 0 off Q_{3n/2}.
double truncation_h(const std::vector<double>& x, int n);
double truncation_h_1d_derivative(double t, int n);

// Sparse lattice weights psi_i(mu). Indices are d-tuples flattened.
struct LatticeWeights {
  int n = 0;
  int dim = 1;
  std::vector<std::vector<int>> index;
  std::vector<double> weight;
  double total() const;
  double at(const std::vector<int>& i) const;  // 0 when absent
};
LatticeWeights psi_weights(const EmpiricalMeasure& mu, int n);

// Dense perturbed measure mu_n(y) for sample s (s < 0 means y = 0); d = 1.
EmpiricalMeasure discretize(const EmpiricalMeasure& mu, const MollifierParams& p,
                            long sample = -1);

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
};

MonteCarloValue mollify_stats(const ScalarMeasureFunctional& U,
                              const EmpiricalMeasure& mu, const MollifierParams& p);
double mollify(const ScalarMeasureFunctional& U, const EmpiricalMeasure& mu,
               const MollifierParams& p);

// U_n(x, mu) = int U^mu_n(x - y/n, mu) zeta_0(y) dy, 20-point rule in y.
double mollify_xmu(const XMeasureFunctional& U, double x, const EmpiricalMeasure& mu,
                   const MollifierParams& p);

// x-only mollification U_{x,eps}(x,mu) = sum_k w_k U(x - eps y_k, mu) with a
// discrete kernel (nodes y_k, weights w_k summing to one).
struct DiscreteKernel {
  std::vector<double> nodes;
  std::vector<double> weights;
  double mean() const;
  static DiscreteKernel shifted_bump(double shift, int points = 20);
};
XMeasureFunctional mollify_x(XMeasureFunctional U, double eps, DiscreteKernel k);

// (|x|^2 - m2_mu)^2, the monotone example whose x-mollification is not
XMeasureFunctional square_gap_functional();
// -2 dm2^2 + 4 eps m_zeta dm dm2
double xmollified_pairing_formula(const EmpiricalMeasure& mu1,
                                  const EmpiricalMeasure& mu2, double eps,
                                  double m_zeta);

enum class ProbeMetric { W2, W1 };

// |U^m_m(mu^m) - U^m_m(nu^m)| / W(mu^m, nu^m) with U^m = W(., nu^m_m(0)),
// mu^m = delta_{(m+2)/(2m^2)}, nu^m = delta_{(m-2)/(2m^2)}, exponent 4.
double blowup_probe(int m, ProbeMetric metric, int mc_samples = 64,
                    std::uint64_t seed = 0);
inline double w2_blowup_probe(int m, int mc_samples = 64, std::uint64_t seed = 0) {
  return blowup_probe(m, ProbeMetric::W2, mc_samples, seed);
}

// |d_mu U_n(delta_0, x) - g'(x)| for U = int g dmu, from the lattice formula.
struct SmoothProfile {
  std::function<double(double)> g;
  std::function<double(double)> dg;
  double support_radius = 1.0;
};
double pointwise_gradient_gap(const SmoothProfile& g, int n, double x = 0.0);

}  // namespace mflab
