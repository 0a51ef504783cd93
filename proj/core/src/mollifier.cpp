#include "mflab/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mflab/error.hpp"
#include "mflab/quadrature.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

// Dense materialization is used in d = 1 up to this fineness (N_n = 4097).
constexpr int kDenseMaxN = 32;
// Closed-form floor sums are enumerated up to this many lattice points.
constexpr double kMaxEnumerated = 2e7;
// Transition shape of the truncation h; max slope 2/(n(1-eps)) stays under
// 3/n even for d = 2.
constexpr double kRampEps = 0.05;

// Antiderivative of the slope profile used by clamp_I, on tau in [0, 1]:
// K*sigma(tau/eps) rising, flat K, then down to 1 through the same step.
struct IShape {
  double eps, K;
  explicit IShape(int n) {
    double nn = double(n) * n;
    double A = nn / (nn - 1.0);
    eps = 1.0 / (4.0 * n);
    K = (A - 0.5 * eps) / (1.0 - eps);
  }
  double integral(double tau) const {
    if (tau <= eps) return K * eps * smooth_step_integral(tau / eps);
    double s = 0.5 * K * eps;
    if (tau <= 1.0 - eps) return s + K * (tau - eps);
    s += K * (1.0 - 2.0 * eps);
    double r = tau - (1.0 - eps);
    return s + K * r - (K - 1.0) * eps * smooth_step_integral(r / eps);
  }
  double slope(double tau) const {
    if (tau <= eps) return K * smooth_step(tau / eps);
    if (tau <= 1.0 - eps) return K;
    return K - (K - 1.0) * smooth_step((tau - (1.0 - eps)) / eps);
  }
};

double I_half(double x, int n) {
  double a = 1.0 / (double(n) * n * n), b = 1.0 / n;
  if (x <= a) return 1.0;
  if (x >= b) return 1.0 - x;
  return 1.0 - (b - a) * IShape(n).integral((x - a) / (b - a));
}

double dI_half(double x, int n) {
  double a = 1.0 / (double(n) * n * n), b = 1.0 / n;
  if (x <= a) return 0.0;
  if (x >= b) return -1.0;
  return -IShape(n).slope((x - a) / (b - a));
}

// 0 -> 1 smooth ramp on [0,1] with slope at most 1/(1-eps)
double ramp(double tau) {
  const double e = kRampEps;
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  double R;
  if (tau <= e) R = e * smooth_step_integral(tau / e);
  else if (tau <= 1.0 - e) R = 0.5 * e + (tau - e);
  else R = (1.0 - e) - e * smooth_step_integral((1.0 - tau) / e);
  return R / (1.0 - e);
}

double ramp_slope(double tau) {
  const double e = kRampEps;
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  double r = tau <= e ? smooth_step(tau / e)
           : tau <= 1.0 - e ? 1.0 : smooth_step((1.0 - tau) / e);
  return r / (1.0 - e);
}

double h1(double t, int n) {
  double w = 0.5 * n;
  return 1.0 - ramp((std::abs(t) - n) / w);
}

long lattice_half(int n) { return 2L * n * n; }

}  // namespace

double MollifierParams::lattice_size() const {
  return std::pow(4.0 * n * n + 1.0, dim);
}

void MollifierParams::validate() const {
  if (n < 3) throw Error("config", "mollifier needs n >= 3");
  if (mc_samples < 1) throw Error("config", "mc_samples must be positive");
  if (simplex_exponent < 3 || simplex_exponent > 4)
    throw Error("config", "simplex_exponent must be 3 or 4");
  if (dim < 1) throw Error("dim", "dimension must be positive");
}

ScalarMeasureFunctional ScalarMeasureFunctional::constant(double c) {
  ScalarMeasureFunctional U;
  U.eval = [c](const EmpiricalMeasure&) { return c; };
  U.lions_gradient = [](const EmpiricalMeasure&, double) { return 0.0; };
  U.linear_integrand = [c](const double*) { return c; };
  return U;
}

ScalarMeasureFunctional ScalarMeasureFunctional::linear(
    std::function<double(double)> g, std::function<double(double)> dg) {
  ScalarMeasureFunctional U;
  U.eval = [g](const EmpiricalMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.w(i) * g(mu.x(i));
    return s;
  };
  if (dg) U.lions_gradient = [dg](const EmpiricalMeasure&, double x) { return dg(x); };
  U.linear_integrand = [g](const double* x) { return g(x[0]); };
  return U;
}

double clamp_I(double x, int n) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("range", "clamp_I needs x in [0,1]");
  if (n < 3) throw Error("config", "clamp_I needs n >= 3");
  return x <= 0.5 ? I_half(x, n) : 1.0 - I_half(1.0 - x, n);
}

double clamp_I_derivative(double x, int n) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("range", "clamp_I needs x in [0,1]");
  return x <= 0.5 ? dI_half(x, n) : dI_half(1.0 - x, n);
}

double bump_phi(const std::vector<int>& i, const std::vector<double>& x, int n) {
  if (i.size() != x.size()) throw Error("dim", "index and point dimensions differ");
  double v = 1.0;
  for (std::size_t l = 0; l < i.size(); ++l) {
    double t = std::abs(n * x[l] - i[l]);
    if (t >= 1.0) return 0.0;
    v *= clamp_I(t, n);
  }
  return v;
}

double bump_phi_derivative_1d(int i, double x, int n) {
  double t = n * x - i;
  if (std::abs(t) >= 1.0) return 0.0;
  double s = t < 0.0 ? -1.0 : 1.0;
  return s * n * clamp_I_derivative(std::abs(t), n);
}

double truncation_h(const std::vector<double>& x, int n) {
  double v = 1.0;
  for (double t : x) v *= h1(t, n);
  return v;
}

double truncation_h_1d_derivative(double t, int n) {
  double w = 0.5 * n;
  double s = t < 0.0 ? -1.0 : 1.0;
  return -s * ramp_slope((std::abs(t) - n) / w) / w;
}

double LatticeWeights::total() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

double LatticeWeights::at(const std::vector<int>& i) const {
  for (std::size_t k = 0; k < index.size(); ++k)
    if (index[k] == i) return weight[k];
  return 0.0;
}

LatticeWeights psi_weights(const EmpiricalMeasure& mu, int n) {
  if (n < 3) throw Error("config", "mollifier needs n >= 3");
  const int d = mu.dim();
  std::map<std::vector<int>, double> acc;
  double outside = 0.0;
  std::vector<int> base(d), idx(d);
  std::vector<double> lo(d), hi(d), x(d);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    for (int l = 0; l < d; ++l) x[l] = mu.x(a, l);
    double h = truncation_h(x, n);
    outside += mu.w(a) * (1.0 - h);
    if (h == 0.0) continue;
    for (int l = 0; l < d; ++l) {
      double s = n * x[l];
      base[l] = static_cast<int>(std::floor(s));
      double f = s - base[l];
      lo[l] = clamp_I(f, n);        // weight of the left lattice point
      hi[l] = clamp_I(1.0 - f, n);  // weight of the right one
    }
    for (int mask = 0; mask < (1 << d); ++mask) {
      double v = mu.w(a) * h;
      for (int l = 0; l < d; ++l) {
        bool right = (mask >> l) & 1;
        idx[l] = base[l] + (right ? 1 : 0);
        v *= right ? hi[l] : lo[l];
      }
      if (v > 0.0) acc[idx] += v;
    }
  }
  if (outside > 0.0) acc[std::vector<int>(d, 0)] += outside;
  LatticeWeights out;
  out.n = n;
  out.dim = d;
  for (auto& [k, v] : acc) {
    out.index.push_back(k);
    out.weight.push_back(v);
  }
  return out;
}

namespace {

// y_i for the N-1 nonzero lattice indices (in increasing order), sample s
std::vector<double> draw_simplex(const MollifierParams& p, long s, std::size_t count) {
  std::vector<double> y(count);
  const double r = std::pow(p.lattice_size(), -double(p.simplex_exponent));
  Stream st(p.seed, {0x4D4F4C4Cull, static_cast<std::uint64_t>(s)});
  for (std::size_t k = 0; k < count; k += 4) {
    auto b = st.block(k / 4);
    for (std::size_t j = 0; j < 4 && k + j < count; ++j)
      y[k + j] = r * bump_quantile(u32_to_open01(b[j]));
  }
  return y;
}

struct DenseLattice {
  std::vector<double> positions;
  std::vector<double> psi;
};

DenseLattice dense_psi(const EmpiricalMeasure& mu, int n) {
  long L = lattice_half(n);
  DenseLattice D;
  D.positions.resize(2 * L + 1);
  D.psi.assign(2 * L + 1, 0.0);
  for (long i = -L; i <= L; ++i) D.positions[i + L] = double(i) / n;
  auto lw = psi_weights(mu, n);
  for (std::size_t k = 0; k < lw.index.size(); ++k) {
    long i = lw.index[k][0];
    if (i < -L || i > L) throw Error("support", "lattice weight outside Z_n");
    D.psi[i + L] += lw.weight[k];
  }
  return D;
}

std::vector<double> perturbed_weights(const DenseLattice& D, const MollifierParams& p,
                                      long sample) {
  const std::size_t N = D.psi.size();
  const long L = static_cast<long>(N / 2);
  const double Nn = double(N);
  std::vector<double> w(N);
  std::vector<double> y(N, 0.0);
  if (sample >= 0) {
    auto ys = draw_simplex(p, sample, N - 1);
    double s = 0.0;
    for (std::size_t k = 0, i = 0; i < N; ++i) {
      if (long(i) == L) continue;
      y[i] = ys[k++];
      s += y[i];
    }
    y[L] = -s;
  }
  for (std::size_t i = 0; i < N; ++i)
    w[i] = Nn / (Nn + 1.0) * (D.psi[i] + 1.0 / (Nn * Nn) + y[i]);
  // renormalize the last ulp so the measure invariant holds exactly
  double tot = 0.0;
  for (double v : w) tot += v;
  for (double& v : w) v /= tot;
  return w;
}

}  // namespace

EmpiricalMeasure discretize(const EmpiricalMeasure& mu, const MollifierParams& p,
                            long sample) {
  p.validate();
  if (mu.dim() != 1) throw Error("dim", "dense discretization is for d = 1");
  if (p.n > kDenseMaxN) throw Error("size", "dense discretization needs n <= 32");
  auto D = dense_psi(mu, p.n);
  return EmpiricalMeasure(D.positions, perturbed_weights(D, p, sample), 1);
}

MonteCarloValue mollify_stats(const ScalarMeasureFunctional& U,
                              const EmpiricalMeasure& mu, const MollifierParams& p) {
  p.validate();
  if (mu.dim() != p.dim) throw Error("dim", "measure and mollifier dimensions differ");
  if (U.linear_integrand) {
    // E[y] = 0 for the symmetric density, so only psi and the floor remain
    const double N = p.lattice_size();
    if (N > kMaxEnumerated) throw Error("size", "lattice too large for the closed form");
    auto lw = psi_weights(mu, p.n);
    std::vector<double> pt(p.dim);
    double a = 0.0;
    for (std::size_t k = 0; k < lw.index.size(); ++k) {
      for (int l = 0; l < p.dim; ++l) pt[l] = double(lw.index[k][l]) / p.n;
      a += lw.weight[k] * U.linear_integrand(pt.data());
    }
    const long L = lattice_half(p.n), side = 2 * L + 1;
    double floor_sum = 0.0;
    std::vector<long> ctr(p.dim, 0);
    for (long flat = 0; flat < static_cast<long>(N); ++flat) {
      long f = flat;
      for (int l = 0; l < p.dim; ++l) {
        pt[l] = double(f % side - L) / p.n;
        f /= side;
      }
      floor_sum += U.linear_integrand(pt.data());
    }
    return {N / (N + 1.0) * (a + floor_sum / (N * N)), 0.0};
  }
  if (p.dim != 1 || p.n > kDenseMaxN)
    throw Error("family", "general functionals are mollified only for d = 1, n <= 32");
  auto D = dense_psi(mu, p.n);
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < p.mc_samples; ++k) {
    EmpiricalMeasure m(D.positions, perturbed_weights(D, p, k), 1);
    double v;
    try {
      v = U.eval(m);
    } catch (const std::exception& e) {
      throw Error("functional", e.what());
    }
    if (!std::isfinite(v)) throw Error("functional", "functional returned a non-finite value");
    s += v;
    s2 += v * v;
  }
  const double M = p.mc_samples;
  double mean = s / M;
  double var = M > 1 ? std::max(0.0, (s2 - M * mean * mean) / (M - 1.0)) : 0.0;
  return {mean, std::sqrt(var / M)};
}

double mollify(const ScalarMeasureFunctional& U, const EmpiricalMeasure& mu,
               const MollifierParams& p) {
  return mollify_stats(U, mu, p).value;
}

double mollify_xmu(const XMeasureFunctional& U, double x, const EmpiricalMeasure& mu,
                   const MollifierParams& p) {
  auto k = DiscreteKernel::shifted_bump(0.0, 20);
  double acc = 0.0;
  for (std::size_t q = 0; q < k.nodes.size(); ++q) {
    double xq = x - k.nodes[q] / p.n;
    ScalarMeasureFunctional Ux;
    Ux.eval = [&U, xq](const EmpiricalMeasure& m) { return U(xq, m); };
    acc += k.weights[q] * mollify(Ux, mu, p);
  }
  return acc;
}

double DiscreteKernel::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * nodes[k];
  return s;
}

DiscreteKernel DiscreteKernel::shifted_bump(double shift, int points) {
  auto gl = gauss_legendre(points);
  DiscreteKernel k;
  double tot = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    double w = gl.weights[q] * bump_density(gl.nodes[q]);
    k.nodes.push_back(gl.nodes[q] + shift);
    k.weights.push_back(w);
    tot += w;
  }
  for (double& w : k.weights) w /= tot;
  return k;
}

XMeasureFunctional mollify_x(XMeasureFunctional U, double eps, DiscreteKernel k) {
  return [U = std::move(U), eps, k = std::move(k)](double x, const EmpiricalMeasure& mu) {
    double s = 0.0;
    for (std::size_t q = 0; q < k.nodes.size(); ++q)
      s += k.weights[q] * U(x - eps * k.nodes[q], mu);
    return s;
  };
}

XMeasureFunctional square_gap_functional() {
  return [](double x, const EmpiricalMeasure& mu) {
    double d = x * x - functional(mu, Functional::SecondMoment);
    return d * d;
  };
}

double xmollified_pairing_formula(const EmpiricalMeasure& mu1,
                                  const EmpiricalMeasure& mu2, double eps,
                                  double m_zeta) {
  double dm = mean(mu1) - mean(mu2);
  double dm2 = functional(mu1, Functional::SecondMoment) -
               functional(mu2, Functional::SecondMoment);
  return -2.0 * dm2 * dm2 + 4.0 * eps * m_zeta * dm * dm2;
}

double blowup_probe(int m, ProbeMetric metric, int mc_samples, std::uint64_t seed) {
  if (m < 4) throw Error("config", "blow-up probe needs m >= 4");
  MollifierParams p;
  p.n = m;
  p.mc_samples = mc_samples;
  p.simplex_exponent = 4;
  p.seed = seed;
  const double mm = double(m) * m;
  auto mu = EmpiricalMeasure::dirac((m + 2) / (2.0 * mm));
  auto nu = EmpiricalMeasure::dirac((m - 2) / (2.0 * mm));
  auto ref = discretize(nu, p, -1);
  auto dist = [metric](const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return metric == ProbeMetric::W2 ? w2_distance(a, b) : w1_distance(a, b);
  };
  ScalarMeasureFunctional U;
  U.eval = [&](const EmpiricalMeasure& x) { return dist(x, ref); };
  double a = mollify(U, mu, p), b = mollify(U, nu, p);
  return std::abs(a - b) / dist(mu, nu);
}

double pointwise_gradient_gap(const SmoothProfile& g, int n, double x) {
  if (n < 3) throw Error("config", "mollifier needs n >= 3");
  if (g.support_radius > n) throw Error("support", "support of g must lie in [-n, n]");
  const double N = 4.0 * n * n + 1.0;
  const long L = lattice_half(n);
  const double h = h1(x, n), dh = truncation_h_1d_derivative(x, n);
  double s = 0.0;
  long c = static_cast<long>(std::floor(n * x));
  for (long i = c - 1; i <= c + 2; ++i) {
    if (i < -L || i > L) continue;
    double phi = bump_phi({int(i)}, {x}, n);
    double dphi = bump_phi_derivative_1d(int(i), x, n);
    s += g.g(double(i) / n) * (dphi * h + phi * dh);
  }
  s -= g.g(0.0) * dh;
  return std::abs(N / (N + 1.0) * s - g.dg(x));
}

}  // namespace mflab
