#include "mflab/quadrature.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>

#include "mflab/error.hpp"

namespace mflab {

namespace bq = boost::math::quadrature;

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a == b) return 0.0;
  return bq::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol);
}

namespace {

template <unsigned N>
QuadRule expand_rule(double a, double b) {
  // Boost stores the nonnegative half of a symmetric rule.
  const auto& x = bq::gauss<double, N>::abscissa();
  const auto& w = bq::gauss<double, N>::weights();
  QuadRule r;
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      r.nodes.push_back(c);
      r.weights.push_back(w[i] * h);
      continue;
    }
    r.nodes.push_back(c - h * x[i]);
    r.weights.push_back(w[i] * h);
    r.nodes.push_back(c + h * x[i]);
    r.weights.push_back(w[i] * h);
  }
  return r;
}

}  // namespace

QuadRule gauss_legendre(int n, double a, double b) {
  switch (n) {
    case 10: return expand_rule<10>(a, b);
    case 20: return expand_rule<20>(a, b);
    case 30: return expand_rule<30>(a, b);
    default: throw Error("range", "gauss_legendre supports n in {10,20,30}");
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("range", "normal_quantile needs p in (0,1)");
  static const boost::math::normal_distribution<double> nd(0.0, 1.0);
  return boost::math::quantile(nd, p);
}

namespace {
inline double e1(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = e1(t), b = e1(1.0 - t);
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = e1(t), b = e1(1.0 - t);
  double da = a / (t * t), db = -b / ((1.0 - t) * (1.0 - t));
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

double bump_density(double t) {
  // normalizing constant of exp(-1/(1-t^2)) over [-1,1]
  static const double Z = integrate(
      [](double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; },
      -1.0, 1.0, 1e-14);
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t)) / Z;
}

}  // namespace mflab

namespace mflab {

namespace {

struct StepTable {
  static constexpr int K = 4096;
  std::vector<double> S;  // integral of the step at k/K
  StepTable() : S(K + 1, 0.0) {
    auto gl = gauss_legendre(10, 0.0, 1.0);
    for (int k = 0; k < K; ++k) {
      double a = double(k) / K, h = 1.0 / K, acc = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q)
        acc += gl.weights[q] * h * smooth_step(a + h * gl.nodes[q]);
      S[k + 1] = S[k] + acc;
    }
  }
};

struct BumpTable {
  static constexpr int K = 8192;
  std::vector<double> cdf;  // on the uniform grid t_k = -1 + 2k/K
  BumpTable() : cdf(K + 1, 0.0) {
    auto gl = gauss_legendre(10, 0.0, 1.0);
    double h = 2.0 / K;
    for (int k = 0; k < K; ++k) {
      double a = -1.0 + h * k, acc = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q)
        acc += gl.weights[q] * h * bump_density(a + h * gl.nodes[q]);
      cdf[k + 1] = cdf[k] + acc;
    }
    for (double& c : cdf) c /= cdf.back();
  }
};

}  // namespace

double smooth_step_integral(double v) {
  static const StepTable tab;
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return tab.S.back() + (v - 1.0);
  double s = v * StepTable::K;
  int k = std::min(static_cast<int>(s), StepTable::K - 1);
  double t = s - k, h = 1.0 / StepTable::K;
  double x0 = double(k) / StepTable::K;
  double p0 = tab.S[k], p1 = tab.S[k + 1];
  double m0 = smooth_step(x0) * h, m1 = smooth_step(x0 + h) * h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 +
         (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1;
}

double bump_quantile(double p) {
  static const BumpTable tab;
  if (p <= 0.0) return -1.0;
  if (p >= 1.0) return 1.0;
  auto it = std::upper_bound(tab.cdf.begin(), tab.cdf.end(), p);
  int k = static_cast<int>(it - tab.cdf.begin()) - 1;
  k = std::clamp(k, 0, BumpTable::K - 1);
  double c0 = tab.cdf[k], c1 = tab.cdf[k + 1];
  double f = c1 > c0 ? (p - c0) / (c1 - c0) : 0.5;
  return -1.0 + 2.0 * (k + f) / BumpTable::K;
}

}  // namespace mflab
