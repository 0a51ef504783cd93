#pragma once

// Independent reference computations used only by tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// Gauss-Hermite nodes/weights for the standard normal (probabilists'
// weight), from the Jacobi matrix eigenproblem (Golub-Welsch).
struct Rule {
  std::vector<double> x, w;
};

inline Rule gauss_hermite_normal(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int k = 0; k < n; ++k) {
    r.x.push_back(es.eigenvalues()(k));
    double v = es.eigenvectors()(0, k);
    r.w.push_back(v * v);
  }
  return r;
}

// E[f(Z)], Z ~ N(0, var)
inline double normal_expectation(const std::function<double(double)>& f,
                                 double var = 1.0, int n = 80) {
  auto r = gauss_hermite_normal(n);
  double s = 0.0, sd = std::sqrt(var);
  for (int k = 0; k < n; ++k) s += r.w[k] * f(sd * r.x[k]);
  return s;
}

// ln E[exp(g(x + B_tau))]
inline double cole_hopf(const std::function<double(double)>& g, double x,
                        double tau) {
  if (tau <= 0.0) return g(x);
  return std::log(normal_expectation([&](double z) { return std::exp(g(x + z)); }, tau));
}

// W1 for equal-size equal-weight samples: mean gap of order statistics.
inline double w1_equal(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / a.size();
}

inline double w2_equal(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / a.size());
}

// Classic RK4 for a small ODE system y' = f(t, y), from t0 to t1.
template <class F>
std::vector<double> rk4(F f, std::vector<double> y, double t0, double t1, int steps) {
  double h = (t1 - t0) / steps, t = t0;
  auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (int k = 0; k < steps; ++k) {
    auto k1 = f(t, y);
    auto k2 = f(t + h / 2, axpy(y, h / 2, k1));
    auto k3 = f(t + h / 2, axpy(y, h / 2, k2));
    auto k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return y;
}

}  // namespace oracle
