#pragma once

#include <functional>
#include <vector>

namespace mflab {

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// Fixed Gauss-Legendre rule on [a, b]; n is one of 10, 20, 30.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

double normal_cdf(double x);
double normal_quantile(double p);

// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);
double smooth_step_derivative(double t);

// Normalized bump exp(-1/(1-t^2)) on [-1, 1], integrating to one.
double bump_density(double t);

}  // namespace mflab

namespace mflab {

// Antiderivative of smooth_step from 0, tabulated with cubic Hermite
// interpolation (error well below 1e-14).
double smooth_step_integral(double v);

// Quantile of bump_density, from a precomputed inverse-CDF table.
double bump_quantile(double p);

}  // namespace mflab
