#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflab/mfg.hpp"

namespace mflab {

// Tangent processes along particle paths: values[row][particle].
struct TangentPath {
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  double initial = 1.0;
  const std::vector<double>& terminal() const { return values.back(); }
};

struct DerivativeReport {
  double value = 0.0;
  double oracle = 0.0;
  double rel_err = 0.0;   // |value - oracle| / max(|oracle|, floor)
  std::string method;
  bool richardson_ok = true;  // fd at h and h/2 agree within 10%
};

double relative_error(double value, double oracle, double floor = 1e-3);

// d_x u(t, x) of the local solve started from (t, mu)
double grad_x_V(const ValueFunction& V, double t, double x, const EmpiricalMeasure& mu);

// (V(mu with atom i at x_i + h) - V(mu with atom i at x_i - h)) / (2 h w_i).
// h <= 0 picks 1e-2 * max(1, |x_i|).
double lions_derivative_fd(const ValueFunction& V, double t, double x,
                           const EmpiricalMeasure& mu, std::size_t atom, double h = 0.0);
DerivativeReport lions_derivative_fd_checked(const ValueFunction& V, double t, double x,
                                             const EmpiricalMeasure& mu, std::size_t atom,
                                             double h = 0.0);

// Euler tangent d(grad X) = [dxpH + dppH d_xx u] (grad X - shift) dt along the
// paths of forward_flow from `initial`, grad X(t0) = init.
TangentPath simulate_tangent(const EmpiricalMeasure& initial, const GridField& field,
                             const HamiltonianSpec& H, std::uint64_t seed,
                             const ParticleOptions& opt, double init, double shift = 0.0);

// d_mu V(0, x, mu, x~) from tangent processes, for zero, mean-linear and
// quadratic couplings (F = 0). The oracle is the finite difference at the atom
// of mu located at x~, or NaN when x~ is not an atom.
DerivativeReport lions_derivative_rep(const ValueFunction& V, double x,
                                      const EmpiricalMeasure& mu, double x_tilde);

struct GateauxReport {
  std::vector<double> eps;
  std::vector<double> right_quotient;  // (V(mu_eps) - V(mu)) / eps
  std::vector<double> left_quotient;   // (V(mu_-eps) - V(mu)) / (-eps)
  double right_slope = 0.0;
  double left_slope = 0.0;
};

// Directional derivatives of eps -> V(0, x, law of (1 + eps) xi), xi ~ mu.
// Slopes come from secants between neighbouring eps on each side,
// extrapolated linearly to eps = 0.
GateauxReport gateaux_probe(const ValueFunction& V, double x, const EmpiricalMeasure& mu,
                            std::vector<double> eps = {0.05, 0.1, 0.15, 0.2});

}  // namespace mflab
