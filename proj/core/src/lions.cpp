#include "mflab/lions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mflab/error.hpp"

namespace mflab {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

// intercept at 0 of the least-squares line through (x_k, y_k)
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() == 1) return y[0];
  double mx = mean_of(x), my = mean_of(y), sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return my - (sxy / sxx) * mx;
}

EmpiricalMeasure shift_atom(const EmpiricalMeasure& mu, std::size_t i, double h) {
  auto x = mu.positions();
  x[i] += h;
  return EmpiricalMeasure(std::move(x), mu.weights());
}

}  // namespace

double relative_error(double value, double oracle, double floor) {
  return std::abs(value - oracle) / std::max(std::abs(oracle), floor);
}

double grad_x_V(const ValueFunction& V, double t, double x, const EmpiricalMeasure& mu) {
  return V.grad_x(t, x, mu);
}

double lions_derivative_fd(const ValueFunction& V, double t, double x,
                           const EmpiricalMeasure& mu, std::size_t atom, double h) {
  if (atom >= mu.size()) throw Error("config", "atom index out of range");
  if (mu.dim() != 1) throw Error("dim", "finite differences are one-dimensional");
  if (h <= 0.0) h = 1e-2 * std::max(1.0, std::abs(mu.x(atom)));
  if (h < 1e-3 * V.problem().grid.dx()) throw Error("resolution", "fd step below grid resolution");
  const double w = mu.w(atom);
  if (w <= 0.0) throw Error("config", "atom carries no mass");
  const double up = V.value(t, x, shift_atom(mu, atom, h));
  const double dn = V.value(t, x, shift_atom(mu, atom, -h));
  return (up - dn) / (2 * h * w);
}

DerivativeReport lions_derivative_fd_checked(const ValueFunction& V, double t, double x,
                                             const EmpiricalMeasure& mu, std::size_t atom,
                                             double h) {
  if (h <= 0.0 && atom < mu.size()) h = 1e-2 * std::max(1.0, std::abs(mu.x(atom)));
  DerivativeReport r;
  r.method = "fd";
  r.value = lions_derivative_fd(V, t, x, mu, atom, h);
  r.oracle = lions_derivative_fd(V, t, x, mu, atom, 0.5 * h);
  r.rel_err = relative_error(r.value, r.oracle);
  r.richardson_ok = r.rel_err <= 0.1;
  return r;
}

TangentPath simulate_tangent(const EmpiricalMeasure& initial, const GridField& field,
                             const HamiltonianSpec& H, std::uint64_t seed,
                             const ParticleOptions& opt, double init, double shift) {
  auto flow = forward_flow(initial, field, H, seed, opt);
  const bool quad = H.is_quadratic();
  TangentPath tp;
  tp.times = field.times;
  tp.initial = init;
  const std::size_t P = initial.size();
  tp.values.assign(field.rows(), std::vector<double>(P, init));
  for (std::size_t n = 0; n + 1 < field.rows(); ++n) {
    const double dt = field.times[n + 1] - field.times[n];
    const auto& x = flow.measures[n];
    for (std::size_t i = 0; i < P; ++i) {
      const double xi = x.x(i);
      double rate = field.ddu_at(n, xi);
      if (!quad) {
        const double p = field.du_at(n, xi), e = 1e-5;
        const double dxp = (H.dpH(xi + e, p) - H.dpH(xi - e, p)) / (2 * e);
        rate = dxp + H.dppH(xi, p) * rate;
      }
      const double g = tp.values[n][i];
      tp.values[n + 1][i] = g + rate * (g - shift) * dt;
    }
  }
  return tp;
}

DerivativeReport lions_derivative_rep(const ValueFunction& V, double x,
                                      const EmpiricalMeasure& mu, double x_tilde) {
  const auto& P = V.problem();
  using Kind = CouplingSpec::Kind;
  const auto kind = P.coupling.kind;
  if (kind != Kind::Zero && kind != Kind::MeanLinear && kind != Kind::Quadratic)
    throw Error("family", "no tangent representation for coupling " + P.coupling.name());
  if (!P.coupling.dmuG) throw Error("family", "coupling has no closed-form d_mu G");
  if (V.partition().size() != 2)
    throw Error("config", "the representation needs a single partition interval");

  auto sol = V.solve_from(0.0, mu);
  const auto& field = sol.field;
  const auto& rho0 = sol.flow.measures.front();
  const auto& rhoT = sol.flow.back();
  const int np = static_cast<int>(rho0.size());
  const auto seed = V.seed();
  const auto& opt = P.particles;

  // tangent of the particles started at x~
  auto own = simulate_tangent(allocate_particles(EmpiricalMeasure::dirac(x_tilde), np), field,
                              P.H, seed, opt, 1.0);
  const double e_own = mean_of(own.terminal());
  double dm = e_own;
  if (kind == Kind::Quadratic) {
    // d_x u = 2A(x - m_T) moves with m_T: the rest of the population follows
    // d(grad X-) = d_xx u (grad X- - M) dt, M = E[grad X_own] / E[own-type tangent]
    auto pop = simulate_tangent(rho0, field, P.H, seed, opt, 1.0);
    const double M = e_own / mean_of(pop.terminal());
    auto minus = simulate_tangent(rho0, field, P.H, seed, opt, 0.0, M);
    dm += mean_of(minus.terminal());
  }
  auto xhat = forward_flow(allocate_particles(EmpiricalMeasure::dirac(x), np), field, P.H, seed, opt);
  const auto& XT = xhat.back();
  double edmu = 0.0;
  for (std::size_t i = 0; i < XT.size(); ++i) edmu += XT.w(i) * P.coupling.dmuG(XT.x(i), rhoT, x_tilde);

  DerivativeReport r;
  r.method = "tangent";
  r.value = edmu * dm;
  r.oracle = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (std::abs(mu.x(i) - x_tilde) < 1e-12) {
      r.oracle = lions_derivative_fd(V, 0.0, x, mu, i);
      break;
    }
  r.rel_err = std::isnan(r.oracle) ? r.oracle : relative_error(r.value, r.oracle);
  return r;
}

GateauxReport gateaux_probe(const ValueFunction& V, double x, const EmpiricalMeasure& mu,
                            std::vector<double> eps) {
  if (eps.size() < 2) throw Error("config", "gateaux probe needs at least two eps values");
  std::sort(eps.begin(), eps.end());
  if (eps.front() <= 0.0) throw Error("config", "eps values must be positive");
  const double v0 = V.value(0.0, x, mu);
  GateauxReport r;
  r.eps = eps;
  std::vector<double> vr, vl;
  for (double e : eps) {
    vr.push_back(V.value(0.0, x, mu.push_forward([e](double y) { return (1 + e) * y; })));
    vl.push_back(V.value(0.0, x, mu.push_forward([e](double y) { return (1 - e) * y; })));
    r.right_quotient.push_back((vr.back() - v0) / e);
    r.left_quotient.push_back((vl.back() - v0) / -e);
  }
  // secants between neighbours avoid the base point, whose Monte Carlo error
  // sits right at the kink
  std::vector<double> mid, sr, sl;
  for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
    const double de = eps[k + 1] - eps[k];
    mid.push_back(0.5 * (eps[k] + eps[k + 1]));
    sr.push_back((vr[k + 1] - vr[k]) / de);
    sl.push_back((vl[k + 1] - vl[k]) / -de);
  }
  r.right_slope = extrapolate_to_zero(mid, sr);
  r.left_slope = extrapolate_to_zero(mid, sl);
  return r;
}

}  // namespace mflab
