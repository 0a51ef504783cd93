#include "mflab/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mflab/error.hpp"
#include "mflab/rng.hpp"

namespace mflab {

void SpaceTimeGrid::validate() const {
  if (!(x_min < x_max)) throw Error("config", "grid needs x_min < x_max");
  if (nx < 3) throw Error("config", "grid needs nx >= 3");
  if (!(t0 < t1)) throw Error("config", "grid needs t0 < t1");
  if (nt < 0) throw Error("config", "grid nt must be >= 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw Error("config", "grid safety must be in (0,1]");
}

namespace {

double interp_row(const SpaceTimeGrid& g, const std::vector<double>& row, double x) {
  double s = (x - g.x_min) / g.dx();
  if (s <= 0.0) return row.front();
  if (s >= g.nx - 1) return row.back();
  int j = static_cast<int>(s);
  double f = s - j;
  return row[j] + f * (row[j + 1] - row[j]);
}

void derivatives(const SpaceTimeGrid& g, const std::vector<double>& u,
                 std::vector<double>& du, std::vector<double>& ddu) {
  const int n = g.nx;
  const double dx = g.dx();
  du.assign(n, 0.0);
  ddu.assign(n, 0.0);
  for (int j = 1; j < n - 1; ++j) {
    du[j] = (u[j + 1] - u[j - 1]) / (2 * dx);
    ddu[j] = (u[j + 1] - 2 * u[j] + u[j - 1]) / (dx * dx);
  }
  du[0] = (u[1] - u[0]) / dx;
  du[n - 1] = (u[n - 1] - u[n - 2]) / dx;
  ddu[0] = ddu[1];
  ddu[n - 1] = ddu[n - 2];
}

// H(t, x, p) and dpH(t, x, p); quadratic gets an inlined fast path
struct TimeHamiltonian {
  bool quadratic = false;
  double constant = 0.0;
  std::function<double(double, double, double)> H, dp;
};

GridField solve_impl(const SpaceTimeGrid& grid, const TimeHamiltonian& ham,
                     const std::function<double(double, double)>& F,
                     std::vector<double> u, double theta_R, int record_intervals) {
  grid.validate();
  const int nx = grid.nx;
  const double dx = grid.dx();
  const double span = grid.t1 - grid.t0;
  const double bound = dx * dx / (1.0 + dx * theta_R);
  int nt = grid.nt;
  if (nt > 0) {
    if (span / nt > bound * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt = " << span / nt << " exceeds the stability bound " << bound;
      throw Error("cfl", os.str());
    }
  } else {
    nt = static_cast<int>(std::ceil(span / (grid.safety * bound)));
  }
  int stride = 1;
  if (record_intervals > 0) {
    stride = (nt + record_intervals - 1) / record_intervals;
    nt = stride * record_intervals;
  }
  const double dt = span / nt;

  GridField f;
  f.grid = grid;
  f.grid.nt = nt;
  f.theta = theta_R;
  f.steps = nt;
  const int nrows = nt / stride + 1;
  f.times.resize(nrows);
  f.u.resize(nrows);
  f.u[nrows - 1] = u;
  std::vector<double> xs(nx), un(nx);
  for (int j = 0; j < nx; ++j) xs[j] = grid.x(j);
  const double tol_theta = theta_R * (1.0 + 1e-9) + 1e-12;

  for (int n = nt; n >= 1; --n) {
    const double t = grid.t0 + n * dt;
    for (int j = 1; j < nx - 1; ++j) {
      const double pm = (u[j] - u[j - 1]) / dx, pp = (u[j + 1] - u[j]) / dx;
      const double pc = 0.5 * (pm + pp);
      double th, h;
      if (ham.quadratic) {
        th = std::max(std::abs(pm), std::abs(pp));
        h = 0.5 * pc * pc + ham.constant;
      } else {
        th = std::max(std::abs(ham.dp(t, xs[j], pm)), std::abs(ham.dp(t, xs[j], pp)));
        h = ham.H(t, xs[j], pc);
      }
      if (th > tol_theta) {
        std::ostringstream os;
        os << "slope " << th << " left the working radius (theta_R = " << theta_R
           << ") at step " << n << ", x = " << xs[j];
        throw Error("cfl", os.str());
      }
      // Lax-Friedrichs viscosity, reduced by the physical diffusion 1/2
      const double D = std::max(0.5, 0.5 * th * dx);
      const double fv = F ? F(t - 0.5 * dt, xs[j]) : 0.0;
      un[j] = u[j] + dt * (D * (u[j + 1] - 2 * u[j] + u[j - 1]) / (dx * dx) + h + fv);
    }
    un[0] = 2 * un[1] - un[2];
    un[nx - 1] = 2 * un[nx - 2] - un[nx - 3];
    for (int j = 0; j < nx; ++j)
      if (!std::isfinite(un[j])) {
        std::ostringstream os;
        os << "non-finite value at time index " << n - 1;
        throw Error("blowup", os.str());
      }
    u.swap(un);
    if ((n - 1) % stride == 0) f.u[(n - 1) / stride] = u;
  }
  f.du.resize(nrows);
  f.ddu.resize(nrows);
  for (int r = 0; r < nrows; ++r) {
    f.times[r] = grid.t0 + r * stride * dt;
    derivatives(grid, f.u[r], f.du[r], f.ddu[r]);
  }
  f.times.back() = grid.t1;
  return f;
}

}  // namespace

double GridField::u_at(std::size_t r, double x) const { return interp_row(grid, u[r], x); }
double GridField::du_at(std::size_t r, double x) const { return interp_row(grid, du[r], x); }
double GridField::ddu_at(std::size_t r, double x) const { return interp_row(grid, ddu[r], x); }

std::size_t GridField::row_of(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return times.size() - 1;
  std::size_t k = it - times.begin();
  if (k > 0 && std::abs(times[k - 1] - t) < std::abs(times[k] - t)) --k;
  return k;
}

double GridField::max_abs_du() const {
  double m = 0.0;
  for (auto& r : du)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

double GridField::max_abs_ddu() const {
  double m = 0.0;
  for (auto& r : ddu)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

void GridField::write_csv(std::ostream& os, std::size_t stride) const {
  auto old = os.precision(17);
  os << "t,x,u,du\n";
  for (std::size_t r = 0; r < rows(); r += std::max<std::size_t>(stride, 1))
    for (int j = 0; j < grid.nx; ++j)
      os << times[r] << ',' << grid.x(j) << ',' << u[r][j] << ',' << du[r][j] << '\n';
  os.precision(old);
}

HamiltonianSpec HamiltonianSpec::quadratic(double constant) {
  HamiltonianSpec h;
  h.name = "quadratic";
  h.constant = constant;
  h.H = [constant](double, double z) { return 0.5 * z * z + constant; };
  h.dpH = [](double, double z) { return z; };
  h.dxH = [](double, double) { return 0.0; };
  h.dppH = [](double, double) { return 1.0; };
  return h;
}

double HamiltonianSpec::max_slope(double R, double a, double b) const {
  if (is_quadratic()) return R;
  double m = 0.0;
  for (int i = 0; i <= 64; ++i)
    for (int k = 0; k <= 256; ++k) {
      double x = a + (b - a) * i / 64.0, z = -R + 2 * R * k / 256.0;
      m = std::max(m, std::abs(dpH(x, z)));
    }
  return m;
}

double convexity_witness(const HamiltonianSpec& H, double R, double a, double b,
                         int samples, std::uint64_t seed) {
  Stream s(seed, {0x434F4E56ull});
  double worst = INFINITY;
  for (int k = 0; k < samples; ++k) {
    double x = a + (b - a) * s.uniform();
    double z1 = R * (2 * s.uniform() - 1), z2 = R * (2 * s.uniform() - 1);
    worst = std::min(worst, H.H(x, z2) - H.H(x, z1) - H.dpH(x, z1) * (z2 - z1));
  }
  return worst;
}

CouplingSpec CouplingSpec::zero() {
  CouplingSpec c;
  c.kind = Kind::Zero;
  c.F = c.G = c.dxF = c.dxG = [](double, const EmpiricalMeasure&) { return 0.0; };
  c.dmuG = [](double, const EmpiricalMeasure&, double) { return 0.0; };
  c.x_free_terminal = true;
  return c;
}

CouplingSpec CouplingSpec::mean_linear(std::function<double(double)> g,
                                       std::function<double(double)> dg, double k) {
  CouplingSpec c = zero();
  c.kind = Kind::MeanLinear;
  c.c = k;
  c.g = g;
  c.dg = dg;
  c.G = [g, k](double x, const EmpiricalMeasure& mu) { return g(x) + k * mean(mu); };
  c.dxG = [dg](double x, const EmpiricalMeasure&) { return dg(x); };
  c.dmuG = [k](double, const EmpiricalMeasure&, double) { return k; };
  c.lipschitz = std::abs(k);
  c.x_free_terminal = false;
  return c;
}

CouplingSpec CouplingSpec::quadratic() {
  CouplingSpec c = zero();
  c.kind = Kind::Quadratic;
  c.G = [](double x, const EmpiricalMeasure& mu) {
    double d = x - mean(mu);
    return d * d;
  };
  c.dxG = [](double x, const EmpiricalMeasure& mu) { return 2.0 * (x - mean(mu)); };
  c.dmuG = [](double x, const EmpiricalMeasure& mu, double) { return -2.0 * (x - mean(mu)); };
  c.lipschitz = 16.0;  // 2|2x - m1 - m2| with |x|, |m| <= 4
  c.x_free_terminal = false;
  return c;
}

CouplingSpec CouplingSpec::abs_deviation() {
  CouplingSpec c = zero();
  c.kind = Kind::AbsDeviation;
  c.G = [](double, const EmpiricalMeasure& mu) {
    return std::abs(functional(mu, Functional::AbsDeviation) - 2.0 / std::sqrt(std::numbers::pi));
  };
  c.dmuG = nullptr;  // not differentiable in mu
  c.lipschitz = 2.0;
  c.x_free_terminal = true;
  return c;
}

std::string CouplingSpec::name() const {
  switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::MeanLinear: return "mean-linear";
    case Kind::Quadratic: return "quadratic";
    case Kind::AbsDeviation: return "abs-deviation";
    case Kind::Custom: return "custom";
  }
  return "custom";
}

double lipschitz_witness(const CouplingSpec& c, int pairs, std::uint64_t seed) {
  Stream s(seed, {0x4C495043ull});
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = std::clamp(1.5 * s.normal(), -4.0, 4.0);
    for (auto& v : b) v = std::clamp(1.5 * s.normal() + 0.5, -4.0, 4.0);
    auto mu = EmpiricalMeasure::uniform(a), nu = EmpiricalMeasure::uniform(b);
    double x = 8.0 * s.uniform() - 4.0;
    double w = w1_distance(mu, nu);
    if (w < 1e-12) continue;
    worst = std::max(worst, std::abs(c.G(x, mu) - c.G(x, nu)) / w);
    if (c.F) worst = std::max(worst, std::abs(c.F(x, mu) - c.F(x, nu)) / w);
  }
  return worst;
}

GridField solve_backward(const SpaceTimeGrid& grid, const HamiltonianSpec& H,
                         const std::function<double(double, double)>& F_flow,
                         const std::function<double(double)>& G_terminal,
                         const HjbOptions& opt) {
  grid.validate();
  std::vector<double> u(grid.nx);
  for (int j = 0; j < grid.nx; ++j) u[j] = G_terminal(grid.x(j));
  double R = opt.radius;
  if (R <= 0.0) {
    double m = 0.0;
    for (int j = 0; j + 1 < grid.nx; ++j) m = std::max(m, std::abs(u[j + 1] - u[j]) / grid.dx());
    R = std::max(1.0, 1.25 * m);
  }
  TimeHamiltonian th;
  th.quadratic = H.is_quadratic();
  th.constant = H.constant;
  th.H = [&H](double, double x, double p) { return H.H(x, p); };
  th.dp = [&H](double, double x, double p) { return H.dpH(x, p); };
  return solve_impl(grid, th, F_flow, std::move(u), H.max_slope(R, grid.x_min, grid.x_max),
                    opt.record_intervals);
}

GridField feynman_kac_mean(const SpaceTimeGrid& grid,
                           const std::function<double(double, double)>& drift,
                           const HjbOptions& opt,
                           const std::function<double(double)>& terminal) {
  grid.validate();
  std::vector<double> w(grid.nx);
  for (int j = 0; j < grid.nx; ++j) w[j] = terminal ? terminal(grid.x(j)) : grid.x(j);
  double bmax = opt.radius;
  if (bmax <= 0.0) {
    // sample the drift on the grid at a few times
    for (int i = 0; i <= 16; ++i) {
      double t = grid.t0 + (grid.t1 - grid.t0) * i / 16.0;
      for (int j = 0; j < grid.nx; ++j) bmax = std::max(bmax, std::abs(drift(t, grid.x(j))));
    }
    bmax = 1.25 * bmax + 1e-9;
  }
  TimeHamiltonian th;
  th.H = [&drift](double t, double x, double p) { return drift(t, x) * p; };
  th.dp = [&drift](double t, double x, double) { return drift(t, x); };
  return solve_impl(grid, th, nullptr, std::move(w), bmax, opt.record_intervals);
}

std::function<double(double, double)> field_drift(const GridField& f,
                                                  const HamiltonianSpec& H) {
  const bool quad = H.is_quadratic();
  return [&f, &H, quad](double t, double x) {
    auto it = std::upper_bound(f.times.begin(), f.times.end(), t);
    std::size_t k = it == f.times.begin() ? 0 : (it - f.times.begin()) - 1;
    double p;
    if (k + 1 >= f.rows()) {
      p = f.du_at(f.rows() - 1, x);
    } else {
      double a = (t - f.times[k]) / (f.times[k + 1] - f.times[k]);
      p = (1 - a) * f.du_at(k, x) + a * f.du_at(k + 1, x);
    }
    return quad ? p : H.dpH(x, p);
  };
}

}  // namespace mflab
