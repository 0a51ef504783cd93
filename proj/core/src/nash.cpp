#include "mflab/nash.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "mflab/error.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

constexpr std::uint64_t kProbeTag = 0x50524F42ull;
constexpr std::uint64_t kChaosTag = 0x43484153ull;
constexpr std::uint64_t kEmpTag = 0x454D5052ull;

// value of a recorded field at (t, x), linear in both t and x
double field_value(const GridField& f, const std::vector<std::vector<double>>& rows, double t,
                   double x) {
  auto it = std::upper_bound(f.times.begin(), f.times.end(), t);
  std::size_t k = it == f.times.begin() ? 0 : (it - f.times.begin()) - 1;
  const auto& g = f.grid;
  auto at = [&](std::size_t r) {
    double s = std::clamp((x - g.x_min) / g.dx(), 0.0, g.nx - 1.0);
    int j = std::min(static_cast<int>(s), g.nx - 2);
    return rows[r][j] + (s - j) * (rows[r][j + 1] - rows[r][j]);
  };
  if (k + 1 >= f.rows()) return at(f.rows() - 1);
  double a = (t - f.times[k]) / (f.times[k + 1] - f.times[k]);
  return (1 - a) * at(k) + a * at(k + 1);
}

void throw_ansatz(const std::string& family, double residual, double tol) {
  std::ostringstream os;
  os << family << " oracle residual " << residual << " exceeds " << tol;
  throw Error("ansatz", os.str());
}

using Y = std::array<double, 5>;

// d/ds of (a, b, c, e, k) in s = T - t
Y lq_rhs(const Y& y, double n1) {
  const double a = y[0], b = y[1], c = y[2], e = y[3];
  const double al = 2 * a - b / n1;
  return Y{2 * a * a + b * b / n1,
           2 * a * b + al * b + 2 * b * c / n1 + b * b + 2 * e * b / n1,
           0.5 * b * b + 2 * al * c + 2 * b * c + 2 * e * b,
           2 * e * al,
           a + c / n1 + e};
}

// absolute Nash residual of player i given the time derivative vt; space
// derivatives by finite differences, exact for polynomial oracles
double fd_residual(const NashOracle& o, double t, double vt, std::vector<double> x, int i) {
  const double h = 0.05;
  double r = vt;
  const double v0 = o.value(t, x, i);
  for (int j = 0; j < o.N; ++j) {
    const double xj = x[j];
    x[j] = xj + h;
    const double vp = o.value(t, x, i);
    x[j] = xj - h;
    const double vm = o.value(t, x, i);
    x[j] = xj;
    const double d1 = (vp - vm) / (2 * h), d2 = (vp - 2 * v0 + vm) / (h * h);
    r += 0.5 * d2;
    r += j == i ? 0.5 * d1 * d1 : o.grad(t, x, j) * d1;
  }
  return std::abs(r);
}

// W1 between two equal-weight sorted samples of sizes n and m
double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double p = 0.0, s = 0.0;
  while (i < a.size() && j < b.size()) {
    const double pa = (i + 1) / na, pb = (j + 1) / nb;
    const double q = std::min(pa, pb);
    s += (q - p) * std::abs(a[i] - b[j]);
    p = q;
    if (pa <= q) ++i;
    if (pb <= q) ++j;
  }
  return s;
}

}  // namespace

NashOracle nash_separable(int N, std::function<double(double)> g, double c0,
                          const SpaceTimeGrid& grid, std::uint64_t seed, double tol) {
  if (N < 2) throw Error("config", "need at least two players");
  const auto H = HamiltonianSpec::quadratic();
  HjbOptions ho;
  ho.record_intervals = 200;
  auto u = std::make_shared<GridField>(solve_backward(grid, H, nullptr, g, ho));
  auto w = std::make_shared<GridField>(feynman_kac_mean(grid, field_drift(*u, H), ho));
  const double k = c0 / (N - 1);

  NashOracle o;
  o.family = "separable";
  o.N = N;
  o.T = grid.t1;
  o.tol = tol;
  o.value = [u, w, k](double t, const std::vector<double>& x, int i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (static_cast<int>(j) != i) s += field_value(*w, w->u, t, x[j]);
    return field_value(*u, u->u, t, x[i]) + k * s;
  };
  o.grad = [u](double t, const std::vector<double>& x, int i) {
    return field_value(*u, u->du, t, x[i]);
  };

  // residual on recorded rows, centred in time between rows r and r + 1
  Stream s(seed, {kProbeTag, 1});
  for (int probe = 0; probe < 64; ++probe) {
    const int r = static_cast<int>(s.uniform() * (u->rows() - 1));
    std::vector<double> x(N);
    for (auto& v : x) v = std::clamp(s.normal(), -3.0, 3.0);
    const double dt = u->times[r + 1] - u->times[r];
    auto rhs = [&](std::size_t row) {
      auto at = [&](const std::vector<std::vector<double>>& f, double y) {
        return field_value(*u, f, u->times[row], y);
      };
      double du0 = at(u->du, x[0]);
      double v = 0.5 * at(u->ddu, x[0]) + 0.5 * du0 * du0;
      for (int j = 1; j < N; ++j) {
        auto atw = [&](const std::vector<std::vector<double>>& f) {
          return field_value(*w, f, w->times[row], x[j]);
        };
        v += k * (0.5 * atw(w->ddu) + at(u->du, x[j]) * atw(w->du));
      }
      return v;
    };
    double dv = o.value(u->times[r + 1], x, 0) - o.value(u->times[r], x, 0);
    o.residual = std::max(o.residual, std::abs(dv / dt + 0.5 * (rhs(r) + rhs(r + 1))));
  }
  if (o.residual > tol) throw_ansatz(o.family, o.residual, tol);
  return o;
}

double LqCoefficients::at(const std::vector<double>& f, double s) const {
  const double h = t[1] - t[0];
  double q = std::clamp((s - t.front()) / h, 0.0, t.size() - 1.0);
  std::size_t k = std::min(static_cast<std::size_t>(q), t.size() - 2);
  double a = q - k;
  if (a < 1e-9) return f[k];
  if (a > 1 - 1e-9) return f[k + 1];
  return (1 - a) * f[k] + a * f[k + 1];
}

LqCoefficients lq_coefficients(int N, double T, int steps) {
  if (N < 2) throw Error("config", "need at least two players");
  const double n1 = N - 1;
  auto rhs = [n1](const Y& y) { return lq_rhs(y, n1); };
  LqCoefficients L;
  L.t.resize(steps + 1);
  for (auto* v : {&L.a, &L.b, &L.c, &L.e, &L.k}) v->resize(steps + 1);
  Y y{1.0, -2.0, 1.0, 0.0, 0.0};
  const double h = T / steps;
  auto store = [&](int idx) {
    L.a[idx] = y[0], L.b[idx] = y[1], L.c[idx] = y[2], L.e[idx] = y[3], L.k[idx] = y[4];
    L.t[idx] = T * idx / steps;
  };
  store(steps);
  for (int n = steps; n > 0; --n) {
    auto add = [](const Y& p, const Y& q, double s) {
      Y r;
      for (int m = 0; m < 5; ++m) r[m] = p[m] + s * q[m];
      return r;
    };
    Y k1 = rhs(y), k2 = rhs(add(y, k1, h / 2)), k3 = rhs(add(y, k2, h / 2)), k4 = rhs(add(y, k3, h));
    for (int m = 0; m < 5; ++m) y[m] += h / 6 * (k1[m] + 2 * k2[m] + 2 * k3[m] + k4[m]);
    for (double v : y)
      if (!std::isfinite(v)) throw Error("blowup", "lq coefficients diverged");
    store(n - 1);
  }
  return L;
}

NashOracle nash_lq(int N, double T, std::uint64_t seed, double tol) {
  auto L = std::make_shared<LqCoefficients>(lq_coefficients(N, T));
  const double n1 = N - 1;
  NashOracle o;
  o.family = "lq";
  o.N = N;
  o.T = T;
  o.tol = tol;
  auto others = [n1](const std::vector<double>& x, int i) {
    double m = 0.0, q = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (static_cast<int>(j) != i) m += x[j], q += x[j] * x[j];
    return std::pair{m / n1, q / n1};
  };
  o.value = [L, others](double t, const std::vector<double>& x, int i) {
    auto [m, q] = others(x, i);
    const double xi = x[i];
    return L->at(L->a, t) * xi * xi + L->at(L->b, t) * xi * m + L->at(L->c, t) * m * m +
           L->at(L->e, t) * q + L->at(L->k, t);
  };
  o.grad = [L, others](double t, const std::vector<double>& x, int i) {
    auto [m, q] = others(x, i);
    (void)q;
    return 2 * L->at(L->a, t) * x[i] + L->at(L->b, t) * m;
  };

  Stream s(seed, {kProbeTag, 2});
  const int nodes = static_cast<int>(L->t.size());
  for (int probe = 0; probe < 32; ++probe) {
    const int r = 1 + static_cast<int>(s.uniform() * (nodes - 2));
    std::vector<double> x(N);
    for (auto& v : x) v = s.normal();
    const int i = probe % N;
    // the coefficient ODE gives the time derivative at a node exactly
    const Y d = lq_rhs({L->a[r], L->b[r], L->c[r], L->e[r], L->k[r]}, n1);
    auto [m, q] = others(x, i);
    const double vt = -(d[0] * x[i] * x[i] + d[1] * x[i] * m + d[2] * m * m + d[3] * q + d[4]);
    o.residual = std::max(o.residual, fd_residual(o, L->t[r], vt, x, i));
  }
  if (o.residual > tol) throw_ansatz(o.family, o.residual, tol);
  return o;
}

double TwoPlayerGrid::value(double x1, double x2) const {
  auto idx = [&](double x) {
    double s = std::clamp((x + L) / dx, 0.0, n - 1.0);
    int j = std::min(static_cast<int>(s), n - 2);
    return std::pair{j, s - j};
  };
  auto [i, a] = idx(x1);
  auto [j, b] = idx(x2);
  auto V = [&](int p, int q) { return v[static_cast<std::size_t>(p) * n + q]; };
  return (1 - a) * ((1 - b) * V(i, j) + b * V(i, j + 1)) + a * ((1 - b) * V(i + 1, j) + b * V(i + 1, j + 1));
}

TwoPlayerGrid two_player_grid(double T, double L, double dx) {
  TwoPlayerGrid G;
  G.L = L;
  G.n = static_cast<int>(std::lround(2 * L / dx)) + 1;
  G.dx = dx = 2 * L / (G.n - 1);
  const int n = G.n;
  auto id = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<double> v(cells), d1(cells);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x1 = -L + i * dx, x2 = -L + j * dx;
      v[id(i, j)] = (x1 - x2) * (x1 - x2);
    }

  // d1 = d_{x1} v^1; player two's drift at (x1, x2) is d1 at (x2, x1).
  // Local Lax-Friedrichs viscosity keeps the scheme monotone where the
  // drift is large; near the diagonal it is the physical 1/2.
  auto grad = [&](const std::vector<double>& u) {
    double gmax = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int ip = std::min(i + 1, n - 1), im = std::max(i - 1, 0);
        d1[id(i, j)] = (u[id(ip, j)] - u[id(im, j)]) / ((ip - im) * dx);
        gmax = std::max(gmax, std::abs(d1[id(i, j)]));
      }
    return gmax;
  };
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    grad(u);
    for (int i = 1; i < n - 1; ++i)
      for (int j = 1; j < n - 1; ++j) {
        const double p1 = d1[id(i, j)];
        const double p2 = (u[id(i, j + 1)] - u[id(i, j - 1)]) / (2 * dx);
        const double b2 = d1[id(j, i)];
        const double D1 = std::max(0.5, 0.5 * std::abs(p1) * dx);
        const double D2 = std::max(0.5, 0.5 * std::abs(b2) * dx);
        const double l1 = (u[id(i + 1, j)] - 2 * u[id(i, j)] + u[id(i - 1, j)]) / (dx * dx);
        const double l2 = (u[id(i, j + 1)] - 2 * u[id(i, j)] + u[id(i, j - 1)]) / (dx * dx);
        out[id(i, j)] = D1 * l1 + D2 * l2 + 0.5 * p1 * p1 + b2 * p2;
      }
  };
  auto fill_boundary = [&](std::vector<double>& u) {
    for (int k = 1; k < n - 1; ++k) {
      u[id(0, k)] = 2 * u[id(1, k)] - u[id(2, k)];
      u[id(n - 1, k)] = 2 * u[id(n - 2, k)] - u[id(n - 3, k)];
    }
    for (int i = 0; i < n; ++i) {
      u[id(i, 0)] = 2 * u[id(i, 1)] - u[id(i, 2)];
      u[id(i, n - 1)] = 2 * u[id(i, n - 2)] - u[id(i, n - 3)];
    }
  };

  // SSP-RK3 in backward time
  std::vector<double> k(cells), v1(cells), v2(cells);
  double t = T;
  while (t > 1e-14) {
    const double gmax = grad(v);
    const double D = std::max(0.5, 0.5 * gmax * dx);
    const double dt = std::min(0.8 * dx * dx / (4 * D), t);
    rhs(v, k);
    for (std::size_t c = 0; c < cells; ++c) v1[c] = v[c] + dt * k[c];
    fill_boundary(v1);
    rhs(v1, k);
    for (std::size_t c = 0; c < cells; ++c) v2[c] = 0.75 * v[c] + 0.25 * (v1[c] + dt * k[c]);
    fill_boundary(v2);
    rhs(v2, k);
    for (std::size_t c = 0; c < cells; ++c) v[c] = v[c] / 3 + 2.0 / 3 * (v2[c] + dt * k[c]);
    fill_boundary(v);
    for (double x : v)
      if (!std::isfinite(x)) throw Error("blowup", "two-player grid solve diverged");
    t -= dt;
  }
  G.v = std::move(v);
  return G;
}

void fit_loglog(RateFit& f) {
  const std::size_t n = f.N.size();
  if (n != f.stat.size()) throw Error("config", "rate fit columns differ in length");
  for (std::size_t k = 0; k < n; ++k)
    if (!(f.N[k] > 0.0) || !(f.stat[k] > 0.0)) throw Error("log-domain", "rate fit needs positive values");
  if (n < 4) {
    f.slope = f.intercept = f.r2 = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) mx += std::log(f.N[k]), my += std::log(f.stat[k]);
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double dx = std::log(f.N[k]) - mx, dy = std::log(f.stat[k]) - my;
    sxx += dx * dx, sxy += dx * dy, syy += dy * dy;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
}

RateFit empirical_rate_experiment(const DistributionSpec& spec, const std::vector<int>& Ns,
                                  int trials, std::uint64_t seed) {
  if (trials < 2) throw Error("config", "need at least two trials");
  // quantile proxy of the law, 2^20 atoms
  const std::size_t M = std::size_t(1) << 20;
  const auto ref = quantize(spec, M).positions();
  RateFit f;
  bool positive = true;
  for (int N : Ns) {
    if (N < 1) throw Error("config", "N must be positive");
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < trials; ++k) {
      auto mu = sample(spec, N, derive_key(seed, {kEmpTag, std::uint64_t(N), std::uint64_t(k)}));
      auto x = mu.positions();
      std::sort(x.begin(), x.end());
      const double w = w1_sorted(x, ref);
      s += w * w;
      s2 += w * w * w * w;
    }
    const double m = s / trials;
    f.N.push_back(N);
    f.stat.push_back(m);
    f.std_error.push_back(std::sqrt(std::max(0.0, s2 / trials - m * m) / (trials - 1)));
    positive = positive && m > 0.0;
  }
  if (positive) {
    fit_loglog(f);
  } else {
    f.slope = f.intercept = f.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

RateFit nash_convergence_experiment(const NashRateOptions& opt, std::uint64_t seed) {
  MfgProblem p;
  p.T = opt.T;
  p.particles.particles = opt.particles;
  if (opt.family == "lq") {
    p.coupling = CouplingSpec::quadratic();
  } else if (opt.family == "separable") {
    auto g = opt.g;
    auto dg = [g](double x) { return (g(x + 1e-5) - g(x - 1e-5)) / 2e-5; };
    p.coupling = CouplingSpec::mean_linear(g, dg, opt.c0);
  } else {
    throw Error("config", "unknown nash family " + opt.family);
  }
  ValueFunction V(p, 1, seed);
  SpaceTimeGrid grid = p.grid;
  grid.t1 = opt.T;

  RateFit f;
  for (int N : opt.Ns) {
    NashOracle o = opt.family == "lq" ? nash_lq(N, opt.T, seed)
                                      : nash_separable(N, opt.g, opt.c0, grid, seed);
    if (o.residual > 10 * o.tol) throw Error("ansatz", "uncertified oracle");
    double worst = 0.0, s = 0.0, s2 = 0.0;
    for (int k = 0; k < opt.probes; ++k) {
      Stream st(seed, {kProbeTag, std::uint64_t(N), std::uint64_t(k)});
      std::vector<double> x(N);
      for (auto& v : x) v = opt.scale * st.normal();
      std::vector<double> rest(x.begin() + 1, x.end());
      auto m = EmpiricalMeasure::uniform(rest);
      double norm = 0.0;
      for (double v : x) norm += v * v;
      norm = 1.0 + std::abs(x[0]) + std::sqrt(norm / N);
      const double gap = std::abs(o.value(0.0, x, 0) - V.value(0.0, x[0], m)) / norm;
      worst = std::max(worst, gap);
      s += gap, s2 += gap * gap;
    }
    const double mean = s / opt.probes;
    f.N.push_back(N);
    f.stat.push_back(worst);
    f.std_error.push_back(opt.probes > 1 ? std::sqrt(std::max(0.0, s2 / opt.probes - mean * mean) / (opt.probes - 1)) : 0.0);
  }
  bool positive = std::all_of(f.stat.begin(), f.stat.end(), [](double v) { return v > 0.0; });
  if (positive) {
    fit_loglog(f);
  } else {
    f.slope = f.intercept = f.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

ParticleSystem simulate_players(const NashOracle& oracle, const GridField& limit_field,
                                const std::vector<double>& x0, double dt,
                                std::uint64_t seed, std::uint64_t trial) {
  const int N = oracle.N;
  if (static_cast<int>(x0.size()) != N) throw Error("config", "initial positions must match N");
  const int steps = std::max(1, static_cast<int>(std::llround(oracle.T / dt)));
  const double h = oracle.T / steps, sq = std::sqrt(h);
  const auto H = HamiltonianSpec::quadratic();
  auto limit = field_drift(limit_field, H);
  std::vector<Stream> streams;
  for (int i = 0; i < N; ++i) streams.emplace_back(seed, std::initializer_list<std::uint64_t>{kChaosTag, trial, std::uint64_t(i)});

  ParticleSystem ps;
  ps.N = N;
  ps.paths.push_back(x0);
  ps.limit_paths.push_back(x0);
  ps.times.push_back(0.0);
  std::vector<double> x = x0, y = x0, b(N);
  for (int n = 0; n < steps; ++n) {
    const double t = n * h;
    for (int i = 0; i < N; ++i) b[i] = oracle.grad(t, x, i);
    for (int i = 0; i < N; ++i) {
      const double z = normal_pair(streams[i].block(n))[0];
      const double by = limit(t, y[i]);
      x[i] += b[i] * h + sq * z;
      y[i] += by * h + sq * z;
    }
    ps.paths.push_back(x);
    ps.limit_paths.push_back(y);
    ps.times.push_back((n + 1) * h);
  }
  return ps;
}

ChaosReport chaos_experiment(const ChaosOptions& opt, std::uint64_t seed) {
  if (opt.family != "lq" && opt.family != "separable")
    throw Error("config", "unknown chaos family " + opt.family);
  MfgProblem prob;
  prob.T = opt.T;
  prob.particles.particles = opt.particles;
  prob.particles.dt = opt.dt;
  prob.coupling = opt.family == "lq"
                      ? CouplingSpec::quadratic()
                      : CouplingSpec::mean_linear([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0);
  auto rho0 = quantize(opt.xi, opt.particles);
  auto sol = picard_local(prob, rho0, 0.0, opt.T, seed);
  SpaceTimeGrid grid = prob.grid;
  grid.t1 = opt.T;

  ChaosReport rep;
  const double p = opt.p;
  for (int N : opt.Ns) {
    NashOracle o = opt.family == "lq" ? nash_lq(N, opt.T, seed)
                                      : nash_separable(N, [](double) { return 0.0; }, 1.0, grid, seed);
    const int trials = std::max(2, opt.players_per_point / N);
    std::vector<double> per_trial(trials);
    std::vector<std::vector<double>> wp;  // [trial][step]
    for (int k = 0; k < trials; ++k) {
      std::vector<double> x0(N);
      for (int i = 0; i < N; ++i) {
        Stream s(seed, {kChaosTag ^ 0xFFu, std::uint64_t(k), std::uint64_t(i)});
        double u = s.uniform(), v = s.uniform();
        x0[i] = opt.xi.draw(u, v);
      }
      auto ps = simulate_players(o, sol.field, x0, opt.dt, seed, k);
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        double m = 0.0;
        for (std::size_t n = 0; n < ps.times.size(); ++n)
          m = std::max(m, std::abs(ps.paths[n][i] - ps.limit_paths[n][i]));
        acc += std::pow(m, p);
      }
      per_trial[k] = acc / N;
      std::vector<double> row;
      for (std::size_t n = 0; n < ps.times.size(); ++n) {
        auto r = sol.flow.measures[sol.field.row_of(ps.times[n])];
        row.push_back(std::pow(w1_distance(EmpiricalMeasure::uniform(ps.paths[n]), r), p));
      }
      wp.push_back(std::move(row));
    }
    double s = 0.0, s2 = 0.0;
    for (double v : per_trial) s += v, s2 += v * v;
    const double m = s / trials;
    const double se_m = std::sqrt(std::max(0.0, s2 / trials - m * m) / (trials - 1));
    const double stat = std::pow(m, 1.0 / p);
    rep.path.N.push_back(N);
    rep.path.stat.push_back(stat);
    rep.path.std_error.push_back(m > 0 ? stat * se_m / (p * m) : 0.0);

    double best = 0.0, best_se = 0.0;
    for (std::size_t n = 0; n < wp.front().size(); ++n) {
      double a = 0.0, a2 = 0.0;
      for (int k = 0; k < trials; ++k) a += wp[k][n], a2 += wp[k][n] * wp[k][n];
      const double mm = a / trials;
      const double st = std::pow(mm, 1.0 / p);
      if (n == 0) rep.flow_t0.push_back(st);
      if (st > best) {
        best = st;
        const double se = std::sqrt(std::max(0.0, a2 / trials - mm * mm) / (trials - 1));
        best_se = mm > 0 ? st * se / (p * mm) : 0.0;
      }
    }
    rep.flow.N.push_back(N);
    rep.flow.stat.push_back(best);
    rep.flow.std_error.push_back(best_se);
  }
  for (RateFit* f : {&rep.path, &rep.flow}) {
    if (std::all_of(f->stat.begin(), f->stat.end(), [](double v) { return v > 0.0; })) {
      fit_loglog(*f);
    } else {
      f->slope = f->intercept = f->r2 = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rep;
}

}  // namespace mflab
