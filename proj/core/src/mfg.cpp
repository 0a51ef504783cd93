#include "mflab/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mflab/error.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

constexpr std::uint64_t kNoiseTag = 0x464C4F57ull;  // "FLOW"
constexpr double kTimeEps = 1e-12;

long long time_key(double t) { return std::llround(t * 1e9); }

int particle_steps(double span, double dt) {
  return std::max(1, static_cast<int>(std::llround(span / dt)));
}

// exact on grid nodes, linear between them
std::function<double(double)> grid_function(const SpaceTimeGrid& g, std::vector<double> v) {
  return [g, v = std::move(v)](double x) {
    double s = (x - g.x_min) / g.dx();
    long j = std::lround(s);
    if (j >= 0 && j < g.nx && std::abs(s - j) < 1e-9) return v[j];
    if (s <= 0) return v.front();
    if (s >= g.nx - 1) return v.back();
    long i = static_cast<long>(s);
    double f = s - i;
    return v[i] + f * (v[i + 1] - v[i]);
  };
}

std::vector<double> zero_row(const SpaceTimeGrid& g) { return std::vector<double>(g.nx, 0.0); }

GridField zero_field(const SpaceTimeGrid& g, int steps) {
  GridField f;
  f.grid = g;
  f.steps = steps;
  for (int r = 0; r <= steps; ++r) {
    f.times.push_back(g.t0 + (g.t1 - g.t0) * r / steps);
    f.u.push_back(zero_row(g));
    f.du.push_back(zero_row(g));
    f.ddu.push_back(zero_row(g));
  }
  f.times.back() = g.t1;
  return f;
}

double flow_gap(const MeasureFlow& a, const MeasureFlow& b, int rows) {
  const std::size_t n = a.measures.size();
  const std::size_t stride = std::max<std::size_t>(1, n / std::max(rows, 1));
  double g = 0.0;
  for (std::size_t r = 0; r < n; r += stride)
    g = std::max(g, w1_distance(a.measures[r], b.measures[r]));
  return std::max(g, w1_distance(a.measures.back(), b.measures.back()));
}

std::string history(const std::vector<double>& gaps) {
  std::ostringstream os;
  os << "gaps [";
  for (std::size_t k = 0; k < gaps.size(); ++k) os << (k ? ", " : "") << gaps[k];
  os << "]";
  return os.str();
}

}  // namespace

void MfgProblem::validate() const {
  if (beta != 0.0) throw Error("config", "common noise (beta != 0) is not supported");
  if (!(T > 0.0)) throw Error("config", "horizon T must be positive");
  if (particles.particles < 2) throw Error("config", "need at least 2 particles");
  if (!(particles.dt > 0.0)) throw Error("config", "particle dt must be positive");
  if (picard.max_iter < 1) throw Error("config", "picard.max_iter must be >= 1");
  if (!(picard.tol > 0.0)) throw Error("config", "picard.tol must be positive");
  if (!H.H || !H.dpH) throw Error("config", "hamiltonian is incomplete");
  if (!coupling.G) throw Error("config", "coupling has no terminal G");
  SpaceTimeGrid g = grid;
  g.t0 = 0.0;
  g.t1 = T;
  g.validate();
}

EmpiricalMeasure allocate_particles(const EmpiricalMeasure& mu, int P) {
  if (mu.empty()) throw Error("empty", "cannot allocate particles from an empty measure");
  if (mu.dim() != 1) throw Error("dim", "particle solver is one-dimensional");
  if (static_cast<int>(mu.size()) == P) return mu;
  auto s = mu.sorted();
  const std::size_t m = s.size();
  if (m < static_cast<std::size_t>(P)) {
    // copies per atom by largest remainder, at least one each; the copies
    // share the atom's mass so the law is reproduced exactly
    const double spare = P - static_cast<double>(m);
    std::vector<int> count(m);
    std::vector<std::pair<double, std::size_t>> rem(m);
    int used = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double q = spare * s.w(i);
      count[i] = 1 + static_cast<int>(std::floor(q));
      rem[i] = {q - std::floor(q), i};
      used += count[i];
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; used < P; ++k, ++used) ++count[rem[k % m].second];
    std::vector<double> x, w;
    x.reserve(P);
    w.reserve(P);
    for (std::size_t i = 0; i < m; ++i)
      for (int c = 0; c < count[i]; ++c) {
        x.push_back(s.x(i));
        w.push_back(s.w(i) / count[i]);
      }
    return EmpiricalMeasure(std::move(x), std::move(w));
  }
  // more atoms than particles: equal-weight quantiles
  std::vector<double> x(P);
  double cum = s.w(0);
  std::size_t k = 0;
  for (int i = 0; i < P; ++i) {
    const double p = (i + 0.5) / P;
    while (cum < p && k + 1 < m) cum += s.w(++k);
    x[i] = s.x(k);
  }
  return EmpiricalMeasure::uniform(std::move(x));
}

MeasureFlow forward_flow(const EmpiricalMeasure& initial, const GridField& field,
                         const HamiltonianSpec& H, std::uint64_t seed,
                         const ParticleOptions& opt) {
  if (field.rows() < 2) throw Error("config", "drift field needs at least two rows");
  if (initial.dim() != 1) throw Error("dim", "particle solver is one-dimensional");
  const auto& g = field.grid;
  const double width = g.x_max - g.x_min;
  const double lo = g.x_min - 0.1 * width, hi = g.x_max + 0.1 * width;
  const std::size_t P = initial.size();
  const bool quad = H.is_quadratic();

  std::vector<Stream> pairs;
  pairs.reserve((P + 1) / 2);
  for (std::size_t k = 0; k < (P + 1) / 2; ++k) pairs.emplace_back(seed, std::initializer_list<std::uint64_t>{kNoiseTag, k});

  MeasureFlow flow;
  flow.times = field.times;
  flow.measures.reserve(field.rows());
  flow.measures.push_back(initial);
  std::vector<double> x = initial.positions();
  std::vector<double> z(P);
  for (std::size_t n = 0; n + 1 < field.rows(); ++n) {
    const double t = field.times[n], dt = field.times[n + 1] - t;
    const double sq = std::sqrt(dt);
    const auto ctr = static_cast<std::uint64_t>(time_key(t));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto nz = normal_pair(pairs[k].block(ctr));
      z[2 * k] = nz[0];
      if (2 * k + 1 < P) z[2 * k + 1] = opt.antithetic ? -nz[0] : nz[1];
    }
    for (std::size_t i = 0; i < P; ++i) {
      const double p = field.du_at(n, x[i]);
      x[i] += (quad ? p : H.dpH(x[i], p)) * dt + sq * z[i];
      if (!(x[i] > lo && x[i] < hi)) {
        std::ostringstream os;
        os << "particle " << i << " reached " << x[i] << " at t = " << field.times[n + 1]
           << ", outside [" << lo << ", " << hi << "]";
        throw Error("domain", os.str());
      }
    }
    flow.measures.emplace_back(x, initial.weights());
  }
  return flow;
}

LocalSolution picard_local(const MfgProblem& problem, const EmpiricalMeasure& rho0,
                           double t0, double t1, std::uint64_t seed,
                           const TerminalProvider& terminal) {
  problem.validate();
  if (!(t1 > t0)) throw Error("config", "picard_local needs t0 < t1");
  const auto& opt = problem.picard;
  SpaceTimeGrid grid = problem.grid;
  grid.t0 = t0;
  grid.t1 = t1;
  grid.nt = 0;
  const int steps = particle_steps(t1 - t0, problem.particles.dt);
  HjbOptions hopt = problem.hjb;
  hopt.record_intervals = steps;

  auto rho = allocate_particles(rho0, problem.particles.particles);
  const auto& cp = problem.coupling;
  TerminalProvider term = terminal;
  if (!term) {
    term = [&cp, &grid](const EmpiricalMeasure& m) {
      std::vector<double> v(grid.nx);
      for (int j = 0; j < grid.nx; ++j) v[j] = cp.G(grid.x(j), m);
      return v;
    };
  }
  const bool has_source = cp.kind == CouplingSpec::Kind::Custom && cp.F;

  LocalSolution out;
  out.report.horizon_used = t1 - t0;
  out.flow = forward_flow(rho, zero_field(grid, steps), problem.H, seed, problem.particles);
  int rising = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<std::vector<double>> src;
    std::function<double(double, double)> F;
    if (has_source) {
      src.resize(out.flow.measures.size());
      for (std::size_t r = 0; r < src.size(); ++r) {
        src[r].resize(grid.nx);
        for (int j = 0; j < grid.nx; ++j) src[r][j] = cp.F(grid.x(j), out.flow.measures[r]);
      }
      const double h = (t1 - t0) / steps;
      F = [&src, &grid, t0, h](double t, double x) {
        auto r = static_cast<std::size_t>(std::clamp<long>(std::lround((t - t0) / h), 0,
                                                           static_cast<long>(src.size()) - 1));
        double s = std::clamp((x - grid.x_min) / grid.dx(), 0.0, grid.nx - 1.0);
        int j = std::min(static_cast<int>(s), grid.nx - 2);
        return src[r][j] + (s - j) * (src[r][j + 1] - src[r][j]);
      };
    }
    out.field = solve_backward(grid, problem.H, F, grid_function(grid, term(out.flow.back())), hopt);
    MeasureFlow next = forward_flow(rho, out.field, problem.H, seed, problem.particles);
    if (opt.relax) {
      for (std::size_t r = 1; r < next.measures.size(); ++r) {
        auto x = next.measures[r].positions();
        const auto& y = out.flow.measures[r].positions();
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = opt.relax_weight * x[i] + (1.0 - opt.relax_weight) * y[i];
        next.measures[r] = EmpiricalMeasure(std::move(x), next.measures[r].weights());
      }
    }
    const double gap = flow_gap(out.flow, next, opt.gap_rows);
    out.report.flow_gap.push_back(gap);
    out.report.iterations = it;
    out.flow = std::move(next);
    if (!std::isfinite(gap)) throw Error("no-contraction", "non-finite flow gap; " + history(out.report.flow_gap));
    if (gap <= opt.tol) {
      out.report.converged = true;
      return out;
    }
    const auto& gh = out.report.flow_gap;
    rising = gh.size() > 1 && gap > gh[gh.size() - 2] ? rising + 1 : 0;
    if (rising >= 3) break;
  }
  std::ostringstream os;
  os << "on [" << t0 << ", " << t1 << "] after " << out.report.iterations << " iterations; "
     << history(out.report.flow_gap);
  throw Error("no-contraction", os.str());
}

std::uint64_t measure_fingerprint(const EmpiricalMeasure& mu) {
  auto s = mu.sorted();
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    mix(std::llround(s.x(i) * 1e9));
    mix(std::llround(s.w(i) * 1e15));
  }
  return h;
}

ValueFunction::ValueFunction(MfgProblem problem, int partitions, std::uint64_t seed)
    : problem_(std::move(problem)), seed_(seed) {
  problem_.validate();
  if (partitions < 1) throw Error("config", "partition count must be >= 1");
  for (int k = 0; k <= partitions; ++k) partition_.push_back(problem_.T * k / partitions);
  partition_.back() = problem_.T;
}

std::size_t ValueFunction::memo_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

std::vector<LocalSolveReport> ValueFunction::reports() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reports_;
}

namespace {

double next_point(const std::vector<double>& part, double t) {
  for (double p : part)
    if (p > t + kTimeEps) return p;
  return part.back();
}

}  // namespace

TerminalProvider ValueFunction::terminal_at(double t1, int) const {
  if (t1 >= problem_.T - kTimeEps) return {};
  return [this, t1](const EmpiricalMeasure& rho) { return start_row(t1, rho).u; };
}

LocalSolution ValueFunction::solve_interval(double t0, double t1, const EmpiricalMeasure& particles,
                                            int depth) const {
  return solve_interval_with(t0, t1, particles, terminal_at(t1, depth), depth);
}

LocalSolution ValueFunction::solve_interval_with(double t0, double t1,
                                                 const EmpiricalMeasure& particles,
                                                 const TerminalProvider& terminal,
                                                 int depth) const {
  try {
    auto sol = picard_local(problem_, particles, t0, t1, seed_, terminal);
    std::lock_guard<std::mutex> lock(mu_);
    reports_.push_back(sol.report);
    return sol;
  } catch (const Error& e) {
    if (e.code() != "no-contraction" || depth >= problem_.picard.max_halvings) throw;
  }
  // halve: V(mid, ., .) from [mid, t1] becomes the terminal of [t0, mid]
  const double mid = 0.5 * (t0 + t1);
  TerminalProvider inner = [this, mid, t1, terminal, depth](const EmpiricalMeasure& rho) {
    return solve_interval_with(mid, t1, rho, terminal, depth + 1).field.u.front();
  };
  return solve_interval_with(t0, mid, particles, inner, depth + 1);
}

ValueFunction::Row ValueFunction::start_row(double t, const EmpiricalMeasure& particles) const {
  const double t1 = next_point(partition_, t);
  const auto key = std::make_tuple(time_key(t), time_key(t1), measure_fingerprint(particles));
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  LocalSolution sol;
  try {
    sol = solve_interval(t, t1, particles, 0);
  } catch (const Error& e) {
    std::ostringstream os;
    os << "interval [" << t << ", " << t1 << "]: " << e.what();
    throw Error(e.code(), os.str());
  }
  Row row{std::move(sol.field.u.front()), std::move(sol.field.du.front())};
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.emplace(key, std::move(row)).first->second;
}

std::vector<double> ValueFunction::value_row(double t, const EmpiricalMeasure& mu) const {
  const auto& g = problem_.grid;
  if (t >= problem_.T - kTimeEps) {
    std::vector<double> v(g.nx);
    for (int j = 0; j < g.nx; ++j) v[j] = problem_.coupling.G(g.x(j), mu);
    return v;
  }
  return start_row(t, allocate_particles(mu, problem_.particles.particles)).u;
}

std::vector<double> ValueFunction::grad_row(double t, const EmpiricalMeasure& mu) const {
  const auto& g = problem_.grid;
  if (t >= problem_.T - kTimeEps) {
    if (!problem_.coupling.dxG) throw Error("family", "coupling has no x-derivative of G");
    std::vector<double> v(g.nx);
    for (int j = 0; j < g.nx; ++j) v[j] = problem_.coupling.dxG(g.x(j), mu);
    return v;
  }
  return start_row(t, allocate_particles(mu, problem_.particles.particles)).du;
}

double ValueFunction::value(double t, double x, const EmpiricalMeasure& mu) const {
  if (t >= problem_.T - kTimeEps) return problem_.coupling.G(x, mu);
  return grid_function(problem_.grid, value_row(t, mu))(x);
}

double ValueFunction::grad_x(double t, double x, const EmpiricalMeasure& mu) const {
  if (t >= problem_.T - kTimeEps && problem_.coupling.dxG) return problem_.coupling.dxG(x, mu);
  return grid_function(problem_.grid, grad_row(t, mu))(x);
}

LocalSolution ValueFunction::solve_from(double t, const EmpiricalMeasure& mu) const {
  if (t >= problem_.T - kTimeEps) throw Error("config", "no interval starts at the horizon");
  const double t1 = next_point(partition_, t);
  return solve_interval(t, t1, allocate_particles(mu, problem_.particles.particles), 0);
}

double monotonicity_pairing(const std::function<double(double, const EmpiricalMeasure&)>& Phi,
                            const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i)
    s += mu1.w(i) * (Phi(mu1.x(i), mu1) - Phi(mu1.x(i), mu2));
  for (std::size_t i = 0; i < mu2.size(); ++i)
    s -= mu2.w(i) * (Phi(mu2.x(i), mu1) - Phi(mu2.x(i), mu2));
  return s;
}

double value_pairing(const ValueFunction& V, double t, const EmpiricalMeasure& mu1,
                     const EmpiricalMeasure& mu2) {
  const auto& g = V.problem().grid;
  auto v1 = grid_function(g, V.value_row(t, mu1));
  auto v2 = grid_function(g, V.value_row(t, mu2));
  return monotonicity_pairing(
      [&](double x, const EmpiricalMeasure& m) { return &m == &mu1 ? v1(x) : v2(x); }, mu1, mu2);
}

RegularityReport regularity_probes(const ValueFunction& V, std::uint64_t seed,
                                   RegularityOptions opt) {
  const auto& P = V.problem();
  if (opt.xs.empty())
    for (int k = 0; k < 16; ++k) opt.xs.push_back(-2.0 + 4.0 * k / 15.0);
  if (opt.pairs.empty()) {
    for (std::uint64_t k = 0; k < 8; ++k) {
      Stream s(seed, {0x52454755ull, k});
      std::vector<double> a(8), b(8);
      const double shift = 0.5 * s.normal();
      for (auto& v : a) v = 0.5 * s.normal();
      for (auto& v : b) v = 0.5 * s.normal() + shift;
      opt.pairs.emplace_back(EmpiricalMeasure::uniform(a), EmpiricalMeasure::uniform(b));
    }
  }
  if (opt.ts.empty())
    for (int k = 0; k < 4; ++k) opt.ts.push_back(P.T * k / 4.0);
  if (!opt.perturbation) opt.perturbation = [](double x) { return std::sin(x); };

  RegularityReport rep;
  const auto& g = P.grid;
  // rows[t][pair][side]
  std::vector<std::vector<std::array<std::function<double(double)>, 2>>> rows(opt.ts.size());
  for (std::size_t i = 0; i < opt.ts.size(); ++i)
    for (auto& pr : opt.pairs)
      rows[i].push_back({grid_function(g, V.value_row(opt.ts[i], pr.first)),
                         grid_function(g, V.value_row(opt.ts[i], pr.second))});

  for (std::size_t i = 0; i < opt.ts.size(); ++i)
    for (std::size_t k = 0; k < opt.pairs.size(); ++k) {
      const double w = w1_distance(opt.pairs[k].first, opt.pairs[k].second);
      for (std::size_t q = 0; q < opt.xs.size(); ++q) {
        const double x = opt.xs[q];
        for (int s = 0; s < 2; ++s)
          if (q + 1 < opt.xs.size())
            rep.lip_x = std::max(rep.lip_x, std::abs(rows[i][k][s](opt.xs[q + 1]) - rows[i][k][s](x)) /
                                                (opt.xs[q + 1] - x));
        if (w > 1e-12)
          rep.lip_mu = std::max(rep.lip_mu, std::abs(rows[i][k][0](x) - rows[i][k][1](x)) / w);
        for (std::size_t j = i + 1; j < opt.ts.size(); ++j)
          for (int s = 0; s < 2; ++s)
            rep.holder_t = std::max(rep.holder_t, std::abs(rows[j][k][s](x) - rows[i][k][s](x)) /
                                                      std::sqrt(opt.ts[j] - opt.ts[i]));
      }
    }

  // data stability: G -> G + eps * perturbation, at t = ts[0] on the first measure
  const auto& mu = opt.pairs.front().first;
  const double t = opt.ts.front();
  auto base = V.value_row(t, mu);
  for (double eps : opt.eps) {
    MfgProblem q = P;
    auto G = P.coupling.G, dxG = P.coupling.dxG;
    auto d = opt.perturbation;
    q.coupling.G = [G, d, eps](double x, const EmpiricalMeasure& m) { return G(x, m) + eps * d(x); };
    q.coupling.kind = CouplingSpec::Kind::Custom;
    q.coupling.F = nullptr;
    if (P.coupling.F && P.coupling.kind == CouplingSpec::Kind::Custom) q.coupling.F = P.coupling.F;
    ValueFunction Ve(q, static_cast<int>(V.partition().size()) - 1, V.seed());
    auto row = Ve.value_row(t, mu);
    double m = 0.0;
    for (double x : opt.xs)
      m = std::max(m, std::abs(grid_function(g, row)(x) - grid_function(g, base)(x)));
    rep.eps.push_back(eps);
    rep.sup_dv.push_back(m);
  }
  if (!rep.eps.empty()) {
    auto top = std::max_element(rep.eps.begin(), rep.eps.end()) - rep.eps.begin();
    const double e = rep.eps[top];
    rep.envelope_C = rep.sup_dv[top] / (std::pow(e, 0.25) + e);
    rep.under_envelope = true;
    for (std::size_t k = 0; k < rep.eps.size(); ++k)
      if (rep.sup_dv[k] > rep.envelope_C * (std::pow(rep.eps[k], 0.25) + rep.eps[k]) * (1 + 1e-9))
        rep.under_envelope = false;
    // log-log OLS over the positive points
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < rep.eps.size(); ++k)
      if (rep.sup_dv[k] > 0) {
        double lx = std::log(rep.eps[k]), ly = std::log(rep.sup_dv[k]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
        ++n;
      }
    if (n >= 2) rep.stability_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

MfgProblem mollify_problem(const MfgProblem& p, const MollifierParams& mp) {
  mp.validate();
  const auto kern = DiscreteKernel::shifted_bump(0.0, 20);
  double m2 = 0.0;
  for (std::size_t q = 0; q < kern.nodes.size(); ++q) m2 += kern.weights[q] * kern.nodes[q] * kern.nodes[q];
  const double n = mp.n;

  MfgProblem out = p;
  if (p.H.is_quadratic()) {
    // int (z - y/n)^2 / 2 zeta(y) dy with a centred kernel
    out.H = HamiltonianSpec::quadratic(p.H.constant + m2 / (2 * n * n));
  } else {
    auto H = p.H;
    auto conv = [kern, n](std::function<double(double, double)> f) -> std::function<double(double, double)> {
      if (!f) return nullptr;
      return [f, kern, n](double x, double z) {
        double s = 0.0;
        for (std::size_t q = 0; q < kern.nodes.size(); ++q) s += kern.weights[q] * f(x, z - kern.nodes[q] / n);
        return s;
      };
    };
    out.H.name = H.name + "-mollified";
    out.H.H = conv(H.H);
    out.H.dpH = conv(H.dpH);
    out.H.dxH = conv(H.dxH);
    out.H.dppH = conv(H.dppH);
  }

  const auto& c = p.coupling;
  using Kind = CouplingSpec::Kind;
  if (c.kind == Kind::Zero) return out;
  if (c.kind == Kind::MeanLinear) {
    auto g = c.g, dg = c.dg;
    const double k = c.c;
    auto mean_n = [mp](const EmpiricalMeasure& m) {
      return mollify(ScalarMeasureFunctional::linear([](double x) { return x; }), m, mp);
    };
    auto gx = [g, kern, n](double x) {
      double s = 0.0;
      for (std::size_t q = 0; q < kern.nodes.size(); ++q) s += kern.weights[q] * g(x - kern.nodes[q] / n);
      return s;
    };
    auto dgx = [dg, kern, n](double x) {
      double s = 0.0;
      for (std::size_t q = 0; q < kern.nodes.size(); ++q) s += kern.weights[q] * dg(x - kern.nodes[q] / n);
      return s;
    };
    out.coupling = CouplingSpec::mean_linear(gx, dgx, k);
    out.coupling.G = [gx, k, mean_n](double x, const EmpiricalMeasure& m) { return gx(x) + k * mean_n(m); };
    return out;
  }
  if (c.x_free_terminal && (!c.F || c.kind != Kind::Custom)) {
    auto G = c.G;
    ScalarMeasureFunctional U;
    U.eval = [G](const EmpiricalMeasure& m) { return G(0.0, m); };
    out.coupling.kind = Kind::Custom;
    out.coupling.F = nullptr;
    // constant in x, so one mollified number per measure
    out.coupling.G = [U, mp](double, const EmpiricalMeasure& m) { return mollify(U, m, mp); };
    out.coupling.dxG = [](double, const EmpiricalMeasure&) { return 0.0; };
    out.coupling.dmuG = nullptr;
    return out;
  }
  throw Error("family", "data mollification supports zero, mean-linear and x-free couplings, not " +
                            c.name());
}

GoodSolutionReport good_solution_consistency(const MfgProblem& problem,
                                             const std::vector<int>& schedule,
                                             const std::vector<double>& probe_x,
                                             const std::vector<EmpiricalMeasure>& probe_mu,
                                             std::uint64_t seed, int mc_samples) {
  if (probe_x.empty() || probe_mu.empty()) throw Error("config", "good-solution check needs probes");
  ValueFunction V(problem, 1, seed);
  const auto& g = problem.grid;
  std::vector<std::vector<double>> base;
  for (auto& mu : probe_mu) base.push_back(V.value_row(0.0, mu));

  GoodSolutionReport rep;
  for (int n : schedule) {
    MollifierParams mp;
    mp.n = n;
    mp.mc_samples = mc_samples;
    mp.seed = seed;
    MfgProblem pn = mollify_problem(problem, mp);
    ValueFunction Vn(pn, 1, seed);
    double gap = 0.0;
    for (std::size_t k = 0; k < probe_mu.size(); ++k) {
      auto row = Vn.value_row(0.0, probe_mu[k]);
      auto a = grid_function(g, row), b = grid_function(g, base[k]);
      for (double x : probe_x) gap = std::max(gap, std::abs(a(x) - b(x)));
    }
    // Monte Carlo error of the mollified terminal along the first probe's flow
    double se = 0.0;
    if (problem.coupling.kind != CouplingSpec::Kind::Zero &&
        problem.coupling.kind != CouplingSpec::Kind::MeanLinear) {
      auto sol = Vn.solve_from(0.0, probe_mu.front());
      auto G = problem.coupling.G;
      ScalarMeasureFunctional U;
      U.eval = [G](const EmpiricalMeasure& m) { return G(0.0, m); };
      se = mollify_stats(U, sol.flow.back(), mp).std_error;
    }
    rep.n.push_back(n);
    rep.gap.push_back(gap);
    rep.std_error.push_back(se);
  }
  return rep;
}

}  // namespace mflab
