// Registered experiments. Each maps a resolved parameter block and a seed to
// a ResultTable; "checks" in the summary back `mflab run --assert`.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflab/error.hpp"
#include "mflab/harness.hpp"
#include "mflab/lions.hpp"
#include "mflab/mfg.hpp"
#include "mflab/mollifier.hpp"
#include "mflab/nash.hpp"
#include "mflab/quadrature.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

using nlohmann::json;

constexpr std::uint64_t kExpTag = 0x45585054ull;

double logistic(double x) { return 1.0 / (1.0 + std::exp(x)); }
double dlogistic(double x) {
  const double e = std::exp(x);
  return -e / ((1.0 + e) * (1.0 + e));
}
double zero_fn(double) { return 0.0; }

std::vector<int> ints(const json& j) { return j.get<std::vector<int>>(); }
std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

MfgProblem base_problem(CouplingSpec c, double T, int particles, int nx = 801) {
  MfgProblem p;
  p.coupling = std::move(c);
  p.T = T;
  p.particles.particles = particles;
  p.grid.nx = nx;
  return p;
}

DistributionSpec distribution(const std::string& name) {
  if (name == "gaussian") return DistributionSpec::gaussian(0.0, 1.0);
  if (name == "uniform") return DistributionSpec::uniform(0.0, 1.0);
  if (name == "dirac") return DistributionSpec::dirac(0.0);
  throw Error("config", "unknown distribution '" + name + "'");
}

json rate_summary(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

ResultTable rate_table(const RateFit& f) {
  ResultTable t;
  t.columns = {"N", "stat", "std_error"};
  for (std::size_t k = 0; k < f.N.size(); ++k) t.add_row({f.N[k], f.stat[k], f.std_error[k]});
  t.summary = rate_summary(f);
  return t;
}

// random measure with `atoms` equal-weight atoms, N(0,1) positions
EmpiricalMeasure random_measure(Stream& s, int atoms, double shift = 0.0) {
  std::vector<double> x(atoms);
  for (auto& v : x) v = shift + s.normal();
  return EmpiricalMeasure::uniform(std::move(x));
}

ResultTable nonclassical(const json& p, std::uint64_t seed) {
  const int P = p.at("particles");
  ValueFunction V(base_problem(CouplingSpec::abs_deviation(), p.at("T"), P, p.at("nx")), 1, seed);
  const double v = V.value(0.0, p.at("x"), EmpiricalMeasure::dirac(0.0));
  auto mu = quantize(DistributionSpec::gaussian(0.0, 1.0), P);
  auto g = gateaux_probe(V, p.at("x"), mu, doubles(p.at("eps")));
  ResultTable t;
  t.columns = {"eps", "right_quotient", "left_quotient"};
  for (std::size_t k = 0; k < g.eps.size(); ++k)
    t.add_row({g.eps[k], g.right_quotient[k], g.left_quotient[k]});
  // from delta_0 nobody moves, rho_T = N(0, T) and E|B_T| = sqrt(2T/pi)
  const double T = p.at("T");
  const double oracle = std::abs(std::sqrt(2 * T / std::numbers::pi) - 2 / std::sqrt(std::numbers::pi));
  const double s = 1.0 / std::sqrt(std::numbers::pi);
  t.summary = {{"value", v},
               {"closed_form", oracle},
               {"right_slope", g.right_slope},
               {"left_slope", g.left_slope},
               {"slope_closed_form", s}};
  t.summary["checks"] = {{"value", std::abs(v - oracle) <= 0.01},
                         {"right_slope", std::abs(g.right_slope - s) <= 0.05},
                         {"left_slope", std::abs(g.left_slope + s) <= 0.05}};
  return t;
}

ResultTable comparison(const json& p, std::uint64_t seed) {
  const double T = p.at("T");
  const int P = p.at("particles");
  auto d0 = EmpiricalMeasure::dirac(0.0);
  ValueFunction U(base_problem(CouplingSpec::mean_linear(logistic, dlogistic, 0.0), T, P), 1, seed);
  const double u2 = U.value(0.0, 0.0, d0);
  // ln E exp(g2(B_T)) by adaptive quadrature against the normal density
  const double sd = std::sqrt(T);
  const double ref = std::log(integrate(
      [sd](double z) { return std::exp(logistic(sd * z) - 0.5 * z * z) / std::sqrt(2 * std::numbers::pi); },
      -12.0, 12.0));

  ResultTable t;
  t.columns = {"c0", "v1", "v2"};
  double first = -1.0;
  for (double c0 : doubles(p.at("c0"))) {
    ValueFunction V1(base_problem(CouplingSpec::mean_linear(zero_fn, zero_fn, c0), T, P), 1, seed);
    ValueFunction V2(base_problem(CouplingSpec::mean_linear(logistic, dlogistic, c0), T, P), 1, seed);
    const double v1 = V1.value(0.0, 0.0, d0), v2 = V2.value(0.0, 0.0, d0);
    t.add_row({c0, v1, v2});
    if (first < 0 && v2 < v1) first = c0;
  }
  t.summary = {{"u2", u2}, {"u2_quadrature", ref}, {"smallest_c0", first < 0 ? json() : json(first)}};
  t.summary["checks"] = {{"u2", std::abs(u2 - ref) <= 1e-3}, {"sweep", first > 0 && first <= 50}};
  return t;
}

ResultTable w2_blowup(const json& p, std::uint64_t seed) {
  const int M = p.at("mc_samples");
  ResultTable t;
  t.columns = {"m", "ratio_w2", "ratio_w1"};
  for (int m : ints(p.at("m")))
    t.add_row({double(m), blowup_probe(m, ProbeMetric::W2, M, seed), blowup_probe(m, ProbeMetric::W1, M, seed)});
  const auto r = t.column("ratio_w2");
  const double growth = r.back() / r.front();
  const double expect = std::sqrt(t.rows.back()[0] / t.rows.front()[0]);
  t.summary = {{"growth", growth}, {"sqrt_m_growth", expect}};
  t.summary["checks"] = {{"growth", growth >= 0.7 * expect && growth <= 1.3 * expect}};
  return t;
}

// g(x) = e x b(x), b(x) = exp(-4/(4 - x^2)) on (-2, 2); g'(0) = 1
SmoothProfile tilted_bump() {
  SmoothProfile s;
  auto b = [](double x) { return std::abs(x) < 2 ? std::exp(-4.0 / (4.0 - x * x)) : 0.0; };
  auto db = [b](double x) {
    return std::abs(x) < 2 ? b(x) * (-8.0 * x / ((4.0 - x * x) * (4.0 - x * x))) : 0.0;
  };
  const double e = std::exp(1.0);
  s.g = [b, e](double x) { return e * x * b(x); };
  s.dg = [b, db, e](double x) { return e * (b(x) + x * db(x)); };
  s.support_radius = 2.0;
  return s;
}

ResultTable gradient_gap(const json& p, std::uint64_t) {
  auto g = tilted_bump();
  ResultTable t;
  t.columns = {"n", "gap_lattice", "gap_band"};
  double worst = INFINITY;
  for (int n : ints(p.at("n"))) {
    const double a = pointwise_gradient_gap(g, n, 0.0);
    t.add_row({double(n), a, pointwise_gradient_gap(g, n, 0.5 / n)});
    worst = std::min(worst, a);
  }
  t.summary = {{"min_gap_lattice", worst}};
  t.summary["checks"] = {{"gap", worst >= 1.0}};
  return t;
}

ResultTable mollifier_convergence(const json& p, std::uint64_t seed) {
  const int M = p.at("mc_samples");
  const int family = p.at("family_size"), pairs = p.at("pairs");
  // abs deviation about the mean: nonlinear, 2-Lipschitz in W1
  ScalarMeasureFunctional U;
  U.eval = [](const EmpiricalMeasure& m) { return functional(m, Functional::AbsDeviation); };

  std::vector<EmpiricalMeasure> compact;
  for (int k = 0; k < family; ++k) {
    const double mean = -1.0 + 2.0 * k / std::max(1, family - 1);
    const double var = k % 2 ? 0.25 : 1.0;
    compact.push_back(quantize(DistributionSpec::gaussian(mean, var), 16));
  }
  std::vector<std::pair<EmpiricalMeasure, EmpiricalMeasure>> pp;
  Stream s(seed, {kExpTag, 3});
  for (int k = 0; k < pairs; ++k) {
    auto a = random_measure(s, 8);
    auto b = random_measure(s, 8, 0.5 * s.normal());
    pp.emplace_back(std::move(a), std::move(b));
  }

  ResultTable t;
  t.columns = {"n", "uniform_error", "error_stderr", "lipschitz_max"};
  for (int n : ints(p.at("n"))) {
    MollifierParams mp;
    mp.n = n;
    mp.mc_samples = M;
    mp.seed = seed;
    double err = 0.0, se = 0.0;
    for (const auto& mu : compact) {
      auto v = mollify_stats(U, mu, mp);
      const double e = std::abs(v.value - U.eval(mu));
      if (e > err) err = e, se = v.std_error;
    }
    double lip = 0.0;
    for (const auto& [a, b] : pp) {
      const double w = w1_distance(a, b);
      if (w > 0) lip = std::max(lip, std::abs(mollify(U, a, mp) - mollify(U, b, mp)) / w);
    }
    t.add_row({double(n), err, se, lip});
  }
  const auto e = t.column("uniform_error"), se = t.column("error_stderr"), l = t.column("lipschitz_max");
  const double spread = *std::max_element(l.begin(), l.end()) / *std::min_element(l.begin(), l.end());
  t.summary = {{"lipschitz_spread", spread}};
  t.summary["checks"] = {{"uniform_error", e.back() <= e.front() + 2 * std::hypot(se.front(), se.back())},
                         {"lipschitz", spread <= 1.5}};
  return t;
}

ResultTable monotonicity(const json& p, std::uint64_t seed) {
  const double T = p.at("T");
  const int P = p.at("particles"), samples = p.at("samples"), reps = p.at("replicas");
  Stream s(seed, {kExpTag, 4});

  // closed-form identities
  auto G = CouplingSpec::quadratic().G;
  double ident = 0.0, mol = 0.0;
  auto U = square_gap_functional();
  auto k = DiscreteKernel::shifted_bump(0.8);
  const double eps = p.at("eps");
  auto Ue = mollify_x(U, eps, k);
  for (int r = 0; r < samples; ++r) {
    auto a = random_measure(s, 5), b = random_measure(s, 7, 1.0);
    const double dm = mean(a) - mean(b);
    ident = std::max(ident, std::abs(monotonicity_pairing(G, a, b) + 2 * dm * dm));
    const double f = xmollified_pairing_formula(a, b, eps, k.mean());
    mol = std::max(mol, std::abs(monotonicity_pairing(Ue, a, b) - f) / (1 + std::abs(f)));
  }

  // propagation: V(t, ., .) stays monotone
  std::vector<std::unique_ptr<ValueFunction>> Vs;
  for (int r = 0; r < reps; ++r)
    Vs.push_back(std::make_unique<ValueFunction>(base_problem(CouplingSpec::quadratic(), T, P), 1,
                                                 derive_key(seed, {kExpTag, 5, std::uint64_t(r)})));
  ResultTable t;
  t.columns = {"t", "pairing", "std_error"};
  bool ok = true;
  for (int r = 0; r < samples; ++r) {
    const double tt = T * s.uniform() * 0.9;
    auto a = random_measure(s, 4), b = random_measure(s, 4, s.normal());
    double m = 0.0, m2 = 0.0;
    for (const auto& V : Vs) {
      const double v = value_pairing(*V, tt, a, b);
      m += v, m2 += v * v;
    }
    m /= reps;
    const double se = std::sqrt(std::max(0.0, m2 / reps - m * m) / (reps - 1));
    t.add_row({tt, m, se});
    ok = ok && m <= 3 * se;
  }
  t.summary = {{"identity_max_error", ident}, {"mollified_formula_max_error", mol}};
  t.summary["checks"] = {{"identity", ident <= 1e-12}, {"propagation", ok}, {"mollified_formula", mol <= 1e-12}};
  return t;
}

ResultTable regularity(const json& p, std::uint64_t seed) {
  const double T = p.at("T");
  const int P = p.at("particles");
  RegularityOptions o;
  o.eps = doubles(p.at("eps"));
  ResultTable t;
  t.columns = {"partitions", "lip_x", "lip_mu", "holder_t"};
  json stab = json::array();
  bool under = true;
  for (int K : ints(p.at("partitions"))) {
    ValueFunction V(base_problem(CouplingSpec::quadratic(), T, P), K, seed);
    auto r = regularity_probes(V, seed, o);
    t.add_row({double(K), r.lip_x, r.lip_mu, r.holder_t});
    stab.push_back({{"partitions", K}, {"eps", r.eps}, {"sup_dv", r.sup_dv}, {"envelope_C", r.envelope_C},
                    {"under_envelope", r.under_envelope}, {"slope", r.stability_slope}});
    under = under && r.under_envelope;
  }
  double drift = 0.0;
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    const auto col = t.column(t.columns[c]);
    for (double v : col)
      if (col.front() > 0) drift = std::max(drift, std::abs(v / col.front() - 1.0));
  }
  t.summary = {{"max_relative_change", drift}, {"stability", stab}};
  t.summary["checks"] = {{"stable_ratios", drift <= 0.1}, {"envelope", under}};
  return t;
}

ResultTable good_solution(const json& p, std::uint64_t seed) {
  const int P = p.at("particles"), M = p.at("mc_samples");
  const auto xs = doubles(p.at("probe_x"));
  std::vector<EmpiricalMeasure> mus = {EmpiricalMeasure::dirac(0.0), EmpiricalMeasure::uniform({-0.5, 0.5})};
  auto rough = good_solution_consistency(base_problem(CouplingSpec::abs_deviation(), p.at("T"), P),
                                         ints(p.at("schedule")), xs, mus, seed, M);
  auto smooth = good_solution_consistency(
      base_problem(CouplingSpec::mean_linear(logistic, dlogistic, 1.0), p.at("T"), P),
      ints(p.at("smooth_schedule")), xs, mus, seed, M);
  ResultTable t;
  t.columns = {"smooth", "n", "gap", "std_error"};
  for (std::size_t k = 0; k < rough.n.size(); ++k) t.add_row({0, double(rough.n[k]), rough.gap[k], rough.std_error[k]});
  for (std::size_t k = 0; k < smooth.n.size(); ++k) t.add_row({1, double(smooth.n[k]), smooth.gap[k], smooth.std_error[k]});
  bool mono = true;
  for (std::size_t k = 1; k < rough.n.size(); ++k)
    mono = mono && rough.gap[k] <= rough.gap[k - 1] + 2 * std::hypot(rough.std_error[k], rough.std_error[k - 1]);
  RateFit f;
  f.N.assign(smooth.n.begin(), smooth.n.end());
  f.stat = smooth.gap;
  bool positive = std::all_of(f.stat.begin(), f.stat.end(), [](double v) { return v > 0; });
  if (positive) fit_loglog(f);
  t.summary = {{"smooth_fit", rate_summary(f)}};
  t.summary["checks"] = {{"nonsmooth_monotone", mono}, {"smooth_rate", positive && f.slope <= -0.85}};
  return t;
}

ResultTable representation(const json& p, std::uint64_t seed) {
  const int P = p.at("particles");
  const double c = p.at("c");
  ValueFunction Vl(base_problem(CouplingSpec::mean_linear(zero_fn, zero_fn, c), 1.0, P), 1, seed);
  ValueFunction Vq(base_problem(CouplingSpec::quadratic(), p.at("T"), P), 1, seed);
  auto mu = EmpiricalMeasure::uniform({-0.4, 0.1, 0.6});
  ResultTable t;
  t.columns = {"quadratic", "x", "value", "oracle", "rel_err"};
  double lin = 0.0, quad = 0.0;
  for (double x : doubles(p.at("x"))) {
    auto a = lions_derivative_rep(Vl, x, mu, 0.6);
    t.add_row({0, x, a.value, a.oracle, a.rel_err});
    lin = std::max(lin, std::abs(a.value - c));
    auto b = lions_derivative_rep(Vq, x, mu, 0.6);
    t.add_row({1, x, b.value, b.oracle, b.rel_err});
    quad = std::max(quad, b.rel_err);
  }
  t.summary = {{"mean_linear_max_error", lin}, {"quadratic_max_rel_err", quad}};
  t.summary["checks"] = {{"mean_linear", lin <= 1e-10}, {"quadratic", quad <= 0.02}};
  return t;
}

ResultTable nash_rate(const json& p, std::uint64_t seed) {
  NashRateOptions o;
  o.family = "lq";
  o.Ns = ints(p.at("N"));
  o.probes = p.at("probes");
  o.T = p.at("T");
  o.particles = p.at("particles");
  o.scale = p.at("scale");
  auto f = nash_convergence_experiment(o, seed);
  ResultTable t = rate_table(f);

  o.family = "separable";
  o.c0 = p.at("c0");
  auto sep = nash_convergence_experiment(o, seed);
  const double sep_max = *std::max_element(sep.stat.begin(), sep.stat.end());

  auto oracle = nash_lq(2, o.T, seed);
  auto grid = two_player_grid(o.T);
  Stream s(seed, {kExpTag, 7});
  double diff = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double x1 = 2 * s.normal() / 3, x2 = 2 * s.normal() / 3;
    diff = std::max(diff, std::abs(oracle.value(0.0, {x1, x2}, 0) - grid.value(x1, x2)));
  }
  const double tol = p.at("separable_tol");
  t.summary["separable_max_gap"] = sep_max;
  t.summary["two_player_max_diff"] = diff;
  t.summary["checks"] = {{"lq_slope", std::abs(f.slope + 0.5) <= 0.15},
                         {"separable", sep_max <= tol},
                         {"two_player", diff <= 5e-3}};
  return t;
}

ResultTable chaos(const json& p, std::uint64_t seed) {
  ChaosOptions o;
  o.Ns = ints(p.at("N"));
  o.p = p.at("p");
  o.T = p.at("T");
  o.dt = p.at("dt");
  o.players_per_point = p.at("players_per_point");
  o.particles = p.at("particles");
  auto r = chaos_experiment(o, seed);
  ChaosOptions d = o;
  d.family = "separable";
  d.Ns = {4, 16, 64};
  d.players_per_point = 256;
  auto dg = chaos_experiment(d, seed);
  const double degenerate = *std::max_element(dg.path.stat.begin(), dg.path.stat.end());

  ResultTable t;
  t.columns = {"N", "path", "path_std_error", "flow", "flow_std_error", "flow_t0"};
  for (std::size_t k = 0; k < r.path.N.size(); ++k)
    t.add_row({r.path.N[k], r.path.stat[k], r.path.std_error[k], r.flow.stat[k], r.flow.std_error[k], r.flow_t0[k]});
  t.summary = {{"path_fit", rate_summary(r.path)}, {"flow_fit", rate_summary(r.flow)}, {"degenerate_max", degenerate}};
  t.summary["checks"] = {{"path_slope", std::abs(r.path.slope + 0.5) <= 0.15}, {"degenerate", degenerate == 0.0}};
  return t;
}

ResultTable empirical_rate(const json& p, std::uint64_t seed) {
  auto f = empirical_rate_experiment(distribution(p.at("distribution")), ints(p.at("N")), p.at("trials"), seed);
  ResultTable t = rate_table(f);
  t.summary["checks"] = {{"slope", std::abs(f.slope + 1.0) <= 0.15}};
  return t;
}

ResultTable value(const json& p, std::uint64_t seed) {
  ValueFunction V(problem_from_json(p.at("problem")), p.at("partitions"), seed);
  auto mu = quantize(distribution(p.at("measure")), p.at("atoms").get<std::size_t>());
  ResultTable t;
  t.columns = {"x", "value", "grad_x"};
  for (double x : doubles(p.at("x"))) t.add_row({x, V.value(0.0, x, mu), V.grad_x(0.0, x, mu)});
  return t;
}

std::vector<ExperimentDescriptor> build_registry() {
  std::vector<ExperimentDescriptor> r;
  r.push_back({"counterexample.nonclassical",
               "G(mu) = |int |y - m| dmu - 2/sqrt(pi)|: V(0,x,delta_0) = (2 - sqrt 2)/sqrt(pi) and one-sided "
               "Gateaux slopes +-1/sqrt(pi) at N(0,1), so V is not differentiable in mu",
               {{"T", 1.0}, {"particles", 20000}, {"nx", 801}, {"x", 0.0}, {"eps", {0.05, 0.1, 0.15, 0.2}}},
               nonclassical});
  r.push_back({"counterexample.comparison",
               "g1 = 0, g2 = 1/(1+e^x) plus C0 m: g1 <= g2 yet V2(0,0,delta_0) < V1 = 0 once C0 is large; "
               "sweep over C0",
               {{"T", 1.0}, {"particles", 20000}, {"c0", {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}}},
               comparison});
  r.push_back({"counterexample.w2-blowup",
               "mollified U^m at mu^m, nu^m: |U^m_m(mu^m) - U^m_m(nu^m)| >= (sqrt(m)/C) W2(mu^m, nu^m), "
               "while the W1 ratio stays bounded",
               {{"m", {4, 8, 16}}, {"mc_samples", 64}},
               w2_blowup});
  r.push_back({"counterexample.mollifier-gradient",
               "U = int g dmu with |g'(0)| >= 1: d_mu U_n(delta_0, 0) = 0 at lattice points",
               {{"n", {4, 8, 16, 32}}},
               gradient_gap});
  r.push_back({"mollifier.convergence",
               "||U_n - U|| on a compact family decreases in n; W1-Lipschitz constant CL independent of n",
               {{"n", {4, 8, 16}}, {"mc_samples", 256}, {"family_size", 12}, {"pairs", 50}},
               mollifier_convergence});
  r.push_back({"mfg.value",
               "V(0, x, mu) and d_x V by Picard iteration on the coupled HJB and particle flow",
               {{"problem", problem_defaults()},
                {"partitions", 1},
                {"x", {-1.0, 0.0, 1.0}},
                {"measure", "gaussian"},
                {"atoms", 64}},
               value});
  r.push_back({"mfg.monotonicity",
               "int [Phi(x,mu1) - Phi(x,mu2)](mu1 - mu2)(dx) <= 0: closed-form -2 dm^2 for (x - m)^2, "
               "propagation to V(t,.,.), and the x-mollified counterexample",
               {{"T", 0.1}, {"particles", 4000}, {"samples", 8}, {"replicas", 4}, {"eps", 0.3}},
               monotonicity});
  r.push_back({"mfg.regularity",
               "Lipschitz ratios of V in x and mu and Holder-1/2 in t under partition refinement; "
               "sup |dV| <= C(|dI|^{1/4} + |dI|) for perturbed data",
               {{"T", 0.1}, {"particles", 2000}, {"partitions", {1, 2}}, {"eps", {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}}},
               regularity});
  r.push_back({"mfg.good-solution",
               "values of mollified data (F_n, G_n, H_n) converge to V as n grows",
               {{"T", 0.2},
                {"particles", 2000},
                {"mc_samples", 32},
                {"probe_x", {-1.0, 0.0, 1.0}},
                {"schedule", {4, 8, 16}},
                {"smooth_schedule", {4, 8, 16, 32}}},
               good_solution});
  r.push_back({"lions.representation",
               "d_mu V(0,x,mu,x~) = E[d_mu G(X_T, rho_T, X~_T) grad X~_T] against finite differences",
               {{"particles", 20000}, {"T", 0.1}, {"c", 0.7}, {"x", {-1.0, 1.0}}},
               representation});
  r.push_back({"nash.rate",
               "|U^N - V|(0, x_i, m^{N,i}) / (1 + |x_i| + ||x||) against N for the lq family",
               {{"N", {4, 8, 16, 32, 64, 128, 256}},
                {"probes", 4},
                {"T", 0.1},
                {"particles", 20000},
                {"scale", 1.0},
                {"c0", 1.0},
                {"separable_tol", 1e-6}},
               nash_rate});
  r.push_back({"nash.chaos",
               "E[sup_t |X^{N,i} - X^i|^p]^{1/p} and sup_t E[W1(rho^N_t, rho_t)^p]^{1/p} under shared noise",
               {{"N", {4, 8, 16, 32, 64, 128, 256}},
                {"p", 1.5},
                {"T", 0.1},
                {"dt", 0.01},
                {"players_per_point", 8192},
                {"particles", 20000}},
               chaos});
  r.push_back({"nash.empirical-rate",
               "E[W1^2(mu^N, mu)] <= C/N in one dimension",
               {{"distribution", "gaussian"}, {"N", {16, 32, 64, 128, 256, 512, 1024, 2048, 4096}}, {"trials", 200}},
               empirical_rate});
  return r;
}

}  // namespace

const std::vector<ExperimentDescriptor>& registry_list() {
  static const std::vector<ExperimentDescriptor> r = build_registry();
  return r;
}

}  // namespace mflab
