#include "mflab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mflab/error.hpp"
#include "mflab/quadrature.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

// Neumaier summation; plain accumulation drifts past 1e-12 for 10^5 atoms.
double stable_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

void require_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.empty() || nu.empty()) throw Error("empty", "measure has no atoms");
  if (mu.dim() != 1 || nu.dim() != 1)
    throw Error("dim", "distances are implemented for d = 1 only");
}

struct Atom {
  double x, w;
};

std::vector<Atom> sorted_atoms(const EmpiricalMeasure& m) {
  std::vector<Atom> a(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) a[i] = {m.x(i), m.w(i)};
  std::stable_sort(a.begin(), a.end(),
                   [](const Atom& p, const Atom& q) { return p.x < q.x; });
  return a;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> positions,
                                   std::vector<double> weights, int dim)
    : pos_(std::move(positions)), weights_(std::move(weights)), dim_(dim) {
  if (dim_ < 1) throw Error("dim", "dimension must be positive");
  if (pos_.size() != weights_.size() * static_cast<std::size_t>(dim_))
    throw Error("dim", "position count does not match weights x dim");
  if (weights_.empty()) throw Error("empty", "measure has no atoms");
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weight", "negative or non-finite weight");
  for (double p : pos_)
    if (!std::isfinite(p)) throw Error("position", "non-finite atom position");
  double s = stable_sum(weights_);
  if (std::abs(s - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << s;
    throw Error("weight", os.str());
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<double> positions, int dim) {
  std::size_t n = positions.size() / static_cast<std::size_t>(dim);
  if (n == 0) throw Error("empty", "measure has no atoms");
  return EmpiricalMeasure(std::move(positions), std::vector<double>(n, 1.0 / n), dim);
}

EmpiricalMeasure EmpiricalMeasure::dirac(double x) {
  return EmpiricalMeasure({x}, {1.0}, 1);
}

EmpiricalMeasure EmpiricalMeasure::push_forward(
    const std::function<double(double)>& f) const {
  if (dim_ != 1) throw Error("dim", "push_forward is for d = 1");
  std::vector<double> p(pos_.size());
  std::transform(pos_.begin(), pos_.end(), p.begin(), f);
  return EmpiricalMeasure(std::move(p), weights_, 1);
}

EmpiricalMeasure EmpiricalMeasure::sorted() const {
  if (dim_ != 1) throw Error("dim", "sorted is for d = 1");
  auto a = sorted_atoms(*this);
  std::vector<double> p(a.size()), w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    p[i] = a[i].x;
    w[i] = a[i].w;
  }
  return EmpiricalMeasure(std::move(p), std::move(w), 1);
}

double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require_1d(mu, nu);
  auto a = sorted_atoms(mu), b = sorted_atoms(nu);
  // integrate |F_mu - F_nu| between consecutive breakpoints
  std::size_t i = 0, j = 0;
  double Fa = 0.0, Fb = 0.0, prev = std::min(a[0].x, b[0].x), acc = 0.0;
  while (i < a.size() || j < b.size()) {
    double xa = i < a.size() ? a[i].x : INFINITY;
    double xb = j < b.size() ? b[j].x : INFINITY;
    double x = std::min(xa, xb);
    acc += std::abs(Fa - Fb) * (x - prev);
    prev = x;
    while (i < a.size() && a[i].x == x) Fa += a[i++].w;
    while (j < b.size() && b[j].x == x) Fb += b[j++].w;
  }
  return acc;
}

double w2_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require_1d(mu, nu);
  auto a = sorted_atoms(mu), b = sorted_atoms(nu);
  // comonotone coupling: match mass in quantile order
  std::size_t i = 0, j = 0;
  double ra = a[0].w, rb = b[0].w, acc = 0.0;
  while (i < a.size() && j < b.size()) {
    double m = std::min(ra, rb);
    double d = a[i].x - b[j].x;
    acc += m * d * d;
    ra -= m;
    rb -= m;
    if (ra <= 0.0) {
      if (++i < a.size()) ra = a[i].w;
    }
    if (rb <= 0.0) {
      if (++j < b.size()) rb = b[j].w;
    }
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------

DistributionSpec DistributionSpec::dirac(double x) {
  DistributionSpec s;
  s.kind = Kind::Dirac;
  s.a = x;
  return s;
}

DistributionSpec DistributionSpec::gaussian(double mean, double var) {
  if (!(var > 0.0)) throw Error("config", "gaussian variance must be positive");
  DistributionSpec s;
  s.kind = Kind::Gaussian;
  s.a = mean;
  s.b = var;
  return s;
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  if (!(hi > lo)) throw Error("config", "uniform needs lo < hi");
  DistributionSpec s;
  s.kind = Kind::Uniform;
  s.a = lo;
  s.b = hi;
  return s;
}

DistributionSpec DistributionSpec::mixture(
    std::vector<std::pair<double, DistributionSpec>> parts) {
  if (parts.empty()) throw Error("config", "mixture needs components");
  double s = 0.0;
  for (auto& [w, p] : parts) {
    if (w < 0.0) throw Error("config", "negative mixture weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw Error("config", "mixture weights must sum to 1");
  DistributionSpec d;
  d.kind = Kind::Mixture;
  d.parts = std::move(parts);
  return d;
}

double DistributionSpec::cdf(double x) const {
  switch (kind) {
    case Kind::Dirac: return x >= a ? 1.0 : 0.0;
    case Kind::Gaussian: return normal_cdf((x - a) / std::sqrt(b));
    case Kind::Uniform: return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case Kind::Mixture: {
      double s = 0.0;
      for (auto& [w, p] : parts) s += w * p.cdf(x);
      return s;
    }
  }
  return 0.0;
}

double DistributionSpec::quantile(double p) const {
  switch (kind) {
    case Kind::Dirac: return a;
    case Kind::Gaussian: return a + std::sqrt(b) * normal_quantile(p);
    case Kind::Uniform: return a + p * (b - a);
    case Kind::Mixture: {
      // F(x) >= p once every component has passed its own p-quantile
      double lo = INFINITY, hi = -INFINITY;
      for (auto& [w, c] : parts) {
        if (w == 0.0) continue;
        double q = c.quantile(p);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      // generalized inverse by bisection: smallest x with F(x) >= p
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) >= p) hi = mid; else lo = mid;
      }
      // an atom inside the final bracket is the exact answer
      for (auto& [w, c] : parts)
        if (w > 0.0 && c.kind == Kind::Dirac && c.a >= lo && c.a <= hi && cdf(c.a) >= p) return c.a;
      return hi;
    }
  }
  return 0.0;
}

double DistributionSpec::draw(double u, double) const { return quantile(u); }

double DistributionSpec::mean() const {
  switch (kind) {
    case Kind::Dirac: return a;
    case Kind::Gaussian: return a;
    case Kind::Uniform: return 0.5 * (a + b);
    case Kind::Mixture: {
      double s = 0.0;
      for (auto& [w, p] : parts) s += w * p.mean();
      return s;
    }
  }
  return 0.0;
}

double DistributionSpec::abs_moment(double q) const {
  switch (kind) {
    case Kind::Dirac: return std::pow(std::abs(a), q);
    case Kind::Uniform:
      return integrate([&](double x) { return std::pow(std::abs(x), q); }, a, b) / (b - a);
    case Kind::Gaussian: {
      double s = std::sqrt(b);
      return integrate(
          [&](double x) {
            double z = (x - a) / s;
            return std::pow(std::abs(x), q) * std::exp(-0.5 * z * z) /
                   (s * std::sqrt(2.0 * std::numbers::pi));
          },
          a - 14.0 * s, a + 14.0 * s, 1e-11);
    }
    case Kind::Mixture: {
      double t = 0.0;
      for (auto& [w, p] : parts) t += w * p.abs_moment(q);
      return t;
    }
  }
  return 0.0;
}

nlohmann::json DistributionSpec::to_json() const {
  switch (kind) {
    case Kind::Dirac: return {{"kind", "dirac"}, {"x", a}};
    case Kind::Gaussian: return {{"kind", "gaussian"}, {"mean", a}, {"var", b}};
    case Kind::Uniform: return {{"kind", "uniform"}, {"a", a}, {"b", b}};
    case Kind::Mixture: {
      nlohmann::json arr = nlohmann::json::array();
      for (auto& [w, p] : parts) arr.push_back({{"weight", w}, {"spec", p.to_json()}});
      return {{"kind", "mixture"}, {"parts", arr}};
    }
  }
  return {};
}

DistributionSpec DistributionSpec::from_json(const nlohmann::json& j) {
  try {
    auto k = j.at("kind").get<std::string>();
    if (k == "dirac") return dirac(j.at("x").get<double>());
    if (k == "gaussian") return gaussian(j.value("mean", 0.0), j.value("var", 1.0));
    if (k == "uniform") return uniform(j.at("a").get<double>(), j.at("b").get<double>());
    if (k == "mixture") {
      std::vector<std::pair<double, DistributionSpec>> parts;
      for (auto& e : j.at("parts"))
        parts.emplace_back(e.at("weight").get<double>(), from_json(e.at("spec")));
      return mixture(std::move(parts));
    }
    throw Error("config", "unknown distribution kind '" + k + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", std::string("distribution spec: ") + e.what());
  }
}

EmpiricalMeasure sample(const DistributionSpec& spec, std::size_t n,
                        std::uint64_t seed) {
  if (n == 0) throw Error("empty", "sample size must be positive");
  std::vector<double> x(n);
  const std::uint64_t key = derive_key(seed, {0x5A4D'504Cull});
  Stream base(key);
  // atom i depends only on (seed, i)
  for (std::size_t i = 0; i < n; ++i) {
    auto b = base.block(i);
    double u = u32_to_open01(b[0]) + (static_cast<double>(b[1]) / 4294967296.0) / 4294967296.0;
    u = std::clamp(u, 1e-300, 1.0 - 1e-16);
    x[i] = spec.draw(u, u32_to_open01(b[2]));
  }
  return EmpiricalMeasure::uniform(std::move(x));
}

EmpiricalMeasure quantize(const DistributionSpec& spec, std::size_t n) {
  if (n == 0) throw Error("empty", "quantization size must be positive");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = spec.quantile((i + 0.5) / n);
  return EmpiricalMeasure::uniform(std::move(x));
}

double functional(const EmpiricalMeasure& mu, Functional kind) {
  if (mu.dim() != 1) throw Error("dim", "functional is for d = 1");
  double m = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) m += mu.w(i) * mu.x(i);
  if (kind == Functional::Mean) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double v = kind == Functional::SecondMoment ? mu.x(i) * mu.x(i)
                                                : std::abs(mu.x(i) - m);
    s += mu.w(i) * v;
  }
  return s;
}

void write_csv(std::ostream& os, const EmpiricalMeasure& mu) {
  auto old = os.precision(17);
  for (int k = 0; k < mu.dim(); ++k) os << "position_" << k << ',';
  os << "weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int k = 0; k < mu.dim(); ++k) os << mu.x(i, k) << ',';
    os << mu.w(i) << '\n';
  }
  os.precision(old);
}

EmpiricalMeasure read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("empty", "csv has no header");
  int dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (dim < 1) throw Error("dim", "csv header needs position and weight columns");
  std::vector<double> pos, w;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (int k = 0; k < dim; ++k) {
      std::getline(ls, cell, ',');
      pos.push_back(std::stod(cell));
    }
    std::getline(ls, cell);
    w.push_back(std::stod(cell));
  }
  return EmpiricalMeasure(std::move(pos), std::move(w), dim);
}

nlohmann::json to_json(const EmpiricalMeasure& mu) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    std::vector<double> p(mu.dim());
    for (int k = 0; k < mu.dim(); ++k) p[k] = mu.x(i, k);
    arr.push_back({{"position", p}, {"weight", mu.w(i)}});
  }
  return arr;
}

EmpiricalMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error("empty", "measure json must be a nonempty array");
  int dim = static_cast<int>(j[0].at("position").size());
  std::vector<double> pos, w;
  for (auto& a : j) {
    auto p = a.at("position").get<std::vector<double>>();
    if (static_cast<int>(p.size()) != dim) throw Error("dim", "inconsistent atom dimension");
    pos.insert(pos.end(), p.begin(), p.end());
    w.push_back(a.at("weight").get<double>());
  }
  return EmpiricalMeasure(std::move(pos), std::move(w), dim);
}

}  // namespace mflab
