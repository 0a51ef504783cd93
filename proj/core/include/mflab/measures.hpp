#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace mflab {

// Weighted atoms on R^d. Positions are stored row-major (atom i occupies
// positions[i*dim .. i*dim+dim-1]). Immutable once built.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(std::vector<double> positions, std::vector<double> weights,
                   int dim = 1);

  static EmpiricalMeasure uniform(std::vector<double> positions, int dim = 1);
  static EmpiricalMeasure dirac(double x);

  std::size_t size() const { return weights_.size(); }
  int dim() const { return dim_; }
  bool empty() const { return weights_.empty(); }

  double x(std::size_t i, int k = 0) const { return pos_[i * dim_ + k]; }
  double w(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& positions() const { return pos_; }
  const std::vector<double>& weights() const { return weights_; }

  // push-forward under a map of R^1 (dim must be 1)
  EmpiricalMeasure push_forward(const std::function<double(double)>& f) const;
  // atoms sorted by position, stable, d = 1 only
  EmpiricalMeasure sorted() const;

 private:
  std::vector<double> pos_;
  std::vector<double> weights_;
  int dim_ = 1;
};

double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double w2_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Initial laws used by experiments.
struct DistributionSpec {
  enum class Kind { Dirac, Gaussian, Uniform, Mixture };
  Kind kind = Kind::Dirac;
  double a = 0.0;  // dirac point, gaussian mean, uniform lower
  double b = 0.0;  // gaussian variance, uniform upper
  std::vector<std::pair<double, DistributionSpec>> parts;

  static DistributionSpec dirac(double x);
  static DistributionSpec gaussian(double mean, double var);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec mixture(std::vector<std::pair<double, DistributionSpec>> parts);

  double cdf(double x) const;
  double quantile(double p) const;
  double draw(double u, double v) const;  // from two uniforms
  double mean() const;
  double abs_moment(double q) const;  // E|X|^q, by quadrature for q non-integer

  nlohmann::json to_json() const;
  static DistributionSpec from_json(const nlohmann::json& j);
};

// n equal-weight iid atoms, deterministic in (spec, n, seed).
EmpiricalMeasure sample(const DistributionSpec& spec, std::size_t n,
                        std::uint64_t seed);

// n equal-weight atoms at the quantiles (i + 1/2)/n.
EmpiricalMeasure quantize(const DistributionSpec& spec, std::size_t n);

enum class Functional { Mean, SecondMoment, AbsDeviation };
double functional(const EmpiricalMeasure& mu, Functional kind);
inline double mean(const EmpiricalMeasure& mu) {
  return functional(mu, Functional::Mean);
}

// CSV: header position_0..position_{d-1},weight
void write_csv(std::ostream& os, const EmpiricalMeasure& mu);
EmpiricalMeasure read_csv(std::istream& is);
nlohmann::json to_json(const EmpiricalMeasure& mu);
EmpiricalMeasure measure_from_json(const nlohmann::json& j);

}  // namespace mflab
