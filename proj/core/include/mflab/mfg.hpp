#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "mflab/hjb.hpp"
#include "mflab/measures.hpp"
#include "mflab/mollifier.hpp"

namespace mflab {

struct ParticleOptions {
  int particles = 20000;
  double dt = 0.01;        // particle step; HJB rows are recorded on this lattice
  bool antithetic = true;  // pairs (2k, 2k+1) receive opposite increments
};

struct PicardOptions {
  double tol = 1e-6;        // on sup_t W1 between successive flows
  int max_iter = 30;
  bool relax = false;       // average successive particle positions
  double relax_weight = 0.5;
  int max_halvings = 4;     // adaptive horizon halving on non-contraction
  int gap_rows = 20;        // rows sampled for the sup_t W1 gap
};

struct MfgProblem {
  HamiltonianSpec H = HamiltonianSpec::quadratic();
  CouplingSpec coupling = CouplingSpec::zero();
  double T = 1.0;
  SpaceTimeGrid grid;  // x-range and nx; time fields are set per solve
  ParticleOptions particles;
  PicardOptions picard;
  HjbOptions hjb;
  double beta = 0.0;  // common noise is not supported

  void validate() const;
};

struct MeasureFlow {
  std::vector<double> times;
  std::vector<EmpiricalMeasure> measures;
  const EmpiricalMeasure& back() const { return measures.back(); }
};

struct LocalSolveReport {
  int iterations = 0;
  std::vector<double> flow_gap;
  bool converged = false;
  double horizon_used = 0.0;
};

// P particles carrying mu. A measure with exactly P atoms is used as is (this
// keeps particle identity across stitched intervals); fewer atoms are copied
// in proportion to their mass with the mass split evenly among copies; more
// atoms are replaced by P equal-weight quantiles at (i + 1/2)/P.
EmpiricalMeasure allocate_particles(const EmpiricalMeasure& mu, int P);

// Euler-Maruyama with drift dpH(X, du); times follow the field rows.
// Increments are keyed by (seed, particle pair, global step) so that solves
// over adjacent intervals share noise with a solve over their union.
MeasureFlow forward_flow(const EmpiricalMeasure& initial, const GridField& drift_field,
                         const HamiltonianSpec& H, std::uint64_t seed,
                         const ParticleOptions& opt = {});

// Terminal data at t1 as grid values, given the flow's terminal measure.
using TerminalProvider = std::function<std::vector<double>(const EmpiricalMeasure&)>;

struct LocalSolution {
  GridField field;
  MeasureFlow flow;
  LocalSolveReport report;
};

// Fixed point between the frozen-flow HJB solve and the particle flow on
// [t0, t1]. Terminal defaults to G(., rho_t1).
LocalSolution picard_local(const MfgProblem& problem, const EmpiricalMeasure& rho0,
                           double t0, double t1, std::uint64_t seed,
                           const TerminalProvider& terminal = {});

// Value function assembled by backward stitching over a partition of [0,T].
class ValueFunction {
 public:
  ValueFunction(MfgProblem problem, int partitions, std::uint64_t seed);

  double value(double t, double x, const EmpiricalMeasure& mu) const;
  // V(t, ., mu) and d_x V(t, ., mu) on the grid
  std::vector<double> value_row(double t, const EmpiricalMeasure& mu) const;
  std::vector<double> grad_row(double t, const EmpiricalMeasure& mu) const;
  double grad_x(double t, double x, const EmpiricalMeasure& mu) const;

  // Full solution of the first interval starting at (t, mu).
  LocalSolution solve_from(double t, const EmpiricalMeasure& mu) const;

  const MfgProblem& problem() const { return problem_; }
  const std::vector<double>& partition() const { return partition_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t memo_size() const;
  // reports of the local solves run so far, in completion order
  std::vector<LocalSolveReport> reports() const;

 private:
  struct Row {
    std::vector<double> u, du;
  };
  MfgProblem problem_;
  std::vector<double> partition_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<long long, long long, std::uint64_t>, Row> memo_;
  mutable std::vector<LocalSolveReport> reports_;

  Row start_row(double t, const EmpiricalMeasure& particles) const;
  LocalSolution solve_interval(double t0, double t1, const EmpiricalMeasure& particles,
                               int depth) const;
  LocalSolution solve_interval_with(double t0, double t1, const EmpiricalMeasure& particles,
                                    const TerminalProvider& terminal, int depth) const;
  TerminalProvider terminal_at(double t1, int depth) const;
};

// Hash of the sorted atom list rounded to 1e-9.
std::uint64_t measure_fingerprint(const EmpiricalMeasure& mu);

// int [Phi(x,mu1) - Phi(x,mu2)] (mu1 - mu2)(dx)
double monotonicity_pairing(const std::function<double(double, const EmpiricalMeasure&)>& Phi,
                            const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);
// same pairing for Phi = V(t, ., .)
double value_pairing(const ValueFunction& V, double t, const EmpiricalMeasure& mu1,
                     const EmpiricalMeasure& mu2);

struct RegularityOptions {
  std::vector<double> xs;                  // default: 16 points on [-2, 2]
  std::vector<std::pair<EmpiricalMeasure, EmpiricalMeasure>> pairs;  // default: 8
  std::vector<double> ts;                  // default: 4 times in [0, T)
  std::vector<double> eps = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::function<double(double)> perturbation;  // default sin(x)
};

struct RegularityReport {
  double lip_x = 0.0;
  double lip_mu = 0.0;
  double holder_t = 0.0;
  std::vector<double> eps;
  std::vector<double> sup_dv;
  double envelope_C = 0.0;     // fitted at the largest eps
  bool under_envelope = false; // every eps below C (eps^{1/4} + eps)
  double stability_slope = 0.0;
};

RegularityReport regularity_probes(const ValueFunction& V, std::uint64_t seed,
                                   RegularityOptions opt = {});

// Mollified data (F_n, G_n, H_n). Supported couplings: zero, x-free, mean-linear.
MfgProblem mollify_problem(const MfgProblem& p, const MollifierParams& mp);

struct GoodSolutionReport {
  std::vector<int> n;
  std::vector<double> gap;     // max over probes of |V_n - V|
  std::vector<double> std_error;  // Monte Carlo error of the mollified terminal
};

GoodSolutionReport good_solution_consistency(const MfgProblem& problem,
                                             const std::vector<int>& schedule,
                                             const std::vector<double>& probe_x,
                                             const std::vector<EmpiricalMeasure>& probe_mu,
                                             std::uint64_t seed, int mc_samples = 32);

}  // namespace mflab
