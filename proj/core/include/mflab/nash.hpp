#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mflab/hjb.hpp"
#include "mflab/measures.hpp"
#include "mflab/mfg.hpp"

namespace mflab {

// Closed-loop N-player values v^{N,i}(t, x) for H = z^2/2, F = 0.
struct NashOracle {
  std::string family;
  int N = 0;
  double T = 0.0;
  std::function<double(double, const std::vector<double>&, int)> value;
  std::function<double(double, const std::vector<double>&, int)> grad;  // d_{x_i} v^{N,i}
  double residual = 0.0;  // max |Nash PDE residual| at the probe points
  double tol = 0.0;
};

// v^{N,i} = u(t, x_i) + c0/(N-1) sum_{j != i} w(t, x_j), G = g(x) + c0 m.
NashOracle nash_separable(int N, std::function<double(double)> g, double c0,
                          const SpaceTimeGrid& grid, std::uint64_t seed = 0,
                          double tol = 5e-3);

// Coefficients of v = a x_i^2 + b x_i m + c m^2 + e q + k, m and q the mean and
// mean square of the other players, for G = (x - m)^2.
struct LqCoefficients {
  std::vector<double> t;
  std::vector<double> a, b, c, e, k;
  double at(const std::vector<double>& f, double s) const;
};
LqCoefficients lq_coefficients(int N, double T, int steps = 2000);
NashOracle nash_lq(int N, double T, std::uint64_t seed = 0, double tol = 1e-6);

// Two-player system for G = (x - m)^2 on a square grid.
struct TwoPlayerGrid {
  double L = 8.0;
  double dx = 0.04;
  int n = 0;
  std::vector<double> v;  // v^1(0, x1, x2), row major in x1
  double value(double x1, double x2) const;
};
TwoPlayerGrid two_player_grid(double T, double L = 8.0, double dx = 0.04);

// Log-log least squares of stat against N.
struct RateFit {
  std::vector<double> N;
  std::vector<double> stat;
  std::vector<double> std_error;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
// fills slope/intercept/r2 (NaN with fewer than 4 points); throws
// "log-domain" on nonpositive values
void fit_loglog(RateFit& f);

RateFit empirical_rate_experiment(const DistributionSpec& spec, const std::vector<int>& Ns,
                                  int trials, std::uint64_t seed);

struct NashRateOptions {
  std::string family = "lq";      // lq | separable
  std::vector<int> Ns = {4, 8, 16, 32, 64, 128, 256};
  int probes = 4;
  double T = 0.1;
  double c0 = 1.0;                // separable
  std::function<double(double)> g = [](double) { return 0.0; };
  double scale = 1.0;             // probe positions are scale * N(0,1)
  int particles = 20000;
};
RateFit nash_convergence_experiment(const NashRateOptions& opt, std::uint64_t seed);

// Paths of the N-player equilibrium and of the iid limit system under
// shared Brownian increments.
struct ParticleSystem {
  int N = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> paths;        // [step][player]
  std::vector<std::vector<double>> limit_paths;  // same noise, limit drift
};
ParticleSystem simulate_players(const NashOracle& oracle, const GridField& limit_field,
                                const std::vector<double>& x0, double dt,
                                std::uint64_t seed, std::uint64_t trial);

struct ChaosOptions {
  std::string family = "lq";  // lq | separable (shared drift)
  std::vector<int> Ns = {4, 8, 16, 32, 64, 128, 256};
  double p = 1.5;
  double T = 0.1;
  double dt = 0.01;
  DistributionSpec xi = DistributionSpec::gaussian(0.0, 1.0);
  int players_per_point = 8192;  // trials = players / N
  int particles = 20000;
};
struct ChaosReport {
  RateFit path;   // E[sup_t |X^{N,i} - X^i|^p]^{1/p}
  RateFit flow;   // sup_t E[W1(rho^N_t, rho_t)^p]^{1/p}
  std::vector<double> flow_t0;  // the same statistic at t = 0
};
ChaosReport chaos_experiment(const ChaosOptions& opt, std::uint64_t seed);

}  // namespace mflab
