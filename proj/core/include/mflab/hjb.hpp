#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mflab/measures.hpp"

namespace mflab {

struct SpaceTimeGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  int nx = 801;
  double t0 = 0.0;
  double t1 = 1.0;
  int nt = 0;            // 0: choose from the stability bound
  double safety = 0.8;   // fraction of the stability bound used for dt

  double dx() const { return (x_max - x_min) / (nx - 1); }
  double x(int j) const { return x_min + j * dx(); }
  void validate() const;
};

// u, du, ddu on recorded time rows (rows[0] = t0, rows.back() = t1).
struct GridField {
  SpaceTimeGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> u, du, ddu;
  double theta = 0.0;      // max |dpH| used for the stability bound
  int steps = 0;           // internal time steps taken

  std::size_t rows() const { return times.size(); }
  // linear interpolation in x on a row; constant extension outside
  double u_at(std::size_t row, double x) const;
  double du_at(std::size_t row, double x) const;
  double ddu_at(std::size_t row, double x) const;
  // row whose time is closest to t
  std::size_t row_of(double t) const;

  double max_abs_du() const;
  double max_abs_ddu() const;
  void write_csv(std::ostream& os, std::size_t stride = 1) const;
};

struct HamiltonianSpec {
  std::string name = "custom";
  double constant = 0.0;  // quadratic only: H = z^2/2 + constant
  std::function<double(double, double)> H;    // H(x, z)
  std::function<double(double, double)> dpH;
  std::function<double(double, double)> dxH;
  std::function<double(double, double)> dppH;

  static HamiltonianSpec quadratic(double constant = 0.0);
  bool is_quadratic() const { return name == "quadratic"; }
  // max |dpH(x, z)| over |z| <= R, x in [a, b] (sampled)
  double max_slope(double R, double a, double b) const;
};

// min over samples of H(x,z2) - H(x,z1) - dpH(x,z1)(z2-z1); >= 0 for convex H
double convexity_witness(const HamiltonianSpec& H, double R, double a, double b,
                         int samples, std::uint64_t seed);

struct CouplingSpec {
  enum class Kind { Zero, MeanLinear, Quadratic, AbsDeviation, Custom };
  Kind kind = Kind::Zero;
  double c = 0.0;                          // mean coefficient for MeanLinear
  std::function<double(double)> g, dg;     // x part for MeanLinear
  std::function<double(double, const EmpiricalMeasure&)> F, G, dxF, dxG;
  // d_mu G(x, mu, x~) where the family has it in closed form
  std::function<double(double, const EmpiricalMeasure&, double)> dmuG;
  double lipschitz = 0.0;                  // declared W1 constant (on |x| <= 4)
  bool x_free_terminal = false;
  bool monotone = true;

  static CouplingSpec zero();
  static CouplingSpec mean_linear(std::function<double(double)> g,
                                  std::function<double(double)> dg, double c);
  static CouplingSpec quadratic();
  static CouplingSpec abs_deviation();
  std::string name() const;
};

// max over sampled (x, mu, nu) of |Phi(x,mu) - Phi(x,nu)| / W1(mu,nu), Phi = G
double lipschitz_witness(const CouplingSpec& c, int pairs, std::uint64_t seed);

struct HjbOptions {
  // Working gradient radius R. 0 picks 1.25 * max|G'| on the grid (at least 1).
  double radius = 0.0;
  // number of equal recording intervals; 0 records every step
  int record_intervals = 0;
};

// Backward solve of  u_t + 1/2 u_xx + H(x, u_x) + F(t, x) = 0,  u(t1) = G.
GridField solve_backward(const SpaceTimeGrid& grid, const HamiltonianSpec& H,
                         const std::function<double(double, double)>& F_flow,
                         const std::function<double(double)>& G_terminal,
                         const HjbOptions& opt = {});

// w_t + b w_x + 1/2 w_xx = 0, w(t1, x) = terminal(x) (x by default).
GridField feynman_kac_mean(const SpaceTimeGrid& grid,
                           const std::function<double(double, double)>& drift,
                           const HjbOptions& opt = {},
                           const std::function<double(double)>& terminal = {});

// drift b(t, x) = dpH(x, du(t, x)) of a solved field, time-linear between rows
std::function<double(double, double)> field_drift(const GridField& f,
                                                  const HamiltonianSpec& H);

}  // namespace mflab
