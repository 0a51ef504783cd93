#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mflab/error.hpp"
#include "mflab/lions.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

double g2(double x) { return 1.0 / (1.0 + std::exp(x)); }
double dg2(double x) { return -std::exp(x) / ((1.0 + std::exp(x)) * (1.0 + std::exp(x))); }
double zero(double) { return 0.0; }

MfgProblem problem(CouplingSpec c, double T, int particles = 4000) {
  MfgProblem p;
  p.coupling = std::move(c);
  p.T = T;
  p.particles.particles = particles;
  return p;
}

}  // namespace

TEST(GradXV, ZeroData) {
  ValueFunction V(problem(CouplingSpec::zero(), 1.0, 500), 1, 0);
  EXPECT_EQ(grad_x_V(V, 0.0, 0.3, EmpiricalMeasure::dirac(0.0)), 0.0);
}

TEST(GradXV, ColeHopfGradient) {
  ValueFunction V(problem(CouplingSpec::mean_linear(g2, dg2, 0.0), 1.0, 500), 1, 0);
  auto mu = EmpiricalMeasure::dirac(0.0);
  for (double x : {-1.0, 0.0, 1.5}) {
    const double h = 1e-4;
    double ref = (oracle::cole_hopf(g2, x + h, 1.0) - oracle::cole_hopf(g2, x - h, 1.0)) / (2 * h);
    EXPECT_NEAR(grad_x_V(V, 0.0, x, mu), ref, 1e-3) << x;
    // finite difference of V itself, one grid cell apart
    const double dx = V.problem().grid.dx();
    double fd = (V.value(0, x + dx, mu) - V.value(0, x - dx, mu)) / (2 * dx);
    EXPECT_NEAR(grad_x_V(V, 0.0, x, mu), fd, 1e-3) << x;
  }
}

TEST(LionsFd, MeanLinearGivesCoefficient) {
  ValueFunction V(problem(CouplingSpec::mean_linear(zero, zero, 1.5), 1.0, 1000), 1, 0);
  auto mu = EmpiricalMeasure({-0.5, 0.25, 1.0}, {0.2, 0.5, 0.3});
  for (std::size_t i = 0; i < mu.size(); ++i)
    EXPECT_NEAR(lions_derivative_fd(V, 0.0, 0.4, mu, i), 1.5, 1e-9) << i;
}

TEST(LionsFd, ZeroData) {
  ValueFunction V(problem(CouplingSpec::zero(), 1.0, 500), 1, 0);
  EXPECT_EQ(lions_derivative_fd(V, 0.0, 0.0, EmpiricalMeasure::uniform({-1.0, 1.0}), 1), 0.0);
}

TEST(LionsFd, QuadraticIsOddInStateAtSymmetricMeasure) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1, 2000), 1, 0);
  auto mu = EmpiricalMeasure::uniform({-0.6, 0.6});
  for (double x : {0.3, 1.2}) {
    double a = lions_derivative_fd(V, 0.0, x, mu, 0);
    double b = lions_derivative_fd(V, 0.0, -x, mu, 0);
    EXPECT_NEAR(a, -b, 1e-3 * std::abs(a)) << x;
    // -2 A(0) (x - m), A(0) = 1 / (1 - 0.2)
    EXPECT_NEAR(a, -2.5 * x, 2e-2 * std::abs(a)) << x;
  }
}

TEST(LionsFd, ResolutionGuard) {
  ValueFunction V(problem(CouplingSpec::zero(), 1.0, 500), 1, 0);
  try {
    lions_derivative_fd(V, 0.0, 0.0, EmpiricalMeasure::uniform({-1.0, 1.0}), 0, 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "resolution");
  }
}

TEST(LionsFd, RichardsonCheckPasses) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1, 2000), 1, 0);
  auto r = lions_derivative_fd_checked(V, 0.0, 1.0, EmpiricalMeasure::uniform({-0.2, 0.4}), 1);
  EXPECT_TRUE(r.richardson_ok);
}

TEST(Tangent, LinearInInitialValue) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1, 200), 1, 0);
  auto mu = EmpiricalMeasure::uniform({-0.3, 0.5});
  auto sol = V.solve_from(0.0, mu);
  auto rho0 = sol.flow.measures.front();
  const auto& P = V.problem();
  auto a = simulate_tangent(rho0, sol.field, P.H, 0, P.particles, 1.0);
  auto b = simulate_tangent(rho0, sol.field, P.H, 0, P.particles, 2.0);
  for (std::size_t r = 0; r < a.values.size(); ++r)
    for (std::size_t i = 0; i < a.values[r].size(); ++i) ASSERT_EQ(2.0 * a.values[r][i], b.values[r][i]);
  EXPECT_EQ(a.values.front()[0], 1.0);
}

TEST(LionsRep, MeanLinearReturnsCoefficient) {
  ValueFunction V(problem(CouplingSpec::mean_linear(zero, zero, 0.7), 1.0, 2000), 1, 0);
  auto mu = EmpiricalMeasure::uniform({-0.5, 0.5});
  auto r = lions_derivative_rep(V, 0.3, mu, 0.5);
  EXPECT_NEAR(r.value, 0.7, 1e-10);
  EXPECT_NEAR(r.oracle, 0.7, 1e-9);
  EXPECT_EQ(r.method, "tangent");
}

TEST(LionsRep, ZeroData) {
  ValueFunction V(problem(CouplingSpec::zero(), 1.0, 500), 1, 0);
  auto r = lions_derivative_rep(V, 0.0, EmpiricalMeasure::dirac(0.0), 0.0);
  EXPECT_EQ(r.value, 0.0);
}

TEST(LionsRep, QuadraticAgreesWithFiniteDifference) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1, 20000), 1, 0);
  auto mu = EmpiricalMeasure::uniform({-0.4, 0.1, 0.6});
  for (double x : {-1.0, 1.0}) {
    auto r = lions_derivative_rep(V, x, mu, 0.6);
    EXPECT_LE(r.rel_err, 0.02) << x << " value " << r.value << " oracle " << r.oracle;
  }
}

TEST(LionsRep, UnsupportedFamily) {
  ValueFunction V(problem(CouplingSpec::abs_deviation(), 1.0, 500), 1, 0);
  try {
    lions_derivative_rep(V, 0.0, EmpiricalMeasure::dirac(0.0), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "family");
  }
}

TEST(Gateaux, SmoothCouplingHasEqualSides) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1, 2000), 1, 0);
  auto mu = quantize(DistributionSpec::gaussian(0.0, 1.0), 2000);
  auto g = gateaux_probe(V, 0.5, mu);
  EXPECT_NEAR(g.right_slope, g.left_slope, 1e-6);
}

TEST(Gateaux, NonsmoothValueHasOneSidedSlopes) {
  ValueFunction V(problem(CouplingSpec::abs_deviation(), 1.0, 20000), 1, 0);
  auto mu = quantize(DistributionSpec::gaussian(0.0, 1.0), 20000);
  auto g = gateaux_probe(V, 0.0, mu);
  const double s = 1.0 / std::sqrt(std::numbers::pi);
  EXPECT_NEAR(g.right_slope, s, 0.05);
  EXPECT_NEAR(g.left_slope, -s, 0.05);
}
