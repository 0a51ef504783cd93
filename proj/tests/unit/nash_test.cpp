#include <gtest/gtest.h>

#include <cmath>

#include "mflab/error.hpp"
#include "mflab/nash.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(x)); }

SpaceTimeGrid grid_to(double T) {
  SpaceTimeGrid g;
  g.t1 = T;
  return g;
}

// closed-form coefficients of the symmetric solution: b = -2a, c = a, e = 0
double lq_a(int N, double s) { return 1.0 / (1.0 - 2.0 * (1.0 + 2.0 / (N - 1)) * s); }
double lq_k(int N, double s) {
  const double n1 = N - 1, kap = 1.0 + 2.0 / n1;
  return -(1.0 + 1.0 / n1) / (2.0 * kap) * std::log(1.0 - 2.0 * kap * s);
}

}  // namespace

TEST(NashSeparable, ZeroTerminalIsLinearInOthers) {
  auto o = nash_separable(5, [](double) { return 0.0; }, 2.0, grid_to(0.5));
  std::vector<double> x = {0.3, -1.0, 0.5, 2.0, 0.25};
  EXPECT_NEAR(o.value(0.0, x, 0), 2.0 / 4 * (-1.0 + 0.5 + 2.0 + 0.25), 1e-9);
  EXPECT_NEAR(o.grad(0.0, x, 2), 0.0, 1e-12);
  EXPECT_LT(o.residual, 1e-9);
}

TEST(NashSeparable, TwoPlayersSeeTheCoefficient) {
  auto o = nash_separable(2, [](double) { return 0.0; }, 1.5, grid_to(1.0));
  std::vector<double> a = {0.2, 0.0}, b = {0.2, 1.0};
  EXPECT_NEAR(o.value(0.0, b, 0) - o.value(0.0, a, 0), 1.5, 1e-9);
}

TEST(NashSeparable, OwnPartIsColeHopf) {
  auto o = nash_separable(3, logistic, 0.0, grid_to(1.0));
  for (double x : {-1.0, 0.0, 1.2})
    EXPECT_NEAR(o.value(0.0, {x, 0.0, 0.0}, 0), oracle::cole_hopf(logistic, x, 1.0), 2e-3) << x;
  EXPECT_LE(o.residual, o.tol);
}

TEST(NashSeparable, ResidualGateHolds) {
  auto o = nash_separable(4, logistic, 1.0, grid_to(1.0));
  EXPECT_LE(o.residual, 5e-3);
}

TEST(NashSeparable, RejectsSinglePlayer) {
  EXPECT_THROW(nash_separable(1, logistic, 1.0, grid_to(1.0)), Error);
}

TEST(LqCoefficientsTest, TerminalValues) {
  auto L = lq_coefficients(3, 0.1);
  EXPECT_EQ(L.a.back(), 1.0);
  EXPECT_EQ(L.b.back(), -2.0);
  EXPECT_EQ(L.c.back(), 1.0);
  EXPECT_EQ(L.e.back(), 0.0);
  EXPECT_EQ(L.k.back(), 0.0);
}

TEST(LqCoefficientsTest, MatchClosedForm) {
  for (int N : {2, 5, 40}) {
    auto L = lq_coefficients(N, 0.1);
    const double s = 0.1;
    EXPECT_NEAR(L.a.front(), lq_a(N, s), 1e-10) << N;
    EXPECT_NEAR(L.b.front(), -2 * lq_a(N, s), 1e-10) << N;
    EXPECT_NEAR(L.c.front(), lq_a(N, s), 1e-10) << N;
    EXPECT_NEAR(L.e.front(), 0.0, 1e-14) << N;
    EXPECT_NEAR(L.k.front(), lq_k(N, s), 1e-10) << N;
  }
}

TEST(LqCoefficientsTest, TwoPlayersBlowUp) {
  // a' = -6a^2 for N = 2 diverges at T - t = 1/6
  EXPECT_THROW(lq_coefficients(2, 0.2), Error);
}

TEST(NashLq, ResidualIsTiny) {
  for (int N : {2, 7}) {
    auto o = nash_lq(N, 0.1);
    EXPECT_LT(o.residual, 1e-6) << N;
  }
}

TEST(NashLq, TwoPlayersMatchGridSolve) {
  auto o = nash_lq(2, 0.1);
  auto G = two_player_grid(0.1);
  for (auto [x1, x2] : {std::pair{0.0, 0.0}, {0.5, -0.3}, {-1.0, 0.7}, {1.5, 1.0}})
    EXPECT_NEAR(o.value(0.0, {x1, x2}, 0), G.value(x1, x2), 5e-3) << x1 << " " << x2;
}

TEST(NashLq, SymmetricInPlayers) {
  auto o = nash_lq(3, 0.1);
  std::vector<double> x = {0.1, -0.4, 0.9}, y = {-0.4, 0.1, 0.9};
  EXPECT_NEAR(o.value(0.0, x, 0), o.value(0.0, y, 1), 1e-14);
}

TEST(FitLogLog, ExactPowerLaw) {
  RateFit f;
  for (double N : {4.0, 8.0, 16.0, 32.0}) {
    f.N.push_back(N);
    f.stat.push_back(3.0 * std::pow(N, -0.5));
  }
  fit_loglog(f);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FitLogLog, FewPointsGiveNaN) {
  RateFit f;
  f.N = {1, 2, 3};
  f.stat = {1, 2, 3};
  fit_loglog(f);
  EXPECT_TRUE(std::isnan(f.slope));
}

TEST(FitLogLog, NonpositiveIsLogDomainError) {
  RateFit f;
  f.N = {1, 2, 3, 4};
  f.stat = {1, 0, 3, 4};
  try {
    fit_loglog(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "log-domain");
  }
}

TEST(EmpiricalRate, GaussianSquaredW1DecaysLikeOneOverN) {
  auto f = empirical_rate_experiment(DistributionSpec::gaussian(0.0, 1.0), {16, 32, 64, 128, 256}, 200, 0);
  EXPECT_NEAR(f.slope, -1.0, 0.2);
  EXPECT_GT(f.r2, 0.9);
}

TEST(EmpiricalRate, DiracIsExact) {
  auto f = empirical_rate_experiment(DistributionSpec::dirac(0.5), {4, 8, 16, 32}, 4, 0);
  for (double s : f.stat) EXPECT_EQ(s, 0.0);
  EXPECT_TRUE(std::isnan(f.slope));
}

TEST(Chaos, ZeroDataPathsCoincide) {
  ChaosOptions opt;
  opt.family = "separable";
  opt.Ns = {4, 8};
  opt.players_per_point = 64;
  opt.particles = 2000;
  auto r = chaos_experiment(opt, 0);
  for (double s : r.path.stat) EXPECT_EQ(s, 0.0);
  for (double s : r.flow.stat) EXPECT_GT(s, 0.0);
}

TEST(Chaos, LqPathGapShrinks) {
  ChaosOptions opt;
  opt.Ns = {4, 16, 64};
  opt.players_per_point = 1024;
  opt.particles = 4000;
  auto r = chaos_experiment(opt, 0);
  EXPECT_GT(r.path.stat[0], r.path.stat[2]);
}

TEST(NashRate, LqGapShrinks) {
  NashRateOptions opt;
  opt.Ns = {4, 8, 16, 32};
  opt.probes = 2;
  opt.particles = 4000;
  auto f = nash_convergence_experiment(opt, 0);
  EXPECT_GT(f.stat.front(), f.stat.back());
  EXPECT_LT(f.slope, -0.5);
}
