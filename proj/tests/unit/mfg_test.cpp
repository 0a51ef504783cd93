#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mflab/error.hpp"
#include "mflab/mfg.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

double g2(double x) { return 1.0 / (1.0 + std::exp(x)); }
double dg2(double x) { return -std::exp(x) / ((1.0 + std::exp(x)) * (1.0 + std::exp(x))); }

MfgProblem problem(CouplingSpec c, double T, int particles = 4000) {
  MfgProblem p;
  p.coupling = std::move(c);
  p.T = T;
  p.particles.particles = particles;
  return p;
}

GridField constant_drift(double b, double T = 1.0, int steps = 100) {
  GridField f;
  f.grid.t1 = T;
  for (int r = 0; r <= steps; ++r) {
    f.times.push_back(T * r / steps);
    f.u.emplace_back(f.grid.nx, 0.0);
    f.du.emplace_back(f.grid.nx, b);
    f.ddu.emplace_back(f.grid.nx, 0.0);
  }
  return f;
}

// V for G = (x - m)^2, F = 0: A(t)(x - m)^2 - ln(1 - 2(T - t))/2
double quadratic_value(double t, double x, double m, double T) {
  double s = T - t;
  return (x - m) * (x - m) / (1 - 2 * s) - 0.5 * std::log(1 - 2 * s);
}

}  // namespace

TEST(AllocateParticles, KeepsParticleMeasures) {
  auto mu = EmpiricalMeasure::uniform({3.0, -1.0, 2.0, 0.5});
  auto p = allocate_particles(mu, 4);
  EXPECT_EQ(p.positions(), mu.positions());
}

TEST(AllocateParticles, QuantilesOfAtoms) {
  auto mu = EmpiricalMeasure({1.0, 0.0}, {0.25, 0.75});
  auto p = allocate_particles(mu, 8);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(p.x(i), 0.0);
  for (int i = 6; i < 8; ++i) EXPECT_EQ(p.x(i), 1.0);
  EXPECT_DOUBLE_EQ(mean(p), 0.25);
}

TEST(ForwardFlow, BrownianSecondMoment) {
  const int P = 20000;
  auto flow = forward_flow(allocate_particles(EmpiricalMeasure::dirac(0.0), P),
                           constant_drift(0.0), HamiltonianSpec::quadratic(), 7);
  ASSERT_EQ(flow.measures.size(), 101u);
  for (std::size_t r : {10u, 50u, 100u}) {
    const double t = flow.times[r];
    const auto& m = flow.measures[r];
    ASSERT_EQ(m.size(), std::size_t(P));
    // Var(X^2) = 2 t^2
    EXPECT_NEAR(functional(m, Functional::SecondMoment), t, 3 * t * std::sqrt(2.0 / P));
    EXPECT_EQ(mean(m), 0.0);  // antithetic pairs cancel exactly
    double tot = 0.0;
    for (double w : m.weights()) tot += w;
    EXPECT_NEAR(tot, 1.0, 1e-12);
  }
}

TEST(ForwardFlow, ConstantDriftShiftsMean) {
  auto flow = forward_flow(allocate_particles(EmpiricalMeasure::dirac(0.0), 2000),
                           constant_drift(1.0), HamiltonianSpec::quadratic(), 3);
  for (std::size_t r = 0; r < flow.times.size(); r += 25)
    EXPECT_NEAR(mean(flow.measures[r]), flow.times[r], 1e-12);
}

TEST(ForwardFlow, IndependentNoiseWithoutAntithetic) {
  ParticleOptions o;
  o.antithetic = false;
  const int P = 20000;
  auto flow = forward_flow(allocate_particles(EmpiricalMeasure::dirac(0.0), P),
                           constant_drift(0.0), HamiltonianSpec::quadratic(), 11, o);
  EXPECT_NE(mean(flow.back()), 0.0);
  EXPECT_NEAR(mean(flow.back()), 0.0, 3.0 / std::sqrt(P));
}

TEST(ForwardFlow, EscapeIsReported) {
  try {
    forward_flow(EmpiricalMeasure::dirac(0.0), constant_drift(30.0),
                 HamiltonianSpec::quadratic(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "domain");
  }
}

TEST(ForwardFlow, SharedNoiseAcrossSplitIntervals) {
  // flows over [0, 1] and [0, .5] then [.5, 1] see the same increments
  auto mu = allocate_particles(EmpiricalMeasure::dirac(0.0), 100);
  auto whole = forward_flow(mu, constant_drift(0.0), HamiltonianSpec::quadratic(), 5);
  auto first = forward_flow(mu, constant_drift(0.0, 0.5, 50), HamiltonianSpec::quadratic(), 5);
  GridField tail = constant_drift(0.0, 0.5, 50);
  for (auto& t : tail.times) t += 0.5;
  auto second = forward_flow(first.back(), tail, HamiltonianSpec::quadratic(), 5);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(second.back().x(i), whole.back().x(i), 1e-12);
}

TEST(PicardLocal, ZeroDataIsBrownian) {
  auto p = problem(CouplingSpec::zero(), 1.0);
  auto sol = picard_local(p, EmpiricalMeasure::dirac(0.0), 0.0, 1.0, 1);
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_EQ(sol.field.max_abs_du(), 0.0);
  EXPECT_EQ(sol.field.u[0][400], 0.0);
  EXPECT_NEAR(functional(sol.flow.back(), Functional::SecondMoment), 1.0, 3 * std::sqrt(2.0 / 4000));
}

TEST(PicardLocal, AbsDeviationHasNoGradient) {
  auto p = problem(CouplingSpec::abs_deviation(), 1.0, 20000);
  auto sol = picard_local(p, EmpiricalMeasure::dirac(0.0), 0.0, 1.0, 0);
  EXPECT_LE(sol.report.iterations, 2);
  EXPECT_EQ(sol.field.max_abs_du(), 0.0);
  const double ref = (2.0 - std::sqrt(2.0)) / std::sqrt(std::numbers::pi);
  // standard error of E|B_1| with 20k particles is about 0.0043
  EXPECT_NEAR(sol.field.u_at(0, 0.0), ref, 0.02);
}

TEST(PicardLocal, MeanLinearIsFlatInX) {
  auto p = problem(CouplingSpec::mean_linear([](double) { return 0.0; },
                                             [](double) { return 0.0; }, 2.0),
                   1.0);
  auto sol = picard_local(p, EmpiricalMeasure::uniform({-0.5, 1.5}), 0.0, 1.0, 2);
  EXPECT_LE(sol.field.max_abs_du(), 1e-12);
  EXPECT_NEAR(sol.field.u_at(0, 0.3), 2.0 * 0.5, 1e-12);
}

TEST(PicardLocal, QuadraticContractsFast) {
  auto p = problem(CouplingSpec::quadratic(), 0.1);
  auto sol = picard_local(p, EmpiricalMeasure::uniform({-0.4, 0.2, 0.5}), 0.0, 0.1, 4);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_LE(sol.report.iterations, 3);
  const double m = 0.1;
  for (double x : {-1.0, 0.0, 0.7})
    EXPECT_NEAR(sol.field.u_at(0, x), quadratic_value(0.0, x, m, 0.1), 2e-3) << x;
}

TEST(PicardLocal, NonContractionCarriesHistory) {
  auto p = problem(CouplingSpec::quadratic(), 0.1);
  p.picard.max_iter = 1;
  p.picard.tol = 1e-300;
  try {
    picard_local(p, EmpiricalMeasure::uniform({-0.4, 0.5}), 0.0, 0.1, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-contraction");
    EXPECT_NE(std::string(e.what()).find("gaps ["), std::string::npos);
    EXPECT_TRUE(e.numerical());
  }
}

TEST(ValueFunction, TerminalIsExact) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1), 2, 0);
  auto mu = EmpiricalMeasure::uniform({-0.3, 0.9});
  for (double x : {-1.234, 0.0, 2.5})
    EXPECT_EQ(V.value(0.1, x, mu), CouplingSpec::quadratic().G(x, mu));
}

TEST(ValueFunction, QuadraticMatchesClosedForm) {
  for (int K : {1, 2}) {
    ValueFunction V(problem(CouplingSpec::quadratic(), 0.1), K, 1);
    auto mu = EmpiricalMeasure::uniform({-0.2, 0.6});
    for (double t : {0.0, 0.05})
      for (double x : {-1.0, 0.2, 1.0})
        EXPECT_NEAR(V.value(t, x, mu), quadratic_value(t, x, 0.2, 0.1), 3e-3) << K << " " << t << " " << x;
    EXPECT_NEAR(V.grad_x(0.0, 1.0, mu), 2.0 * 0.8 / (1 - 0.2), 5e-3);
  }
}

TEST(ValueFunction, StitchingMatchesDirectSolve) {
  auto p = problem(CouplingSpec::mean_linear(g2, dg2, 1.0), 1.0);
  ValueFunction V1(p, 1, 9), V2(p, 2, 9);
  auto mu = EmpiricalMeasure::uniform({-0.5, 0.5});
  for (double x : {-1.0, 0.0, 1.0}) EXPECT_NEAR(V1.value(0, x, mu), V2.value(0, x, mu), 2e-3) << x;
  EXPECT_GE(V2.memo_size(), 2u);
}

TEST(ValueFunction, ComparisonExample) {
  auto zero = [](double) { return 0.0; };
  const double C0 = 20.0;
  ValueFunction V1(problem(CouplingSpec::mean_linear(zero, zero, C0), 1.0), 1, 0);
  ValueFunction V2(problem(CouplingSpec::mean_linear(g2, dg2, C0), 1.0), 1, 0);
  auto d0 = EmpiricalMeasure::dirac(0.0);
  EXPECT_EQ(V1.value(0, 0, d0), 0.0);
  const double u2 = oracle::cole_hopf(g2, 0.0, 1.0);
  auto sol = V2.solve_from(0.0, d0);
  const double v2 = V2.value(0, 0, d0);
  EXPECT_NEAR(v2, u2 + C0 * mean(sol.flow.back()), 1e-3);
  EXPECT_LT(mean(sol.flow.back()), 0.0);
  EXPECT_LT(v2, 0.0);
}

TEST(ValueFunction, MemoReusesStartRows) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1), 1, 0);
  auto mu = EmpiricalMeasure::uniform({0.1, 0.3});
  double a = V.value(0.0, 0.2, mu);
  auto n = V.memo_size();
  double b = V.value(0.0, 0.2, mu);
  EXPECT_EQ(a, b);
  EXPECT_EQ(V.memo_size(), n);
}

TEST(ValueFunction, HalvingStillReportsFailure) {
  auto p = problem(CouplingSpec::quadratic(), 0.1, 1000);
  p.picard.max_iter = 1;
  p.picard.tol = 1e-300;
  p.picard.max_halvings = 1;
  ValueFunction V(p, 1, 0);
  try {
    V.value(0.0, 0.0, EmpiricalMeasure::dirac(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-contraction");
    EXPECT_NE(std::string(e.what()).find("interval [0, 0.1]"), std::string::npos);
  }
}

TEST(ValueFunction, RejectsCommonNoise) {
  auto p = problem(CouplingSpec::zero(), 1.0);
  p.beta = 0.5;
  EXPECT_THROW(ValueFunction(p, 1, 0), Error);
}

TEST(Monotonicity, QuadraticPairingIdentity) {
  auto G = CouplingSpec::quadratic().G;
  auto mu1 = EmpiricalMeasure::uniform({-1.0, 0.3, 2.0});
  auto mu2 = EmpiricalMeasure({0.5, -0.7}, {0.4, 0.6});
  const double dm = mean(mu1) - mean(mu2);
  EXPECT_NEAR(monotonicity_pairing(G, mu1, mu2), -2 * dm * dm, 1e-14);
}

TEST(Monotonicity, MeasureFreeFunctionalPairsToZero) {
  auto Phi = [](double x, const EmpiricalMeasure&) { return std::sin(x); };
  EXPECT_EQ(monotonicity_pairing(Phi, EmpiricalMeasure::dirac(1.0), EmpiricalMeasure::dirac(-2.0)), 0.0);
}

TEST(Monotonicity, ValuePairingOfQuadraticData) {
  ValueFunction V(problem(CouplingSpec::quadratic(), 0.1), 1, 0);
  auto mu1 = EmpiricalMeasure::uniform({-0.5, 0.1});
  auto mu2 = EmpiricalMeasure::uniform({0.4, 0.8});
  const double dm = mean(mu1) - mean(mu2);
  const double A0 = 1.0 / (1 - 0.2);
  EXPECT_NEAR(value_pairing(V, 0.0, mu1, mu2), -2 * A0 * dm * dm, 5e-3);
}

TEST(Regularity, ZeroDataGivesZeroRatios) {
  ValueFunction V(problem(CouplingSpec::zero(), 0.1, 1000), 1, 0);
  RegularityOptions o;
  o.eps = {};
  auto r = regularity_probes(V, 0, o);
  EXPECT_EQ(r.lip_x, 0.0);
  EXPECT_EQ(r.lip_mu, 0.0);
  EXPECT_EQ(r.holder_t, 0.0);
}

TEST(Regularity, QuadraticRatiosStableUnderRefinement) {
  RegularityOptions o;
  o.eps = {1e-3, 1e-2, 1e-1};
  ValueFunction V1(problem(CouplingSpec::quadratic(), 0.1, 2000), 1, 0);
  ValueFunction V2(problem(CouplingSpec::quadratic(), 0.1, 2000), 2, 0);
  auto a = regularity_probes(V1, 3, o), b = regularity_probes(V2, 3, o);
  EXPECT_GT(a.lip_x, 1.0);
  EXPECT_NEAR(b.lip_x / a.lip_x, 1.0, 0.1);
  EXPECT_NEAR(b.lip_mu / a.lip_mu, 1.0, 0.1);
  EXPECT_NEAR(b.holder_t / a.holder_t, 1.0, 0.1);
  EXPECT_TRUE(a.under_envelope);
  // smooth data: sup |dV| is linear in eps
  EXPECT_NEAR(a.stability_slope, 1.0, 0.05);
}

TEST(GoodSolution, ZeroDataHasNoGap) {
  auto r = good_solution_consistency(problem(CouplingSpec::zero(), 0.2, 1000), {4, 8},
                                     {0.0, 1.0}, {EmpiricalMeasure::dirac(0.0)}, 0);
  // only the constant of the mollified Hamiltonian remains
  ASSERT_EQ(r.gap.size(), 2u);
  EXPECT_GT(r.gap[0], r.gap[1]);
  EXPECT_LT(r.gap[1], 1e-3);
}

TEST(GoodSolution, UnsupportedFamilyThrows) {
  MollifierParams mp;
  try {
    mollify_problem(problem(CouplingSpec::quadratic(), 0.1), mp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "family");
  }
}

TEST(GoodSolution, SmoothDataGapShrinks) {
  auto p = problem(CouplingSpec::mean_linear(g2, dg2, 1.0), 0.2, 1000);
  auto r = good_solution_consistency(p, {4, 8, 16}, {-1.0, 0.0, 1.0},
                                     {EmpiricalMeasure::uniform({-0.3, 0.4})}, 0);
  for (std::size_t k = 0; k < r.gap.size(); ++k) EXPECT_LT(r.gap[k], 2.0 / r.n[k]);
  EXPECT_GT(r.gap[0], r.gap[2]);
}
