#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jmgt/analysis.hpp"
#include "jmgt/energy.hpp"

using namespace jmgt;
using namespace jmgt::energy;

namespace {

constexpr double kPi = std::numbers::pi;

Field cosine(const Grid& g) {
  return Field::from_function(g, [](const auto& x) { return std::cos(x[0]); });
}

// tau = 1, b = 1.5, c^2 = 1, mass 0.2: c_g^2 = 0.8.
struct Fixture {
  Grid grid{1, 32, 2 * kPi};
  SystemParams params;
  std::shared_ptr<const HistoryQuadrature> quad =
      make_quadrature(params.kernel, HistoryConfig{MemoryMode::dafermos, 128, 30.0});

  StateVector state(const Field& psi, const Field& v, const Field& w) const {
    return init_state(params, psi, v, w, MemoryMode::dafermos, quad);
  }
  // Zero psi keeps the history zero.
  StateVector only_v(const Field& v) const {
    const Field z(grid);
    StateVector s = state(z, z, z);
    s.v = v;
    return s;
  }
  StateVector random(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return analysis::random_domain_state(grid, quad, rng);
  }
};

}  // namespace

TEST(Energy, ZeroStateFunctionals) {
  Fixture f;
  const Field z(f.grid);
  const StateVector s = f.state(z, z, z);
  EXPECT_EQ(problem_norm(s, f.params, 2), 0.0);
  EXPECT_EQ(standard_norm(s, f.params, 2), 0.0);
  EXPECT_EQ(E1(s, f.params, 0), 0.0);
  EXPECT_EQ(E2(s, f.params, 0), 0.0);
  const auto F = cross_functionals(s, f.params, 0);
  EXPECT_EQ(F.F1, 0.0);
  EXPECT_EQ(F.F2, 0.0);
  EXPECT_EQ(lyapunov(s, f.params, 0, {}), 0.0);
  const auto S = script_functionals(s, f.params, 0);
  EXPECT_EQ(S.E, 0.0);
  EXPECT_EQ(S.D, 0.0);
  EXPECT_EQ(lambda_instant(s), 0.0);
}

TEST(Energy, ProblemNormSingleMode) {
  Fixture f;
  const StateVector s = f.only_v(cosine(f.grid));
  const double n = problem_norm(s, f.params, 1);
  EXPECT_NEAR(n * n, 0.8 * kPi + 0.7 * (kPi + kPi) + kPi, 1e-12);
}

TEST(Energy, ProblemInnerIsSymmetricAndBounded) {
  Fixture f;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const StateVector a = f.random(seed), b = f.random(seed + 100);
    const double ab = problem_inner(a, b, f.params, 2), ba = problem_inner(b, a, f.params, 2);
    EXPECT_NEAR(ab, ba, 1e-10 * std::abs(ab) + 1e-12);
    EXPECT_LE(std::abs(ab), problem_norm(a, f.params, 2) * problem_norm(b, f.params, 2) * (1 + 1e-12));
    const double aa = problem_inner(a, a, f.params, 2), na = problem_norm(a, f.params, 2);
    EXPECT_NEAR(aa, na * na, 1e-10 * aa);
  }
}

TEST(Energy, ProblemNormRejectsClosureAndBadOrder) {
  Fixture f;
  const Field z(f.grid);
  const StateVector c = init_state(f.params, z, z, z, HistoryConfig{MemoryMode::closure});
  EXPECT_THROW(problem_norm(c, f.params, 1), std::invalid_argument);
  EXPECT_THROW(problem_norm(f.state(z, z, z), f.params, 0), std::invalid_argument);
}

TEST(Energy, StandardNormGaugeInvariant) {
  Fixture f;
  Field c(f.grid), z(f.grid);
  c.fill(4.0);
  StateVector s = f.state(z, z, z);
  s.psi = c;
  EXPECT_NEAR(standard_norm(s, f.params, 2), 0.0, 1e-12);
}

TEST(Energy, StandardNormMatchesPhysicalAssembly) {
  Fixture f;
  const StateVector s = f.random(7);
  double sum = std::pow(l2_norm(s.v), 2) + std::pow(l2_norm(s.w), 2);
  sum += std::pow(l2_norm(gradient(s.psi)), 2) + std::pow(l2_norm(gradient(s.v)), 2) +
         std::pow(l2_norm(gradient(s.w)), 2);
  sum += std::pow(l2_norm(partials_tensor(s.psi, 2)), 2) +
         std::pow(l2_norm(partials_tensor(s.v, 2)), 2);
  for (int j : {1, 2}) sum += std::pow(history_weighted_norm(s, Weight::minus_dg, j), 2);
  EXPECT_NEAR(standard_norm(s, f.params, 2), std::sqrt(sum), 1e-10 * std::sqrt(sum));
}

TEST(Energy, FirstEnergySingleMode) {
  Fixture f;
  const StateVector s = f.only_v(cosine(f.grid));
  EXPECT_NEAR(E1(s, f.params, 0), 0.5 * (0.8 * kPi + 0.7 * kPi + kPi), 1e-12);
  // Unit frequency: every multiplier is one.
  EXPECT_NEAR(E2(s, f.params, 0), E1(s, f.params, 0), 1e-12);
}

TEST(Energy, FirstEnergyNonnegativeOnRandomStates) {
  Fixture f;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const StateVector s = f.random(seed);
    EXPECT_GE(E1(s, f.params, 0), 0.0);
    EXPECT_GE(E1(s, f.params, 1), 0.0);
  }
}

TEST(Energy, SecondEnergyIsFirstEnergyOneOrderUp) {
  Fixture f;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StateVector s = f.random(seed);
    for (int k : {0, 1}) {
      const double a = E2(s, f.params, k), b = E1(s, f.params, k + 1);
      EXPECT_NEAR(a, b, 1e-10 * std::abs(b));
    }
  }
}

TEST(Energy, CrossFunctionalsSingleMode) {
  Fixture f;
  const Field c = cosine(f.grid), z(f.grid);
  const auto F = cross_functionals(f.state(c, c, z), f.params, 0);
  EXPECT_NEAR(F.F1, 2 * kPi, 1e-12);
  EXPECT_NEAR(F.F2, -kPi, 1e-12);
}

TEST(Energy, CrossFunctionalsOrthogonalModes) {
  Fixture f;
  // psi + v on mode 1, v + w on mode 2.
  const Field c1 = cosine(f.grid);
  const Field c2 = Field::from_function(f.grid, [](const auto& x) { return std::cos(2 * x[0]); });
  const Field z(f.grid);
  const auto F = cross_functionals(f.state(c1, z, c2), f.params, 0);
  EXPECT_NEAR(F.F1, 0.0, 1e-12);
}

TEST(Energy, CrossFunctionalsLinearInEachSlot) {
  Fixture f;
  const StateVector s = f.random(11);
  StateVector t = s;
  // Negating w flips v + tau w only when v = 0; use the scaled state instead.
  scale(t, -1.0);
  const auto a = cross_functionals(s, f.params, 0), b = cross_functionals(t, f.params, 0);
  EXPECT_NEAR(a.F1, b.F1, 1e-12 * std::abs(a.F1) + 1e-14);
  StateVector u = f.only_v(Field(f.grid));
  u.psi = s.psi;
  u.w = s.w;
  StateVector un = u;
  un.w *= -1.0;
  // v = 0: F1 = (grad psi, grad tau w) is odd in w.
  EXPECT_NEAR(cross_functionals(u, f.params, 0).F1, -cross_functionals(un, f.params, 0).F1,
              1e-12 * std::abs(cross_functionals(u, f.params, 0).F1) + 1e-14);
}

TEST(Energy, LyapunovComposition) {
  Fixture f;
  const Field c = cosine(f.grid), z(f.grid);
  const StateVector s = f.state(c, c, z);
  const LyapunovWeights w{10.0, 1.0, 0.1};
  const double expect = 10.0 * (E1(s, f.params, 0) + E2(s, f.params, 0)) + 2 * kPi - kPi;
  EXPECT_NEAR(lyapunov(s, f.params, 0, w), expect, 1e-11);
  EXPECT_THROW(lyapunov(s, f.params, 0, {0.0, 1.0, 0.1}), std::invalid_argument);
}

TEST(Energy, ScriptFunctionalsSingleMode) {
  Fixture f;
  const StateVector s = f.only_v(cosine(f.grid));
  const auto S = script_functionals(s, f.params, 0);
  // psi + tau v, v + tau w and v are all cos x; w = 0, eta = 0.
  EXPECT_NEAR(S.E, 6 * kPi, 1e-12);
  EXPECT_NEAR(S.D, 4 * kPi, 1e-12);
}

TEST(Energy, ScriptFunctionalsBookkeeping) {
  Fixture f;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StateVector s = f.random(seed);
    const Snapshot snap(s, f.params);
    const auto S = script_functionals(snap, 0);
    const double pv1 = std::pow(homogeneous_norm(s.psi + s.v, 1.0), 2);
    const double vw0 = std::pow(l2_norm(s.v + s.w), 2);
    const double v1 = std::pow(homogeneous_norm(s.v, 1.0), 2);
    const double e1 = std::pow(history_weighted_norm(s, Weight::minus_dg, 1.0), 2);
    const double w0 = std::pow(l2_norm(s.w), 2);
    EXPECT_NEAR(S.E - S.D, pv1 + vw0, 1e-10 * S.E);
    EXPECT_LE(S.D, S.E + e1 + 1e-12);
    EXPECT_GE(S.D, v1 + e1 + w0 - 1e-10 * S.D);
  }
}

TEST(Energy, QuadraticHomogeneity) {
  Fixture f;
  const StateVector s = f.random(13);
  StateVector t = s;
  scale(t, 3.0);
  const auto ratio = [](double a, double b) { return b / a; };
  EXPECT_NEAR(ratio(E1(s, f.params, 0), E1(t, f.params, 0)), 9.0, 1e-10);
  EXPECT_NEAR(ratio(E2(s, f.params, 1), E2(t, f.params, 1)), 9.0, 1e-10);
  EXPECT_NEAR(ratio(script_functionals(s, f.params, 0).D, script_functionals(t, f.params, 0).D), 9.0,
              1e-10);
  const double n0 = problem_norm(s, f.params, 2), n1 = problem_norm(t, f.params, 2);
  EXPECT_NEAR(n1 * n1 / (n0 * n0), 9.0, 1e-10);
}

TEST(Energy, NormEquivalenceConstantsStable) {
  Fixture f;
  const HistoryConfig h{MemoryMode::dafermos, 64, 30.0};
  const auto a = analysis::norm_equivalence(f.params, Grid(1, 16, 2 * kPi), h, 2, 200, 5);
  const auto b = analysis::norm_equivalence(f.params, Grid(1, 16, 2 * kPi), h, 2, 400, 5);
  EXPECT_GT(a.C1, 0.0);
  EXPECT_LE(a.C1, a.C2);
  EXPECT_NEAR(b.C1 / a.C1, 1.0, 0.1);
  EXPECT_NEAR(b.C2 / a.C2, 1.0, 0.1);
}

TEST(Energy, LambdaOfFrozenMode) {
  const Grid g(2, 16, 2 * kPi);
  const SystemParams p;
  const Field c = cosine(g), z(g);
  StateVector s = init_state(p, z, z, z, HistoryConfig{MemoryMode::closure});
  s.v = c;
  // |v|_inf + |grad v|_inf = 2, plus ||v|| + ||grad v|| with ||cos x||^2 = 2 pi^2.
  EXPECT_NEAR(lambda_instant(s), 2.0 + 2.0 * std::sqrt(2.0) * kPi, 1e-10);
}

TEST(Energy, TrajectoryNormsOfConstantSeries) {
  EnergyReport rep;
  rep.p = 1;
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    Sample s;
    s.t = t;
    s.order.resize(2);
    s.order[0].scriptE = 3.0;
    s.order[0].scriptD = 1.5;
    s.order[1].scriptE = 1.0;
    s.order[1].scriptD = 0.25;
    rep.samples.push_back(s);
  }
  const auto tn = trajectory_norms(rep, 1);
  EXPECT_DOUBLE_EQ(tn.E.back(), 4.0);
  EXPECT_DOUBLE_EQ(tn.D.back(), 2.0 * 1.75);
  EXPECT_DOUBLE_EQ(trajectory_norms(rep, 0).D.back(), 3.0);
  EXPECT_THROW(trajectory_norms(rep, 2), std::invalid_argument);
  EXPECT_THROW(trajectory_norms(EnergyReport{}, 0), std::invalid_argument);
}

TEST(Energy, TrajectoryNormsOfZeroAndDecayingRuns) {
  Fixture f;
  const Field z(f.grid);
  Recorder zero(f.params, 1, false);
  simulate(f.state(z, z, z), f.params, RhsConfig{}, 1.0, 1e-2, zero.observer(), 10);
  const auto tz = trajectory_norms(zero.report(), 1);
  EXPECT_EQ(tz.E.back(), 0.0);
  EXPECT_EQ(tz.D.back(), 0.0);
  EXPECT_EQ(lambda_sup(zero.report(), 1.0), 0.0);

  Recorder rec(f.params, 1, false);
  simulate(f.state(cosine(f.grid), z, z), f.params, RhsConfig{}, 10.0, 1e-2, rec.observer(), 10);
  const auto tn = trajectory_norms(rec.report(), 1);
  for (std::size_t i = 1; i < tn.E.size(); ++i) {
    EXPECT_GE(tn.E[i], tn.E[i - 1]);
    EXPECT_GE(tn.D[i], tn.D[i - 1]);
  }
  double prev = 0.0;
  for (const auto& s : rec.report().samples) {
    const double l = lambda_sup(rec.report(), s.t);
    EXPECT_GE(l, prev);
    prev = l;
  }
}
