#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jmgt/analysis.hpp"

using namespace jmgt;
namespace an = jmgt::analysis;

namespace {

constexpr double kPi = std::numbers::pi;

Field cosine(const Grid& g, double a = 1.0) {
  return Field::from_function(g, [&](const auto& x) { return a * std::cos(x[0]); });
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

energy::EnergyReport run(const SystemParams& p, const StateVector& y0, double T, double dt,
                         MemoryMode mode) {
  energy::Recorder rec(p, 1, false);
  simulate(y0, p, RhsConfig{mode}, T, dt, rec.observer(), 5);
  return rec.report();
}

}  // namespace

TEST(Analysis, StraussExamples) {
  const auto a = an::strauss_bound(0.1, 1.0, 2.0);
  EXPECT_TRUE(a.feasible);
  EXPECT_NEAR(a.threshold, 0.25, 1e-15);
  EXPECT_NEAR(a.bound, 0.2, 1e-15);

  EXPECT_FALSE(an::strauss_bound(0.25, 1.0, 2.0).feasible);

  const auto c = an::strauss_bound(0.1, 1.0, 1.5);
  EXPECT_NEAR(c.threshold, 4.0 / 27.0, 1e-15);
  EXPECT_NEAR(c.lhs, 0.1, 1e-15);
  EXPECT_TRUE(c.feasible);
  EXPECT_NEAR(c.bound, 0.3, 1e-15);
  EXPECT_FALSE(an::strauss_bound(0.1, 1.3, 1.5).feasible);  // 0.169 > 4/27
}

TEST(Analysis, StraussMonotone) {
  for (double kappa : {1.5, 2.0, 3.0}) {
    bool seen_infeasible = false;
    for (double c1 = 0.01; c1 < 1.0; c1 += 0.01) {
      const bool f = an::strauss_bound(c1, 0.8, kappa).feasible;
      if (seen_infeasible) EXPECT_FALSE(f);
      seen_infeasible = seen_infeasible || !f;
    }
    seen_infeasible = false;
    for (double c2 = 0.01; c2 < 5.0; c2 += 0.05) {
      const bool f = an::strauss_bound(0.1, c2, kappa).feasible;
      if (seen_infeasible) EXPECT_FALSE(f);
      seen_infeasible = seen_infeasible || !f;
    }
  }
}

TEST(Analysis, FitDecay) {
  std::vector<double> t, e, c;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    e.push_back(std::exp(-t.back()));
    c.push_back(2.5);
  }
  EXPECT_NEAR(an::fit_decay(t, e).rate, 1.0, 1e-8);
  EXPECT_NEAR(an::fit_decay(t, e).r2, 1.0, 1e-10);
  EXPECT_NEAR(an::fit_decay(t, c).rate, 0.0, 1e-14);
}

TEST(Analysis, DissipationOfZeroTrajectory) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  const auto rep = run(p, init_state(p, z, z, z, HistoryConfig{}), 1.0, 1e-2, MemoryMode::dafermos);
  for (auto c : {an::Check::E1, an::Check::E2, an::Check::W}) {
    const auto v = an::verify_dissipation(rep, c);
    EXPECT_TRUE(v.pass) << an::to_string(c);
    EXPECT_EQ(v.violation, 0.0);
  }
}

TEST(Analysis, DissipationSubcriticalPassesSupercriticalFails) {
  const Grid g(1, 32, 2 * kPi);
  SystemParams p;
  const Field z(g);
  const StateVector y0 = init_state(p, cosine(g), z, z, HistoryConfig{});
  const auto rep = run(p, y0, 30.0, 1e-2, MemoryMode::dafermos);
  const auto ok = an::verify_dissipation(rep, an::Check::E1);
  EXPECT_TRUE(ok.pass) << ok.reason;
  EXPECT_LE(ok.violation, 1e-6 * rep.samples.front().order[0].E1);
  std::vector<double> t, e;
  for (const auto& s : rep.samples) {
    t.push_back(s.t);
    e.push_back(s.order[0].E1);
  }
  const auto fit = an::fit_decay(t, e);
  EXPECT_GT(fit.rate, 0.0);
  EXPECT_GT(fit.r2, 0.99);

  p.b = 0.9;
  const StateVector y1 = init_state(p, cosine(g), z, z, HistoryConfig{});
  const auto bad = an::verify_dissipation(run(p, y1, 10.0, 1e-2, MemoryMode::dafermos), an::Check::E1);
  EXPECT_FALSE(bad.pass);
  EXPECT_LT(bad.coefficient, 0.0);
}

TEST(Analysis, GeneratorOfZeroState) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  const StateVector s = init_state(p, z, z, z, HistoryConfig{});
  const StateVector a = an::apply_generator(an::resolve_jump(s), p);
  EXPECT_EQ(max_norm(a.psi) + max_norm(a.v) + max_norm(a.w), 0.0);
}

TEST(Analysis, GeneratorDissipative) {
  const SystemParams p;
  const auto r = an::generator_dissipativity(p, Grid(1, 16, 2 * kPi),
                                             HistoryConfig{MemoryMode::dafermos, 128, 30.0}, 2, 200, 9);
  EXPECT_EQ(r.samples, 200);
  EXPECT_LE(r.worst_ratio, 1e-8);
}

TEST(Analysis, EllipticSingleMode) {
  const Grid g(1, 32, 2 * kPi);
  const Field v = an::solve_elliptic(2.0, 3.0, cosine(g));
  EXPECT_LT(max_diff(v, cosine(g, 0.2)), 1e-14);
}

TEST(Analysis, ResolventOfZero) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  const StateVector F = an::resolve_jump(init_state(p, z, z, z, HistoryConfig{}));
  const StateVector psi = an::resolvent_solve(p, F);
  EXPECT_EQ(max_norm(psi.psi) + max_norm(psi.v) + max_norm(psi.w), 0.0);
}

TEST(Analysis, ResolventResidual) {
  const Grid g(1, 32, 2 * kPi);
  const SystemParams p;
  const auto quad = make_quadrature(p.kernel, HistoryConfig{MemoryMode::dafermos, 128, 30.0});
  std::mt19937_64 rng(17);
  for (int i = 0; i < 5; ++i) {
    const StateVector F = an::random_domain_state(g, quad, rng);
    const StateVector psi = an::resolvent_solve(p, F);
    EXPECT_LE(an::resolvent_residual(p, psi, F, 2), 1e-10);
  }
}

TEST(Analysis, PicardZeroData) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  const auto r = an::picard_solve(p, init_state(p, z, z, z, HistoryConfig{}), an::PicardOptions{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.differences.front(), 0.0);
  EXPECT_EQ(max_norm(r.final_state->psi), 0.0);
}

TEST(Analysis, PicardContractionGrowsWithHorizon) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field a = cosine(g, 0.05), z(g);
  const StateVector y0 = init_state(p, a, a, z, HistoryConfig{MemoryMode::dafermos, 64, 30.0});
  an::PicardOptions o;
  o.dt = 5e-3;
  o.T = 0.1;
  const auto r1 = an::picard_solve(p, y0, o);
  o.T = 0.4;
  const auto r2 = an::picard_solve(p, y0, o);
  ASSERT_TRUE(r1.converged);
  ASSERT_TRUE(r2.converged);
  EXPECT_LT(r1.q, 1.0);
  EXPECT_LT(r2.q, 1.0);
  EXPECT_GT(r2.q, r1.q);

  // Fixed point against the direct nonlinear run.
  StateVector y = y0;
  const RhsConfig cfg{MemoryMode::dafermos, true};
  for (int i = 0; i < 80; ++i) y = step(y, p, cfg, o.dt, i * o.dt);
  const double gap = l2_norm(y.psi - r2.final_state->psi) / l2_norm(y.psi);
  EXPECT_LT(gap, 1e-5);
}

TEST(Analysis, CommutatorWithConstantVanishes) {
  const Grid g(2, 16, 2 * kPi);
  Field f(g);
  f.fill(3.0);
  std::mt19937_64 rng(3);
  const Field h = an::random_field(g, rng, 3);
  for (int k : {1, 2}) EXPECT_LT(max_norm(an::commutator(f, h, k)), 1e-11);
}

TEST(Analysis, CommutatorSingleMode) {
  const Grid g(1, 32, 2 * kPi);
  const Field c = cosine(g);
  const Field s = Field::from_function(g, [](const auto& x) { return std::sin(x[0]); });
  // [d, cos] cos = -sin cos; [d^2, cos] cos = d^2(cos^2) - cos d^2 cos = -2 cos 2x + cos^2
  const auto c1 = an::commutator(c, c, 1);
  EXPECT_LT(max_diff(c1[0], -1.0 * hadamard(s, c)), 1e-12);
  const Field c2x = Field::from_function(g, [](const auto& x) { return std::cos(2 * x[0]); });
  const auto c2 = an::commutator(c, c, 2);
  EXPECT_LT(max_diff(c2[0], -2.0 * c2x + hadamard(c, c)), 1e-11);
}

TEST(Analysis, CommutatorProbeStableUnderRefinement) {
  const auto a = an::commutator_probe(Grid(1, 32, 2 * kPi), 1, 200, 4);
  const auto b = an::commutator_probe(Grid(1, 64, 2 * kPi), 1, 200, 4);
  EXPECT_TRUE(std::isfinite(a.commutator_ratio));
  EXPECT_GT(a.commutator_ratio, 0.0);
  EXPECT_NEAR(b.commutator_ratio / a.commutator_ratio, 1.0, 0.2);
  EXPECT_NEAR(b.product_ratio / a.product_ratio, 1.0, 0.2);
}

TEST(Analysis, RandomFieldIndependentOfResolution) {
  const Grid g1(1, 16, 2 * kPi), g2(1, 64, 2 * kPi);
  std::mt19937_64 r1(42), r2(42);
  const Field a = an::random_field(g1, r1, 3), b = an::random_field(g2, r2, 3);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(a[i], b[4 * i], 1e-12);
}

TEST(Analysis, GlobalBoundAtZeroEnergy) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  an::GlobalBoundOptions o;
  o.T = 2.0;
  o.hist = HistoryConfig{MemoryMode::dafermos, 64, 30.0};
  const auto r = an::global_bound_experiment(p, cosine(g), z, z, 0.0, o);
  EXPECT_EQ(r.verdict, "bounded");
  EXPECT_EQ(r.max_norm, 0.0);
}

TEST(Analysis, GlobalBoundSmallDataRefinementInvariant) {
  const SystemParams p;
  an::GlobalBoundOptions o;
  o.T = 10.0;
  o.hist = HistoryConfig{MemoryMode::dafermos, 64, 30.0};
  std::string verdicts[2];
  int i = 0;
  for (int n : {16, 32}) {
    const Grid g(1, n, 2 * kPi);
    const Field z(g);
    verdicts[i++] = an::global_bound_experiment(p, cosine(g), z, z, 1e-3, o).verdict;
  }
  EXPECT_EQ(verdicts[0], "bounded");
  EXPECT_EQ(verdicts[1], verdicts[0]);
}

TEST(Analysis, LyapunovThresholdFound) {
  const SystemParams p;
  const double L1 = an::lyapunov_positivity_threshold(
      p, Grid(1, 16, 2 * kPi), HistoryConfig{MemoryMode::dafermos, 64, 30.0}, 0, 1.0, 0.1,
      {0.1, 0.5, 1, 2, 5, 10, 20}, 200, 3);
  EXPECT_GT(L1, 0.0);
}
