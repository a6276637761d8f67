#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "jmgt/analysis.hpp"
#include "jmgt/state.hpp"

using namespace jmgt;

namespace {

constexpr double kPi = std::numbers::pi;

Field cosine(const Grid& g) {
  return Field::from_function(g, [](const auto& x) { return std::cos(x[0]); });
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(State, Regimes) {
  SystemParams p;
  p.b = 1.5;
  EXPECT_EQ(classify_regime(p), Regime::subcritical);
  p.b = 1.0;
  EXPECT_EQ(classify_regime(p), Regime::critical);
  p.b = 0.5;
  EXPECT_EQ(classify_regime(p), Regime::supercritical);
  EXPECT_EQ(to_string(Regime::critical), "critical");
}

TEST(State, ParameterValidation) {
  SystemParams p;
  EXPECT_NO_THROW(p.validate());
  p.kernel = MemoryKernel::none();
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_NO_THROW(p.validate(true));
  p = SystemParams{};
  p.tau = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SystemParams{};
  p.kernel = MemoryKernel::exponential(0.2, 2.0, 1.0);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(State, ZeroData) {
  const Grid g(1, 32, 2 * kPi);
  const SystemParams p;
  const Field z(g);
  const StateVector s = init_state(p, z, z, z, HistoryConfig{});
  EXPECT_EQ(max_norm(s.psi) + max_norm(s.v) + max_norm(s.w), 0.0);
  EXPECT_EQ(max_norm(s.dafermos()->memory_integral()), 0.0);
  EXPECT_EQ(history_weighted_norm(s, Weight::g, 0.0), 0.0);
}

TEST(State, HistoryOfInitialDisplacement) {
  const Grid g(1, 32, 2 * kPi);
  const SystemParams p;
  const Field c = cosine(g), z(g);
  const StateVector s = init_state(p, c, z, z, HistoryConfig{});
  const HistoryField& h = *s.dafermos();
  EXPECT_EQ(max_norm(h.eta(0)), 0.0);
  for (std::size_t j : {std::size_t{1}, std::size_t{17}, h.nodes() - 1})
    EXPECT_LT(max_diff(h.eta(j), c), 1e-15);

  const StateVector cl = init_state(p, c, z, z, HistoryConfig{MemoryMode::closure});
  EXPECT_LT(max_diff(cl.closure()->M, 0.2 * c), 1e-15);
}

TEST(State, DafermosAndClosureMomentsAgree) {
  const Grid g(1, 32, 2 * kPi);
  const SystemParams p;
  std::mt19937_64 rng(3);
  const Field psi0 = analysis::random_field(g, rng, 4), z(g);
  const StateVector d = init_state(p, psi0, z, z, HistoryConfig{});
  const StateVector c = init_state(p, psi0, z, z, HistoryConfig{MemoryMode::closure});
  EXPECT_LT(max_diff(d.dafermos()->memory_integral(), c.closure()->M), 1e-8);
}

TEST(State, ConstantHistoryNorms) {
  const Grid g(1, 32, 2 * kPi);
  const SystemParams p;  // mass 0.2, tau_r 1
  std::mt19937_64 rng(4);
  const Field f = analysis::random_field(g, rng, 3), z(g);
  // eta(s) = f for every s > 0, carried by the jump.
  const StateVector s = init_state(p, f, z, z, HistoryConfig{});
  const double tail = std::exp(-30.0);

  const double l2 = l2_norm(f);
  const double gnorm = history_weighted_norm(s, Weight::g, 0.0);
  EXPECT_NEAR(gnorm * gnorm, p.mass() * (1 - tail) * l2 * l2, 1e-12 * l2 * l2);
  const double dnorm = history_weighted_norm(s, Weight::minus_dg, 0.0);
  EXPECT_NEAR(dnorm * dnorm, gnorm * gnorm / 1.0, 1e-12 * l2 * l2);

  const double grad = homogeneous_norm(f, 1.0);
  const double g1 = history_weighted_norm(s, Weight::g, 1.0);
  EXPECT_NEAR(g1 * g1, p.mass() * (1 - tail) * grad * grad, 1e-12 * grad * grad);
}

TEST(State, MinusDerivativeWeightScalesWithRelaxationTime) {
  const Grid g(1, 16, 2 * kPi);
  SystemParams p;
  p.kernel = MemoryKernel::exponential(0.2, 1.0, 0.5);
  const Field c = cosine(g), z(g);
  StateVector st = init_state(p, c, z, z, HistoryConfig{MemoryMode::dafermos, 512, 30.0});
  auto& h = *st.dafermos();
  // eta(s) = e^{-s/10} cos x for s > 0
  for (std::size_t j = 1; j < h.nodes(); ++j) h.set_eta(j, std::exp(-0.1 * h.s(j)) * c);
  const double a = history_weighted_norm(h, Weight::g, 0.0);
  const double b = history_weighted_norm(h, Weight::minus_dg, 0.0);
  EXPECT_NEAR(b * b / (a * a), 2.0, 1e-3);
}

TEST(State, ProductWeightsIntegrateLinearHistoryExactly) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  const HistoryQuadrature q(k, 64, 20.0);
  double sum = 0.0;
  const auto& w = q.weights(Weight::g);
  for (std::size_t j = 0; j < q.nodes(); ++j) sum += w[j] * q.s(j);
  // int_0^20 0.2 s e^{-s} ds
  const double exact = 0.2 * (1.0 - 21.0 * std::exp(-20.0));
  EXPECT_NEAR(sum, exact, 1e-13);
  EXPECT_NEAR(q.tail(Weight::g, 0.0), 0.2 * (1.0 - std::exp(-20.0)), 1e-14);
}

TEST(State, AxpyScaleAndZeros) {
  const Grid g(1, 16, 2 * kPi);
  const SystemParams p;
  const Field c = cosine(g), z(g);
  StateVector a = init_state(p, c, c, z, HistoryConfig{MemoryMode::closure});
  const StateVector b = a;
  axpy(a, 2.0, b);
  EXPECT_LT(max_diff(a.v, 3.0 * c), 1e-15);
  EXPECT_LT(max_diff(a.closure()->M, 0.6 * c), 1e-15);
  scale(a, 0.5);
  EXPECT_LT(max_diff(a.psi, 1.5 * c), 1e-15);
  const StateVector zl = zeros_like(a);
  EXPECT_EQ(zl.mode(), MemoryMode::closure);
  EXPECT_EQ(max_norm(zl.closure()->M), 0.0);

  StateVector d = init_state(p, c, z, z, HistoryConfig{});
  EXPECT_THROW(axpy(d, 1.0, b), std::invalid_argument);
}

TEST(State, CheckpointRoundTrip) {
  const Grid g(1, 16, 2 * kPi);
  SystemParams p;
  p.b = 1.7;
  p.k = 0.3;
  std::mt19937_64 rng(5);
  const Field a = analysis::random_field(g, rng, 3), b = analysis::random_field(g, rng, 3);
  const StateVector s = init_state(p, a, b, a, HistoryConfig{MemoryMode::dafermos, 32, 10.0});
  const auto path = std::filesystem::temp_directory_path() / "jmgt_state_test.ckp";
  write_checkpoint(path.string(), s, p, 1.25);
  const Checkpoint ck = read_checkpoint(path.string());
  std::filesystem::remove(path);

  EXPECT_EQ(ck.time, 1.25);
  EXPECT_EQ(ck.params.b, 1.7);
  EXPECT_EQ(ck.params.k, 0.3);
  EXPECT_NEAR(ck.params.mass(), p.mass(), 1e-15);
  EXPECT_EQ(max_diff(ck.state.psi, s.psi), 0.0);
  EXPECT_EQ(max_diff(ck.state.v, s.v), 0.0);
  ASSERT_NE(ck.state.dafermos(), nullptr);
  const auto& h0 = *s.dafermos();
  const auto& h1 = *ck.state.dafermos();
  ASSERT_EQ(h1.nodes(), h0.nodes());
  for (std::size_t j = 0; j < h0.nodes(); ++j) EXPECT_EQ(max_diff(h1.eta(j), h0.eta(j)), 0.0);
}

TEST(State, CheckpointRejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "jmgt_state_bad.ckp";
  { std::ofstream(path) << "not a checkpoint"; }
  EXPECT_THROW(read_checkpoint(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}
