// Hot paths: transforms, one RK4 step per history representation, and the
// per-sample energy measurement.
#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jmgt/analysis.hpp"
#include "jmgt/dynamics.hpp"
#include "jmgt/energy.hpp"

using namespace jmgt;

namespace {

constexpr double kL = 20.0 * std::numbers::pi;

Field mode(const Grid& g) {
  return Field::from_function(g, [&](const auto& x) { return std::cos(2 * std::numbers::pi * 10 * x[0] / kL); });
}

StateVector reference_state(const Grid& g, MemoryMode m, int intervals = 256) {
  const SystemParams p;
  return init_state(p, mode(g), Field(g), Field(g), HistoryConfig{m, intervals, 30.0});
}

}  // namespace

static void BM_ForwardInverse(benchmark::State& st) {
  const int dim = static_cast<int>(st.range(0));
  const int n = static_cast<int>(st.range(1));
  const Grid g(dim, n, kL);
  std::mt19937_64 rng(1);
  const Field f = analysis::random_field(g, rng, 4);
  for (auto _ : st) {
    Field back = inverse(g, forward(f));
    benchmark::DoNotOptimize(back.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_ForwardInverse)->Args({1, 128})->Args({1, 1024})->Args({2, 64})->Args({3, 32});

static void BM_StepDafermos(benchmark::State& st) {
  const Grid g(1, 128, kL);
  const SystemParams p;
  StateVector y = reference_state(g, MemoryMode::dafermos, static_cast<int>(st.range(0)));
  const RhsConfig cfg{};
  for (auto _ : st) y = step(y, p, cfg, 1e-3);
}
BENCHMARK(BM_StepDafermos)->Arg(256)->Arg(3000)->Unit(benchmark::kMicrosecond);

static void BM_StepCharacteristic(benchmark::State& st) {
  const Grid g(1, 128, kL);
  const SystemParams p;
  StateVector y = reference_state(g, MemoryMode::dafermos, 3000);
  const RhsConfig cfg{MemoryMode::dafermos, false, false, Transport::characteristic};
  for (auto _ : st) y = step(y, p, cfg, 0.01);
}
BENCHMARK(BM_StepCharacteristic)->Unit(benchmark::kMicrosecond);

static void BM_StepClosure(benchmark::State& st) {
  const Grid g(1, 128, kL);
  const SystemParams p;
  StateVector y = reference_state(g, MemoryMode::closure);
  const RhsConfig cfg{MemoryMode::closure, st.range(0) != 0};
  for (auto _ : st) y = step(y, p, cfg, 1e-3);
}
BENCHMARK(BM_StepClosure)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_Measure(benchmark::State& st) {
  const Grid g(1, 128, kL);
  const SystemParams p;
  const StateVector y = reference_state(g, MemoryMode::dafermos);
  const int order = static_cast<int>(st.range(0));
  for (auto _ : st) {
    auto s = energy::measure(y, p, order, true, 0.0);
    benchmark::DoNotOptimize(s.lambda);
  }
}
BENCHMARK(BM_Measure)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_ResolventSolve(benchmark::State& st) {
  const Grid g(1, 128, kL);
  const SystemParams p;
  const auto quad = make_quadrature(p.kernel, HistoryConfig{});
  std::mt19937_64 rng(3);
  const StateVector F = analysis::random_domain_state(g, quad, rng);
  for (auto _ : st) {
    StateVector x = analysis::resolvent_solve(p, F);
    benchmark::DoNotOptimize(x.psi.data());
  }
}
BENCHMARK(BM_ResolventSolve)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
