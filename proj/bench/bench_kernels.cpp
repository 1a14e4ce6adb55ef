// Serial reference against the OpenMP path for the data-parallel kernels.
// The second benchmark argument selects the mode: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "gnep/nikaido_isoda.hpp"
#include "gnep/scenarios.hpp"
#include "gnep/structure.hpp"

using namespace gnep;

namespace {

Exec mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Exec::Serial : Exec::Parallel;
}

void BM_HeatSolutionMatrix(benchmark::State& state) {
  HeatMarketConfig cfg;
  cfg.grid_points = static_cast<int>(state.range(0));
  cfg.time_steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(heat_solution_matrix(cfg, mode(state)));
}
BENCHMARK(BM_HeatSolutionMatrix)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_GraphConvexity(benchmark::State& state) {
  const GameSpec g = build_random_jointly_convex(2, {3, 3}, 0.7, 1);
  const SetValuedOracle o = constraint_map_oracle(g);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        check_graph_convexity(o, static_cast<int>(state.range(0)), 0, mode(state)));
}
BENCHMARK(BM_GraphConvexity)->ArgsProduct({{500}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_GeometricProbes(benchmark::State& state) {
  const GameSpec g = build_cournot(4, 1, {1, 1.5, 2, 2.5}, 2.0);
  const BlockVector x = g.bundle(Vec::Constant(4, 0.5));
  // A huge epsilon rules out every probe, so the full budget is scanned.
  for (auto _ : state)
    benchmark::DoNotOptimize(
        check_geometric_equilibrium(g, x, 1e9, static_cast<int>(state.range(0)), 0, mode(state)));
}
BENCHMARK(BM_GeometricProbes)->ArgsProduct({{5000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Merit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GameSpec g = build_random_jointly_convex(n, std::vector<int>(static_cast<std::size_t>(n), 4),
                                                 0.7, 2);
  const BlockVector x = g.zeros();
  for (auto _ : state) benchmark::DoNotOptimize(merit_phi(g, x, kSolveTol, mode(state)));
}
BENCHMARK(BM_Merit)->ArgsProduct({{8}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
