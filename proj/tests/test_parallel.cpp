#include <doctest.h>

#include <omp.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "gnep/equilibrium.hpp"
#include "gnep/nikaido_isoda.hpp"
#include "gnep/scenarios.hpp"
#include "gnep/structure.hpp"
#include "oracles.hpp"

using namespace gnep;

namespace {

// More threads than cores, so indices really are visited out of order.
struct Threads {
  Threads() { omp_set_num_threads(4); }
} const threads;

BlockVector pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return BlockVector({1, 1}, v);
}

bool same(const Verdict& a, const Verdict& b) {
  if (a.holds != b.holds || a.samples_tested != b.samples_tested) return false;
  if (a.witness.has_value() != b.witness.has_value()) return false;
  if (!a.witness) return true;
  if (a.witness->points.size() != b.witness->points.size()) return false;
  for (std::size_t k = 0; k < a.witness->points.size(); ++k)
    if (a.witness->points[k] != b.witness->points[k]) return false;
  return a.witness->coefficients == b.witness->coefficients && a.witness->value == b.witness->value;
}

}  // namespace

TEST_CASE("find_first returns the smallest hit") {
  for (std::size_t target : {0u, 1u, 17u, 999u}) {
    const auto pred = [&](std::size_t k) { return k >= target && k % 2 == target % 2; };
    CHECK(find_first(Exec::Parallel, 1000, pred) == find_first(Exec::Serial, 1000, pred));
    CHECK(*find_first(Exec::Parallel, 1000, pred) == target);
  }
  CHECK_FALSE(find_first(Exec::Parallel, 100, [](std::size_t) { return false; }));
}

TEST_CASE("find_first rethrows only errors before the hit") {
  const auto late_error = [](std::size_t k) {
    if (k == 50) throw std::runtime_error("late");
    return k == 10;
  };
  CHECK(*find_first(Exec::Parallel, 100, late_error) == 10);
  const auto early_error = [](std::size_t k) {
    if (k == 5) throw std::runtime_error("early");
    return k == 10;
  };
  CHECK_THROWS_AS(find_first(Exec::Parallel, 100, early_error), std::runtime_error);
  CHECK_THROWS_AS(find_first(Exec::Serial, 100, early_error), std::runtime_error);
}

TEST_CASE("for_each_index visits every index once and propagates errors") {
  std::vector<std::atomic<int>> seen(500);
  for_each_index(Exec::Parallel, seen.size(), [&](std::size_t k) { ++seen[k]; });
  bool once = true;
  for (const auto& s : seen) once = once && s.load() == 1;
  CHECK(once);
  CHECK_THROWS_AS(for_each_index(Exec::Parallel, 10,
                                 [](std::size_t k) {
                                   if (k == 3) throw std::runtime_error("x");
                                 }),
                  std::runtime_error);
}

TEST_CASE("merit is identical in both modes") {
  const GameSpec g = build_random_jointly_convex(4, {2, 2, 1, 3}, 0.8, 1);
  const FeasibleSection joint = joint_polytope(g);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const BlockVector x =
        g.bundle(project_polytope(oracle::uniform_in(rng, g.lower(), g.upper()), joint));
    const GapReport a = merit_phi(g, x, kSolveTol, Exec::Serial);
    const GapReport b = merit_phi(g, x, kSolveTol, Exec::Parallel);
    CHECK(a.gap == b.gap);
    CHECK(a.phi == b.phi);
    CHECK(a.argmin == b.argmin);
    CHECK(a.per_player_improvement == b.per_player_improvement);
  }
}

TEST_CASE("checkers are identical in both modes") {
  const GameSpec g = build_cournot(4, 1, {1, 1.5}, 1.0);
  const auto b = interval_oracle(builtin_interval_map("kkm-demo-b"));
  const auto cm = constraint_map_oracle(g);
  const WeightVector bad((Vec(2) << 1, 100).finished());
  for (std::uint64_t seed : {0u, 3u}) {
    CHECK(same(check_graph_convexity(b, 2000, seed, Exec::Serial),
               check_graph_convexity(b, 2000, seed, Exec::Parallel)));
    CHECK(same(check_graph_convexity(cm, 300, seed, Exec::Serial),
               check_graph_convexity(cm, 300, seed, Exec::Parallel)));
    CHECK(same(check_kkm(b, 500, 4, 20, seed, Exec::Serial),
               check_kkm(b, 500, 4, 20, seed, Exec::Parallel)));
    CHECK(same(check_dsc(g, bad, 500, seed, Exec::Serial),
               check_dsc(g, bad, 500, seed, Exec::Parallel)));
    CHECK(same(check_geometric_equilibrium(g, pt(0.4, 0.3), 1e-6, 700, seed, Exec::Serial),
               check_geometric_equilibrium(g, pt(0.4, 0.3), 1e-6, 700, seed, Exec::Parallel)));
    CHECK(same(check_geometric_equilibrium(g, pt(0.75, 0.25), 1e-6, 700, seed, Exec::Serial),
               check_geometric_equilibrium(g, pt(0.75, 0.25), 1e-6, 700, seed, Exec::Parallel)));
  }
}

TEST_CASE("bias sweep is identical in both modes") {
  const GameSpec g = build_cournot(4, 1, {1, 1.5}, 1.0);
  std::vector<WeightVector> ws;
  for (double r2 : {0.5, 0.8, 1.0, 2.0, 4.0}) ws.emplace_back((Vec(2) << 1, r2).finished());
  const auto a = bias_sweep(g, ws, kSolveTol, Exec::Serial);
  const auto b = bias_sweep(g, ws, kSolveTol, Exec::Parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].x == b[k].x);
    CHECK(a[k].unique == b[k].unique);
    CHECK(a[k].objective_values == b[k].objective_values);
  }
}

TEST_CASE("solution matrix is identical in both modes") {
  const HeatMarketConfig cfg;
  CHECK(heat_solution_matrix(cfg, Exec::Serial) == heat_solution_matrix(cfg, Exec::Parallel));
}
