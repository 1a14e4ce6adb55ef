#pragma once
// Sampling falsifiers for structural conditions on constraint maps and games.
// A verdict that holds only means that no counterexample turned up at the
// given budget.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gnep/equilibrium.hpp"
#include "gnep/game.hpp"
#include "gnep/parallel.hpp"

namespace gnep {

using Rng = std::mt19937_64;

/// Independent stream for sample k, so results do not depend on which
/// thread draws which sample.
Rng sample_rng(std::uint64_t seed, std::uint64_t k);

/// Counterexample payload with full-precision coordinates. The meaning of
/// `points` and `coefficients` depends on `condition`:
///   graph_convexity  points (x, y, x', y'), coefficients (theta)
///   kkm              points (x_1..x_n, z), coefficients = convex weights
///   dsc              points (x, y)
///   dsc_eigenvalue   points (v) with v'(D + D')v <= 0
///   lsc              points (x0, y0, probe), coefficients (delta)
///   geometric        points (x, probe block), player set
/// `value` is the violated quantity (a distance, an improvement, ...).
struct Witness {
  std::string condition;
  std::vector<Vec> points;
  std::vector<double> coefficients;
  double value = 0.0;
  int player = -1;
};

struct Verdict {
  bool holds = true;
  std::optional<Witness> witness;
  int samples_tested = 0;
  std::uint64_t seed = 0;
  /// check_dsc on quadratic games: smallest eigenvalue of D(r) + D(r)'.
  std::optional<double> min_eigenvalue;
  /// check_dsc on quadratic games: the verdict of the sampling pass alone.
  std::optional<bool> sampled_holds;
};

/// F given through a domain sampler and a membership test for y in F(x).
/// `sample_range` draws a point of F(x) or returns nullopt when F(x) is empty
/// (or none was found); it is optional for KKM checks.
struct SetValuedOracle {
  std::string name;
  std::function<Vec(Rng&)> sample_domain;
  std::function<bool(const Vec&, const Vec&)> membership;
  std::function<std::optional<Vec>(const Vec&, Rng&)> sample_range;
};

/// F(x) = [lo(x), hi(x)] on [0, 1]; empty where lo > hi. Breakpoints are
/// sampled as domain atoms, since interesting behavior sits on them.
struct IntervalMap {
  std::string name;
  std::function<double(double)> lo;
  std::function<double(double)> hi;
  std::vector<double> breakpoints;
};

/// kkm-demo-a: F(0) = [0,1], F(x) = [0,x];
/// kkm-demo-b: F(x) = [0,x] on [0,1/2], [x,1] on (1/2,1];
/// shifted: F(x) = {x+1}; constant: [0,1]; ramp: [0,x].
IntervalMap builtin_interval_map(const std::string& name);
std::vector<std::string> builtin_map_names();

double interval_distance(const IntervalMap& map, double x, double y);
SetValuedOracle interval_oracle(const IntervalMap& map);

/// The joint constraint map x -> X(x) = prod_i (X_i^ad cap X_i(x_{-i})) of a
/// game with shared or constant constraints. Domain points are uniform in
/// X^ad; range points are projections of uniform box points onto each
/// player's section.
SetValuedOracle constraint_map_oracle(const GameSpec& game);

Verdict check_graph_convexity(const SetValuedOracle& oracle, int n_samples = 2000,
                              std::uint64_t seed = 0, Exec exec = Exec::Parallel);

/// Random finite subsets of 1..max_subset_size domain points, each tested at
/// hull_samples Dirichlet-uniform convex combinations.
Verdict check_kkm(const SetValuedOracle& oracle, int n_subsets = 2000, int max_subset_size = 4,
                  int hull_samples = 50, std::uint64_t seed = 0, Exec exec = Exec::Parallel);

/// Sampled test of d(x,r).(y-x) + d(y,r).(x-y) < -1e-12 ||y-x||^2 over pairs
/// in C cap X^ad. Quadratic games also get the exact eigenvalue test on
/// D(r) + D(r)', which decides the verdict.
Verdict check_dsc(const GameSpec& game, const WeightVector& r, int n_pairs = 2000,
                  std::uint64_t seed = 0, Exec exec = Exec::Parallel);

inline constexpr double kLscMargin = 1e-2;
inline constexpr int kLscLevels = 20;

/// Lower semicontinuity of an interval map at x0: for sampled y0 in F(x0),
/// the sup over probes x in B(x0, 2^-k) of dist(y0, F(x)) must fall below
/// kLscMargin by k = kLscLevels.
Verdict check_lsc_interval(const IntervalMap& map, double x0, int n_probes = 64,
                           std::uint64_t seed = 0);

/// Geometric equilibrium test with induced preferences P_i(x) = {z : J_i(z, x_{-i}) < J_i(x) - eps}:
/// probes feasible alternatives for each player.
Verdict check_geometric_equilibrium(const GameSpec& game, const BlockVector& x,
                                    double epsilon = 1e-6, int n_probes = 2000,
                                    std::uint64_t seed = 0, Exec exec = Exec::Parallel);

// Exact re-checks of a witness; true when the violation is reproduced.
bool replay_graph_convexity(const SetValuedOracle& oracle, const Witness& w);
bool replay_kkm(const SetValuedOracle& oracle, const Witness& w);
bool replay_dsc(const GameSpec& game, const WeightVector& r, const Witness& w);
bool replay_lsc(const IntervalMap& map, const Witness& w);
bool replay_geometric(const GameSpec& game, double epsilon, const Witness& w);

}  // namespace gnep
