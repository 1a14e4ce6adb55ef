#pragma once
// Built-in games: Cournot oligopolies, the heat-equation spot market and
// random jointly convex instances.

#include <cstdint>
#include <optional>
#include <vector>

#include "gnep/equilibrium.hpp"
#include "gnep/game.hpp"
#include "gnep/parallel.hpp"

namespace gnep {

/// J_i = p x_i^2 + p x_i sum_{j != i} x_j - (eta - c_i) x_i on [0, eta/p].
/// With a cap the players share C = {sum_i x_i <= cap}; otherwise the
/// constraint map is constant.
GameSpec build_cournot(double eta, double p, const std::vector<double>& costs,
                       std::optional<double> cap = std::nullopt);

/// Exact potential sum_i [p x_i^2 - (eta - c_i) x_i] + p sum_{i<j} x_i x_j.
PotentialSpec build_cournot_potential(double eta, double p, const std::vector<double>& costs);

/// y_t - y_xx = sum_i u_i on (0, 1) x (0, horizon], y = 0 on the boundary and
/// at t = 0, discretized with central differences on M interior nodes and
/// implicit Euler with T steps. Controls and states are stacked time-major:
/// entry (n, k) sits at n * M + k.
struct HeatMarketConfig {
  int grid_points = 8;
  int time_steps = 6;
  double horizon = 1.0;
  std::vector<double> caps{1.0, 1.0};
  double state_cap = 0.15;
  std::vector<double> buffers{0.01, 0.02};
  std::vector<double> alphas{1e-2, 2e-2};
  /// Tracking target y_d; empty means target_level everywhere.
  Vec target;
  double target_level = 0.5;
};

void validate(const HeatMarketConfig& cfg, int n_players);

/// Dense solution matrix S with y = S f, assembled column by column (columns
/// run concurrently under Exec::Parallel).
Mat heat_solution_matrix(const HeatMarketConfig& cfg, Exec exec = Exec::Parallel);

/// Plain implicit-Euler time stepping for a stacked source; the reference
/// that S is tested against.
Vec simulate_heat(const HeatMarketConfig& cfg, const Vec& source);

/// Tracking game J_i(u) = 1/2 ||S sum_j u_j - y_d||^2 + alpha_i/2 ||u_i||^2
/// on [0, cap_i]. Player i's feasible set is cut by the state cap
/// (S sum_j u_j)_k <= state_cap - buffer_i for every space-time node k.
GameSpec build_heat_market(const HeatMarketConfig& cfg, int n_players);

/// Random quadratic game with strongly monotone pseudogradient: own blocks
/// M'M + rho I with rho >= 1e-3 dominating the cross couplings, random
/// bounded boxes around 0 and a shared polytope that has 0 in its interior.
/// `density` is the fraction of nonzero entries in M and the couplings.
GameSpec build_random_jointly_convex(int n_players, const std::vector<int>& dims, double density,
                                     std::uint64_t seed);

inline constexpr double kRandomRidge = 1e-3;

}  // namespace gnep
