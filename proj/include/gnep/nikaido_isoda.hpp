#pragma once

#include <vector>

#include "gnep/game.hpp"
#include "gnep/parallel.hpp"

namespace gnep {

/// Outcome of minimizing Psi(x, .) over X(x).
struct GapReport {
  double psi_xx = 0.0;  ///< Psi(x, x) = sum_i J_i(x)
  double phi = 0.0;     ///< Phi(x) = min_y Psi(x, y)
  double gap = 0.0;     ///< Psi(x, x) - Phi(x); zero exactly at equilibria
  std::vector<double> per_player_improvement;
  BlockVector argmin;
  bool fixed_point = false;
};

/// Nikaido-Isoda function: sum_i J_i(y_i, x_{-i}).
double psi(const GameSpec& game, const BlockVector& x, const BlockVector& y);

/// argmin of J_i(., x_{-i}) over player i's feasible section. Quadratic
/// objectives go through the block QP solver, oracle objectives through
/// projected gradient with Armijo backtracking.
Vec minimize_own_objective(const GameSpec& game, int i, const BlockVector& x,
                           double tol = kSolveTol);

/// Phi(x) and the gap. Psi(x, .) separates over players and X(x) is a
/// product, so each block is minimized on its own (concurrently under
/// Exec::Parallel; the final sums run in player order either way).
/// Throws DomainError naming the first player whose section is empty.
GapReport merit_phi(const GameSpec& game, const BlockVector& x, double tol = kSolveTol,
                    Exec exec = Exec::Parallel);

/// x is a fixed point of X and its gap is at most tol.
bool is_gne(const GameSpec& game, const BlockVector& x, double tol = kCertifyTol);

/// min over y in X(x) of sum_i <d_i J_i(x), y_i - x_i>. Never positive at a
/// fixed point; a value >= -tol certifies the quasi-variational inequality.
double qvi_residual(const GameSpec& game, const BlockVector& x);

}  // namespace gnep
