#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnep/game.hpp"
#include "gnep/parallel.hpp"

namespace gnep {

enum class Method { BestResponse, Rosen, Potential };
enum class SweepMode { GaussSeidel, Jacobi };

const char* method_name(Method m);

struct TraceEntry {
  int iteration = 0;
  double residual = 0.0;
  Vec x;
};

/// Result of an equilibrium solve. `residual` is the merit gap for
/// best-response and potential solves and the natural VI residual
/// ||x - P(x - d(x, r))|| for Rosen. A non-converged report is a normal
/// outcome, not an error.
struct SolveReport {
  BlockVector x_star;
  int iterations = 0;
  double residual = 0.0;
  std::vector<TraceEntry> trace;
  bool converged = false;
  Method method = Method::BestResponse;
  /// Potential solves only: the minimizer failed equilibrium certification.
  bool potential_mismatch = false;
  /// Rosen only: min over C of d(x, r).(y - x); NaN when not computed.
  double variational_certificate = 0.0;
  std::string message;
};

/// Forcing functions g with g(t_k) -> 0 implying t_k -> 0.
enum class Forcing { Identity, Square, CappedLinear };

double forcing_value(Forcing f, double t);
const char* forcing_name(Forcing f);

struct PotentialSpec {
  ObjectiveSpec G;
  Forcing forcing = Forcing::Identity;
};

/// argmin of J_i(., x_{-i}) over X_i^ad cap X_i(x_{-i}); x supplies x_{-i}.
Vec best_response(const GameSpec& game, int i, const BlockVector& x, double tol = kSolveTol);

/// Fixed-point iteration on the best-response map. Gauss-Seidel sweeps players
/// in ascending index order. Stops when the sup-norm step drops below tol;
/// the result is then certified with is_gne at 10 * tol.
SolveReport solve_best_response(const GameSpec& game, const BlockVector& x0,
                                SweepMode mode = SweepMode::GaussSeidel, double tol = kSolveTol,
                                int max_iter = 10000);

/// d(x, r): block i is r_i times the gradient of J_i in x_i.
BlockVector pseudogradient(const GameSpec& game, const WeightVector& r, const BlockVector& x);

/// Constant Jacobian D(r) of d(., r) for all-quadratic games. Block row i is
/// r_i times the rows of Q_i belonging to player i.
Mat pseudogradient_jacobian(const GameSpec& game, const WeightVector& r);

/// Upper bound on the Lipschitz constant of d(., r): power iteration on the
/// constant Jacobian for quadratic games, 1.0 otherwise.
double pseudogradient_lipschitz_bound(const GameSpec& game, const WeightVector& r);

/// ||x - P(x - d(x, r))|| with P the projection onto C cap X^ad.
double vi_residual(const GameSpec& game, const WeightVector& r, const BlockVector& x);

/// min over y in C cap X^ad of d(x, r).(y - x); >= 0 exactly at variational
/// equilibria of the r-weighted game.
double variational_certificate(const GameSpec& game, const WeightVector& r, const BlockVector& x);

/// Rosen's projected pseudogradient method x <- P(x - s d(x, r)). The step is
/// halved whenever the VI residual would increase (at most 50 times per
/// iteration). step <= 0 selects 0.1 / L with L from
/// pseudogradient_lipschitz_bound. Requires a shared constraint set.
/// The residual is ||x - P(x - s0 d)|| / s0 with s0 = min(step, 1), which
/// is never below vi_residual(x).
SolveReport solve_rosen(const GameSpec& game, const WeightVector& r, const BlockVector& x0,
                        double step = 0.0, double tol = kSolveTol, int max_iter = 100000);

/// Projected-gradient minimization of the potential over C cap X^ad, followed
/// by equilibrium certification at 10 * tol.
SolveReport solve_potential(const GameSpec& game, const PotentialSpec& pot, const BlockVector& x0,
                            double tol = kSolveTol, int max_iter = 100000);

/// Largest |d_i G(x) - d_i J_i(x)| over `samples` uniform points of X^ad.
double potential_gradient_mismatch(const GameSpec& game, const PotentialSpec& pot, int samples,
                                   std::uint64_t seed);

struct BiasEntry {
  WeightVector r;
  BlockVector x;
  std::vector<double> objective_values;
  bool converged = false;
  /// Both starts reached the same point within 10 * tol.
  bool unique = false;
  std::string error;
};

/// Variational equilibria for each weight vector, each solved from the
/// projected lower corner of X^ad and from the projected box midpoint.
/// Failing entries carry their error message; the others are still returned.
std::vector<BiasEntry> bias_sweep(const GameSpec& game, const std::vector<WeightVector>& weights,
                                  double tol = kSolveTol, Exec exec = Exec::Parallel);

struct BiasDirection {
  bool holds = false;
  double value = 0.0;
  int player = -1;
};

/// For r, s differing only in coordinate j with r_j > s_j: the directional
/// derivative <d_j J_j(x_r), x_r_j - x_s_j>, which should be negative.
BiasDirection verify_bias_direction(const GameSpec& game, const WeightVector& r,
                                    const WeightVector& s, const BlockVector& x_r,
                                    const BlockVector& x_s);

}  // namespace gnep
