#include "gnep/nikaido_isoda.hpp"

#include <cmath>
#include <limits>

#include "gnep/error.hpp"

namespace gnep {

double psi(const GameSpec& game, const BlockVector& x, const BlockVector& y) {
  if (!x.same_shape(y) || x.dims() != game.dims())
    throw DimensionError("psi: x and y must both match the game's block dimensions");
  double total = 0.0;
  for (int i = 0; i < game.num_players(); ++i)
    total += evaluate_objective(game, i, x.with_block(i, y.block(i)));
  return total;
}

namespace {

Vec projected_gradient_oracle(const GameSpec& game, int i, const BlockVector& x,
                              const FeasibleSection& section, double tol) {
  auto value = [&](const Vec& y) { return evaluate_objective(game, i, x.with_block(i, y)); };
  auto grad = [&](const Vec& y) { return partial_gradient(game, i, x.with_block(i, y)); };
  Vec y = project_polytope(section.lo(), section);
  double step = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10000; ++it) {
    const Vec g = grad(y);
    residual = (y - project_polytope(y - g, section)).norm();
    if (residual <= tol) return y;
    const double fy = value(y);
    for (int bt = 0; bt < 60; ++bt) {
      const Vec trial = project_polytope(y - step * g, section);
      const Vec d = trial - y;
      if (value(trial) <= fy + g.dot(d) + d.squaredNorm() / (2.0 * step)) {
        y = trial;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
  }
  throw ConvergenceError(player_name(i) + ": oracle best response did not converge", y,
                         residual);
}

}  // namespace

Vec minimize_own_objective(const GameSpec& game, int i, const BlockVector& x, double tol) {
  const FeasibleSection section = player_section(game, i, x);
  try {
    if (const auto* q = std::get_if<QuadraticObjective>(&game.objective(i))) {
      const int off = game.offset(i);
      const int d = x.dim(i);
      Vec others = x.values();
      others.segment(off, d).setZero();
      const Mat own = q->Q.block(off, off, d, d);
      const Vec g = q->Q.middleRows(off, d) * others + q->c.segment(off, d);
      return minimize_quadratic_1block(own, g, section, tol);
    }
    return projected_gradient_oracle(game, i, x, section, tol);
  } catch (const DomainError& e) {
    throw DomainError(player_name(i) + ": " + e.what(), i);
  }
}

GapReport merit_phi(const GameSpec& game, const BlockVector& x, double tol, Exec exec) {
  if (!(tol > 0.0)) throw PreconditionError("merit_phi: tol must be positive");
  if (x.dims() != game.dims()) throw DimensionError("merit_phi: bundle does not match the game");
  const int n = game.num_players();

  // Sections first, serially, so the reported domain error names the lowest
  // offending player regardless of scheduling.
  for (int i = 0; i < n; ++i) (void)player_section(game, i, x);

  std::vector<Vec> best(static_cast<std::size_t>(n));
  std::vector<double> current(static_cast<std::size_t>(n));
  std::vector<double> deviated(static_cast<std::size_t>(n));
  for_each_index(exec, static_cast<std::size_t>(n), [&](std::size_t k) {
    const int i = static_cast<int>(k);
    best[k] = minimize_own_objective(game, i, x, tol);
    current[k] = evaluate_objective(game, i, x);
    deviated[k] = evaluate_objective(game, i, x.with_block(i, best[k]));
  });

  GapReport report;
  report.argmin = x;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    report.psi_xx += current[k];
    report.phi += deviated[k];
    report.per_player_improvement.push_back(current[k] - deviated[k]);
    report.argmin.set_block(i, best[k]);
  }
  report.gap = 0.0;
  for (double d : report.per_player_improvement) report.gap += d;
  report.fixed_point = is_fixed_point(game, x);
  return report;
}

bool is_gne(const GameSpec& game, const BlockVector& x, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("is_gne: tol must be positive");
  if (!is_fixed_point(game, x)) return false;
  return merit_phi(game, x, std::min(kSolveTol, 0.01 * tol)).gap <= tol;
}

double qvi_residual(const GameSpec& game, const BlockVector& x) {
  double total = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    const Vec g = partial_gradient(game, i, x);
    const FeasibleSection section = player_section(game, i, x);
    const LinearMin lm = minimize_linear_1block(g, section);
    total += lm.value - g.dot(x.block(i));
  }
  return total;
}

}  // namespace gnep
