#include "gnep/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "gnep/error.hpp"
#include "gnep/nikaido_isoda.hpp"

namespace gnep {

const char* method_name(Method m) {
  switch (m) {
    case Method::BestResponse: return "best_response";
    case Method::Rosen: return "rosen";
    case Method::Potential: return "potential";
  }
  return "?";
}

double forcing_value(Forcing f, double t) {
  switch (f) {
    case Forcing::Identity: return t;
    case Forcing::Square: return t * t;
    case Forcing::CappedLinear: return std::min(t, 1.0) * t;
  }
  return t;
}

const char* forcing_name(Forcing f) {
  switch (f) {
    case Forcing::Identity: return "identity";
    case Forcing::Square: return "square";
    case Forcing::CappedLinear: return "capped_linear";
  }
  return "?";
}

Vec best_response(const GameSpec& game, int i, const BlockVector& x, double tol) {
  return minimize_own_objective(game, i, x, tol);
}

SolveReport solve_best_response(const GameSpec& game, const BlockVector& x0, SweepMode mode,
                                double tol, int max_iter) {
  if (x0.dims() != game.dims()) throw DimensionError("x0 does not match the game");
  SolveReport report;
  report.method = Method::BestResponse;
  BlockVector x = x0;
  const int n = game.num_players();
  const double inner_tol = std::min(kSolveTol, 0.1 * tol);

  bool stepped_small = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    BlockVector next = x;
    for (int i = 0; i < n; ++i) {
      const BlockVector& context = mode == SweepMode::GaussSeidel ? next : x;
      next.set_block(i, best_response(game, i, context, inner_tol));
    }
    const double step = (next.values() - x.values()).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    double gap = std::numeric_limits<double>::quiet_NaN();
    try {
      gap = merit_phi(game, x, inner_tol).gap;
    } catch (const DomainError&) {
      // Jacobi iterates may leave the domain between sweeps; the next sweep
      // raises the error if it matters.
    }
    report.trace.push_back({it + 1, gap, x.values()});
    if (step < tol) {
      stepped_small = true;
      ++it;
      break;
    }
  }
  report.x_star = x;
  report.iterations = it;
  report.residual = report.trace.empty() ? 0.0 : report.trace.back().residual;
  if (!stepped_small) {
    report.converged = false;
    report.message = "iteration limit reached";
  } else {
    report.converged = is_gne(game, x, 10.0 * tol);
    report.message = report.converged ? "converged" : "fixed point of the sweep is not certified";
  }
  return report;
}

BlockVector pseudogradient(const GameSpec& game, const WeightVector& r, const BlockVector& x) {
  if (r.size() != game.num_players())
    throw DimensionError("weight vector must have one entry per player");
  BlockVector d(game.dims());
  for (int i = 0; i < game.num_players(); ++i) d.set_block(i, r[i] * partial_gradient(game, i, x));
  return d;
}

Mat pseudogradient_jacobian(const GameSpec& game, const WeightVector& r) {
  if (!game.all_quadratic()) throw PreconditionError("Jacobian needs quadratic objectives");
  if (r.size() != game.num_players())
    throw DimensionError("weight vector must have one entry per player");
  Mat jac(game.total_dim(), game.total_dim());
  for (int i = 0; i < game.num_players(); ++i) {
    const auto& q = std::get<QuadraticObjective>(game.objective(i));
    const int off = game.offset(i);
    const int d = game.dims()[static_cast<std::size_t>(i)];
    jac.middleRows(off, d) = r[i] * q.Q.middleRows(off, d);
  }
  return jac;
}

namespace {

FeasibleSection shared_polytope(const GameSpec& game) {
  if (!game.shared_set())
    throw PreconditionError("variational equilibria require a shared set C");
  return joint_polytope(game);
}

}  // namespace

double pseudogradient_lipschitz_bound(const GameSpec& game, const WeightVector& r) {
  if (!game.all_quadratic()) return 1.0;
  const Mat jac = pseudogradient_jacobian(game, r);
  const Mat gram = jac.transpose() * jac;
  Vec v = Vec::Ones(jac.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = w / norm;
  }
  return 1.01 * std::sqrt(lambda);
}

double vi_residual(const GameSpec& game, const WeightVector& r, const BlockVector& x) {
  const FeasibleSection p = shared_polytope(game);
  const Vec d = pseudogradient(game, r, x).values();
  return (x.values() - project_polytope(x.values() - d, p)).norm();
}

double variational_certificate(const GameSpec& game, const WeightVector& r, const BlockVector& x) {
  const FeasibleSection p = shared_polytope(game);
  const Vec d = pseudogradient(game, r, x).values();
  return minimize_linear_1block(d, p).value - d.dot(x.values());
}

SolveReport solve_rosen(const GameSpec& game, const WeightVector& r, const BlockVector& x0,
                        double step, double tol, int max_iter) {
  const FeasibleSection poly = shared_polytope(game);
  if (x0.dims() != game.dims()) throw DimensionError("x0 does not match the game");
  if (poly.violation(x0.values()) > kFeasTol)
    throw PreconditionError("Rosen start must lie in C and X^ad");
  if (r.size() != game.num_players())
    throw DimensionError("weight vector must have one entry per player");

  if (!(step > 0.0)) {
    const double lip = pseudogradient_lipschitz_bound(game, r);
    step = lip > 0.0 ? 0.1 / lip : 1.0;
  }
  // Projections must be markedly more accurate than the stopping tolerance.
  const double proj_tol = 1e-14;
  auto project = [&](const Vec& v) { return project_polytope(v, poly, proj_tol); };
  auto field = [&](const Vec& v) { return pseudogradient(game, r, game.bundle(v)).values(); };
  // VI residual measured with the base step: ||v - P(v - s d)|| / s is
  // nonincreasing in s, so for s <= 1 it bounds the unit natural residual,
  // and unlike the unit residual it contracts along the iteration.
  const double base = std::min(step, 1.0);
  auto residual_of = [&](const Vec& v, const Vec& d) { return (v - project(v - base * d)).norm() / base; };

  SolveReport report;
  report.method = Method::Rosen;
  Vec x = x0.values();
  Vec d = field(x);
  double res = residual_of(x, d);
  int it = 0;
  bool stalled = false;
  for (; it < max_iter; ++it) {
    report.trace.push_back({it, res, x});
    if (res <= tol) break;
    bool accepted = false;
    double trial = step;
    for (int bt = 0; bt < 50; ++bt) {
      Vec cand = project(x - trial * d);
      Vec cand_d = field(cand);
      const double cand_res = residual_of(cand, cand_d);
      if (cand_res <= res) {
        x = std::move(cand);
        d = std::move(cand_d);
        res = cand_res;
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }
  report.x_star = game.bundle(x);
  report.iterations = it;
  report.residual = res;
  report.converged = res <= tol;
  if (report.converged) {
    report.message = "converged";
  } else {
    report.message = stalled ? "step size collapsed during backtracking" : "iteration limit reached";
  }
  if (game.total_dim() <= 256)
    report.variational_certificate = variational_certificate(game, r, report.x_star);
  else
    report.variational_certificate = std::numeric_limits<double>::quiet_NaN();
  return report;
}

namespace {

Vec potential_gradient(const GameSpec& game, const PotentialSpec& pot, const Vec& x) {
  if (const auto* q = std::get_if<QuadraticObjective>(&pot.G)) return q->Q * x + q->c;
  const auto& o = std::get<OracleObjective>(pot.G);
  if (!o.partial_gradient) throw GradientUnavailable("potential has no gradient oracle");
  Vec g(game.total_dim());
  const BlockVector bx = game.bundle(x);
  for (int i = 0; i < game.num_players(); ++i)
    g.segment(game.offset(i), bx.dim(i)) = o.partial_gradient(i, bx);
  return g;
}

double potential_value(const GameSpec& game, const PotentialSpec& pot, const Vec& x) {
  if (const auto* q = std::get_if<QuadraticObjective>(&pot.G))
    return 0.5 * x.dot(q->Q * x) + q->c.dot(x) + q->d;
  return std::get<OracleObjective>(pot.G).evaluate(game.bundle(x));
}

}  // namespace

SolveReport solve_potential(const GameSpec& game, const PotentialSpec& pot, const BlockVector& x0,
                            double tol, int max_iter) {
  const FeasibleSection poly = shared_polytope(game);
  if (x0.dims() != game.dims()) throw DimensionError("x0 does not match the game");
  if (const auto* q = std::get_if<QuadraticObjective>(&pot.G)) {
    if (q->Q.rows() != game.total_dim() || q->Q.cols() != game.total_dim() ||
        q->c.size() != game.total_dim())
      throw DimensionError("potential must be defined on the full bundle");
  }
  const double proj_tol = 1e-14;
  auto project = [&](const Vec& v) { return project_polytope(v, poly, proj_tol); };
  auto stationarity = [&](const Vec& v) {
    return (v - project(v - potential_gradient(game, pot, v))).norm();
  };

  SolveReport report;
  report.method = Method::Potential;
  Vec x = project(x0.values());
  double res = stationarity(x);
  int it = 0;
  if (const auto* q = std::get_if<QuadraticObjective>(&pot.G)) {
    // FISTA with gradient restart at step 1/L.
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q->Q + q->Q.transpose()),
                                           Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()))
      throw NotPsdError("potential is not convex");
    const double lip = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
    Vec z = x;
    double t = 1.0;
    for (; it < max_iter; ++it) {
      report.trace.push_back({it, res, x});
      if (res <= tol) break;
      const Vec grad = q->Q * z + q->c;
      Vec next = project(z - grad / lip);
      if ((next - x).dot(grad) > 0.0) t = 1.0;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = next + ((t - 1.0) / t_next) * (next - x);
      x = std::move(next);
      t = t_next;
      res = stationarity(x);
    }
  } else {
    double step = 1.0;
    for (; it < max_iter; ++it) {
      report.trace.push_back({it, res, x});
      if (res <= tol) break;
      const Vec g = potential_gradient(game, pot, x);
      const double fx = potential_value(game, pot, x);
      for (int bt = 0; bt < 60; ++bt) {
        Vec trial = project(x - step * g);
        const Vec dx = trial - x;
        if (potential_value(game, pot, trial) <= fx + g.dot(dx) + dx.squaredNorm() / (2.0 * step)) {
          x = std::move(trial);
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      res = stationarity(x);
    }
  }
  report.x_star = game.bundle(x);
  report.iterations = it;
  const bool stationary = res <= tol;
  if (!stationary) {
    report.residual = res;
    report.converged = false;
    report.message = "iteration limit reached";
    return report;
  }
  const GapReport gap = merit_phi(game, report.x_star, std::min(kSolveTol, tol));
  report.residual = gap.gap;
  report.potential_mismatch = !(gap.fixed_point && gap.gap <= 10.0 * tol);
  report.converged = !report.potential_mismatch;
  report.message = report.potential_mismatch
                       ? "potential_mismatch: minimizer of the potential is not an equilibrium"
                       : "converged";
  return report;
}

double potential_gradient_mismatch(const GameSpec& game, const PotentialSpec& pot, int samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec lo = game.lower();
  const Vec hi = game.upper();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec x(game.total_dim());
    for (int j = 0; j < x.size(); ++j) x[j] = lo[j] + unit(rng) * (hi[j] - lo[j]);
    const Vec gpot = potential_gradient(game, pot, x);
    const BlockVector bx = game.bundle(x);
    for (int i = 0; i < game.num_players(); ++i) {
      const Vec diff = gpot.segment(game.offset(i), bx.dim(i)) - partial_gradient(game, i, bx);
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::vector<BiasEntry> bias_sweep(const GameSpec& game, const std::vector<WeightVector>& weights,
                                  double tol, Exec exec) {
  if (weights.empty()) return {};
  std::vector<BiasEntry> entries;
  entries.reserve(weights.size());
  for (const auto& r : weights) entries.push_back(BiasEntry{r, game.zeros(), {}, false, false, {}});
  // Without a usable C every entry fails the same way.
  BlockVector start_a = game.zeros(), start_b = game.zeros();
  try {
    const FeasibleSection poly = shared_polytope(game);
    start_a = game.bundle(project_polytope(poly.lo(), poly));
    start_b = game.bundle(project_polytope(0.5 * (poly.lo() + poly.hi()), poly));
  } catch (const std::exception& ex) {
    for (auto& e : entries) e.error = ex.what();
    return entries;
  }
  for (auto& e : entries) e.x = start_a;

  for_each_index(exec, weights.size(), [&](std::size_t k) {
    BiasEntry& e = entries[k];
    try {
      const SolveReport a = solve_rosen(game, e.r, start_a, 0.0, tol);
      const SolveReport b = solve_rosen(game, e.r, start_b, 0.0, tol);
      e.x = a.x_star;
      e.converged = a.converged && b.converged;
      e.unique =
          (a.x_star.values() - b.x_star.values()).lpNorm<Eigen::Infinity>() <= 10.0 * tol;
      for (int i = 0; i < game.num_players(); ++i)
        e.objective_values.push_back(evaluate_objective(game, i, e.x));
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  });
  return entries;
}

BiasDirection verify_bias_direction(const GameSpec& game, const WeightVector& r,
                                    const WeightVector& s, const BlockVector& x_r,
                                    const BlockVector& x_s) {
  if (r.size() != game.num_players() || s.size() != game.num_players())
    throw DimensionError("weight vectors must have one entry per player");
  int j = -1;
  for (int i = 0; i < r.size(); ++i) {
    if (r[i] == s[i]) continue;
    if (j >= 0) throw PreconditionError("r and s must differ in exactly one coordinate");
    j = i;
  }
  if (j < 0) throw PreconditionError("r and s must differ in exactly one coordinate");
  if (!(r[j] > s[j])) throw PreconditionError("the differing coordinate must satisfy r_j > s_j");
  const Vec direction = x_r.block(j) - x_s.block(j);
  if (direction.norm() == 0.0)
    throw PreconditionError("x_r and x_s coincide in block " + std::to_string(j));
  BiasDirection out;
  out.player = j;
  out.value = partial_gradient(game, j, x_r).dot(direction);
  out.holds = out.value < 0.0;
  return out;
}

}  // namespace gnep
