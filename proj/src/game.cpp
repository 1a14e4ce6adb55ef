#include "gnep/game.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "gnep/error.hpp"

namespace gnep {

std::string player_name(int i) { return "player " + std::to_string(i); }

WeightVector::WeightVector(Vec r) : r_(std::move(r)) {
  if (r_.size() == 0) throw PreconditionError("weight vector is empty");
  for (Eigen::Index i = 0; i < r_.size(); ++i)
    if (!(r_[i] > 0.0) || !std::isfinite(r_[i]))
      throw PreconditionError("weight r_" + std::to_string(i) + " must be strictly positive");
}

namespace {

void check_quadratic(const QuadraticObjective& q, int i, int total, int offset, int dim) {
  const std::string who = player_name(i);
  if (q.Q.rows() != total || q.Q.cols() != total)
    throw DimensionError(who + ": Q must be " + std::to_string(total) + "x" +
                             std::to_string(total),
                         i);
  if (q.c.size() != total) throw DimensionError(who + ": c must have the bundle dimension", i);
  if (!q.Q.allFinite() || !q.c.allFinite() || !std::isfinite(q.d))
    throw PreconditionError(who + ": objective has non-finite coefficients");
  const double scale = std::max(1.0, q.Q.cwiseAbs().maxCoeff());
  if ((q.Q - q.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw PreconditionError(who + ": Q is not symmetric");
  const Mat own = q.Q.block(offset, offset, dim, dim);
  Eigen::SelfAdjointEigenSolver<Mat> eig(own, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw NotPsdError(who + ": objective is not convex in the player's own block");
}

bool row_binds(const SharedSet& s, Eigen::Index k, int i) {
  if (s.owners.empty()) return true;
  const int owner = s.owners[static_cast<std::size_t>(k)];
  return owner < 0 || owner == i;
}

}  // namespace

GameSpec::GameSpec(std::vector<int> dims, std::vector<ObjectiveSpec> objectives,
                   std::vector<Box> boxes, ConstraintSpec constraints)
    : dims_(std::move(dims)),
      objectives_(std::move(objectives)),
      boxes_(std::move(boxes)),
      constraints_(std::move(constraints)) {
  const int n = num_players();
  if (n < 2) throw PreconditionError("a game needs at least two players");
  for (int i = 0; i < n; ++i) {
    if (dims_[static_cast<std::size_t>(i)] <= 0)
      throw DimensionError(player_name(i) + " has non-positive dimension", i);
    offsets_.push_back(total_);
    total_ += dims_[static_cast<std::size_t>(i)];
  }
  if (static_cast<int>(objectives_.size()) != n)
    throw DimensionError("expected one objective per player");
  if (static_cast<int>(boxes_.size()) != n) throw DimensionError("expected one box per player");

  for (int i = 0; i < n; ++i) {
    const Box& b = box(i);
    const int d = dims_[static_cast<std::size_t>(i)];
    if (b.lo.size() != d || b.hi.size() != d)
      throw DimensionError(player_name(i) + ": box has wrong dimension", i);
    if (!b.lo.allFinite() || !b.hi.allFinite())
      throw PreconditionError(player_name(i) + ": box must be bounded");
    if ((b.lo.array() > b.hi.array()).any())
      throw PreconditionError(player_name(i) + ": box is empty (lo > hi)");

    if (const auto* q = std::get_if<QuadraticObjective>(&objective(i))) {
      check_quadratic(*q, i, total_, offset(i), d);
    } else {
      const auto& o = std::get<OracleObjective>(objective(i));
      if (!o.evaluate) throw PreconditionError(player_name(i) + ": oracle without evaluate");
    }
  }

  if (const auto* s = std::get_if<SharedConstraints>(&constraints_)) {
    const SharedSet& set = s->set;
    if (set.A.cols() != total_ || set.A.rows() != set.b.size())
      throw DimensionError("shared set: A must be m x " + std::to_string(total_) +
                           " and b must have m entries");
    if (!set.A.allFinite() || !set.b.allFinite())
      throw PreconditionError("shared set has non-finite coefficients");
    if (!set.owners.empty()) {
      if (static_cast<Eigen::Index>(set.owners.size()) != set.A.rows())
        throw DimensionError("shared set: owners must have one entry per row");
      for (int o : set.owners)
        if (o < -1 || o >= n) throw PreconditionError("shared set: owner out of range");
    }
    if (set.box) {
      if (set.box->lo.size() != total_ || set.box->hi.size() != total_)
        throw DimensionError("shared set: global box has wrong dimension");
      if ((set.box->lo.array() > set.box->hi.array()).any())
        throw PreconditionError("shared set: global box is empty");
    }
    if (set.feasible_point.size() != total_)
      throw PreconditionError("shared set: a feasible point certifying nonemptiness is required");
    if (!is_fixed_point(*this, bundle(set.feasible_point)))
      throw PreconditionError("shared set: stored feasible point is not in C and X^ad");
  } else if (const auto* o = std::get_if<OracleConstraints>(&constraints_)) {
    if (!o->membership) throw PreconditionError("oracle constraint map without membership");
  }
}

const SharedSet* GameSpec::shared_set() const {
  if (const auto* s = std::get_if<SharedConstraints>(&constraints_)) return &s->set;
  return nullptr;
}

bool GameSpec::all_quadratic() const {
  for (const auto& o : objectives_)
    if (!std::holds_alternative<QuadraticObjective>(o)) return false;
  return true;
}

Vec GameSpec::lower() const {
  Vec lo(total_);
  for (int i = 0; i < num_players(); ++i) lo.segment(offset(i), dims_[static_cast<std::size_t>(i)]) = box(i).lo;
  return lo;
}

Vec GameSpec::upper() const {
  Vec hi(total_);
  for (int i = 0; i < num_players(); ++i) hi.segment(offset(i), dims_[static_cast<std::size_t>(i)]) = box(i).hi;
  return hi;
}

namespace {

void check_bundle(const GameSpec& game, const BlockVector& x) {
  if (x.dims() != game.dims())
    throw DimensionError("bundle block dimensions do not match the game");
}

void check_player(const GameSpec& game, int i) {
  if (i < 0 || i >= game.num_players())
    throw DimensionError("player index " + std::to_string(i) + " out of range", i);
}

}  // namespace

double evaluate_objective(const GameSpec& game, int i, const BlockVector& x) {
  check_player(game, i);
  check_bundle(game, x);
  if (const auto* q = std::get_if<QuadraticObjective>(&game.objective(i))) {
    const Vec& v = x.values();
    return 0.5 * v.dot(q->Q * v) + q->c.dot(v) + q->d;
  }
  return std::get<OracleObjective>(game.objective(i)).evaluate(x);
}

Vec partial_gradient(const GameSpec& game, int i, const BlockVector& x) {
  check_player(game, i);
  check_bundle(game, x);
  const int off = game.offset(i);
  const int d = game.dims()[static_cast<std::size_t>(i)];
  if (const auto* q = std::get_if<QuadraticObjective>(&game.objective(i))) {
    return q->Q.middleRows(off, d) * x.values() + q->c.segment(off, d);
  }
  const auto& o = std::get<OracleObjective>(game.objective(i));
  if (!o.partial_gradient) throw GradientUnavailable(player_name(i) + ": gradient unavailable");
  Vec g = o.partial_gradient(i, x);
  if (g.size() != d) throw DimensionError(player_name(i) + ": oracle gradient has wrong size", i);
  return g;
}

bool has_gradients(const GameSpec& game) {
  for (const auto& o : game.objectives())
    if (const auto* f = std::get_if<OracleObjective>(&o); f && !f->partial_gradient) return false;
  return true;
}

bool feasible(const GameSpec& game, int i, const Vec& xi, const BlockVector& x, double tol) {
  check_player(game, i);
  check_bundle(game, x);
  if (xi.size() != x.dim(i)) throw DimensionError(player_name(i) + ": block has wrong size", i);
  const Box& b = game.box(i);
  if ((xi - b.hi).maxCoeff() > tol || (b.lo - xi).maxCoeff() > tol) return false;

  if (const auto* s = game.shared_set()) {
    const int off = game.offset(i);
    Vec full = x.values();
    full.segment(off, xi.size()) = xi;
    if (s->box) {
      const Vec lo = s->box->lo.segment(off, xi.size());
      const Vec hi = s->box->hi.segment(off, xi.size());
      if ((xi - hi).maxCoeff() > tol || (lo - xi).maxCoeff() > tol) return false;
    }
    for (Eigen::Index k = 0; k < s->A.rows(); ++k) {
      if (!row_binds(*s, k, i)) continue;
      const double norm = s->A.row(k).norm();
      if (norm <= 1e-14) {
        if (s->b[k] < -tol) return false;
        continue;
      }
      if ((s->A.row(k).dot(full) - s->b[k]) / norm > tol) return false;
    }
    return true;
  }
  if (const auto* o = std::get_if<OracleConstraints>(&game.constraints()))
    return o->membership(i, xi, x);
  return true;
}

bool is_fixed_point(const GameSpec& game, const BlockVector& x, double tol) {
  for (int i = 0; i < game.num_players(); ++i)
    if (!feasible(game, i, x.block(i), x, tol)) return false;
  return true;
}

FeasibleSection player_section(const GameSpec& game, int i, const BlockVector& x) {
  check_player(game, i);
  check_bundle(game, x);
  if (std::holds_alternative<OracleConstraints>(game.constraints()))
    throw PreconditionError("oracle constraint maps have no polytope sections");
  const int off = game.offset(i);
  const int d = x.dim(i);
  Vec lo = game.box(i).lo;
  Vec hi = game.box(i).hi;
  const SharedSet* s = game.shared_set();
  if (!s) return FeasibleSection(lo, hi);

  if (s->box) {
    lo = lo.cwiseMax(s->box->lo.segment(off, d));
    hi = hi.cwiseMin(s->box->hi.segment(off, d));
    if ((lo.array() > hi.array() + kFeasTol).any())
      throw DomainError(player_name(i) + ": feasible section is empty (outside domain)", i);
    hi = hi.cwiseMax(lo);
  }

  Vec others = x.values();
  others.segment(off, d).setZero();
  std::vector<Eigen::Index> picked;
  for (Eigen::Index k = 0; k < s->A.rows(); ++k)
    if (row_binds(*s, k, i)) picked.push_back(k);
  Mat rows(static_cast<Eigen::Index>(picked.size()), d);
  Vec rhs(static_cast<Eigen::Index>(picked.size()));
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const auto k = picked[r];
    const auto rr = static_cast<Eigen::Index>(r);
    rows.row(rr) = s->A.row(k).segment(off, d);
    rhs[rr] = s->b[k] - s->A.row(k).dot(others);
  }
  try {
    FeasibleSection section(lo, hi, rows, rhs);
    bool empty = false;
    if (d == 1) {
      auto [l, u] = section.interval();
      empty = l > u + kFeasTol;
    } else if (!section.is_box() && !section.contains(x.block(i), kFeasTol)) {
      empty = section_is_empty(section);
    }
    if (empty)
      throw DomainError(player_name(i) + ": feasible section is empty (outside domain)", i);
    return section;
  } catch (const PreconditionError&) {
    throw DomainError(player_name(i) + ": feasible section is empty (outside domain)", i);
  }
}

FeasibleSection joint_polytope(const GameSpec& game) {
  if (std::holds_alternative<OracleConstraints>(game.constraints()))
    throw PreconditionError("oracle constraint maps have no polytope representation");
  Vec lo = game.lower();
  Vec hi = game.upper();
  const SharedSet* s = game.shared_set();
  if (!s) return FeasibleSection(lo, hi);
  if (s->box) {
    lo = lo.cwiseMax(s->box->lo);
    hi = hi.cwiseMin(s->box->hi);
  }
  return FeasibleSection(lo, hi, s->A, s->b);
}

}  // namespace gnep
