#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gnep/block_vector.hpp"
#include "gnep/section.hpp"

namespace gnep {

struct Box {
  Vec lo;
  Vec hi;
};

/// J(x) = 1/2 x'Qx + c'x + d with Q over the full bundle, so cross-player
/// couplings live in the off-diagonal blocks.
struct QuadraticObjective {
  Mat Q;
  Vec c;
  double d = 0.0;
};

/// Black-box objective. `partial_gradient(i, x)` returns the gradient with
/// respect to block i only and may be left empty. Both callables must be
/// deterministic and safe to call concurrently.
struct OracleObjective {
  std::function<double(const BlockVector&)> evaluate;
  std::function<Vec(int, const BlockVector&)> partial_gradient;
};

using ObjectiveSpec = std::variant<QuadraticObjective, OracleObjective>;

/// Polytope C = {x : A x <= b} (optionally intersected with a global box).
/// Row k binds every player unless owners[k] names a single player, in which
/// case only that player's feasible set is cut by it. The set of fixed points
/// of the induced constraint map is C either way.
struct SharedSet {
  Mat A;
  Vec b;
  std::optional<Box> box;
  Vec feasible_point;
  std::vector<int> owners;
};

struct ConstantConstraints {};
struct SharedConstraints {
  SharedSet set;
};
/// membership(i, x_i, x) tests x_i against player i's feasible set given the
/// opponents' blocks of x (block i of x is ignored).
struct OracleConstraints {
  std::function<bool(int, const Vec&, const BlockVector&)> membership;
};

using ConstraintSpec = std::variant<ConstantConstraints, SharedConstraints, OracleConstraints>;

/// Strictly positive per-player weights r.
class WeightVector {
 public:
  explicit WeightVector(Vec r);
  static WeightVector ones(int n) { return WeightVector(Vec::Ones(n)); }
  int size() const { return static_cast<int>(r_.size()); }
  double operator[](int i) const { return r_[i]; }
  const Vec& values() const { return r_; }

 private:
  Vec r_;
};

/// G = (X, J): player dimensions, objectives, admissible boxes X_i^ad and the
/// constraint-map specification. Validated on construction, immutable after.
class GameSpec {
 public:
  GameSpec(std::vector<int> dims, std::vector<ObjectiveSpec> objectives, std::vector<Box> boxes,
           ConstraintSpec constraints);

  int num_players() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int total_dim() const { return total_; }
  int offset(int i) const { return offsets_.at(static_cast<std::size_t>(i)); }

  const ObjectiveSpec& objective(int i) const { return objectives_.at(static_cast<std::size_t>(i)); }
  const std::vector<ObjectiveSpec>& objectives() const { return objectives_; }
  const Box& box(int i) const { return boxes_.at(static_cast<std::size_t>(i)); }
  const std::vector<Box>& boxes() const { return boxes_; }
  const ConstraintSpec& constraints() const { return constraints_; }

  /// The shared set, or nullptr for Constant / Oracle constraint maps.
  const SharedSet* shared_set() const;
  bool all_quadratic() const;

  Vec lower() const;
  Vec upper() const;
  BlockVector zeros() const { return BlockVector(dims_); }
  BlockVector bundle(const Vec& values) const { return BlockVector(dims_, values); }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::vector<ObjectiveSpec> objectives_;
  std::vector<Box> boxes_;
  ConstraintSpec constraints_;
};

double evaluate_objective(const GameSpec& game, int i, const BlockVector& x);

/// Gradient of J_i with respect to block i.
Vec partial_gradient(const GameSpec& game, int i, const BlockVector& x);

bool has_gradients(const GameSpec& game);

/// x_i in X_i^ad and in X_i(x_{-i}); x supplies the opponents' blocks.
bool feasible(const GameSpec& game, int i, const Vec& xi, const BlockVector& x,
              double tol = kFeasTol);

/// x in X(x), i.e. every block is feasible given the others.
bool is_fixed_point(const GameSpec& game, const BlockVector& x, double tol = kFeasTol);

/// Player i's feasible set X_i^ad intersected with X_i(x_{-i}) as a concrete
/// polytope. Throws DomainError if it is empty and PreconditionError for
/// oracle constraint maps.
FeasibleSection player_section(const GameSpec& game, int i, const BlockVector& x);

/// C intersected with X^ad over the whole bundle (X^ad alone for Constant
/// maps). Throws PreconditionError for oracle constraint maps.
FeasibleSection joint_polytope(const GameSpec& game);

/// Names a player in error messages.
std::string player_name(int i);

}  // namespace gnep
