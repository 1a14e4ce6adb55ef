#pragma once

// Convex subproblems on a single polytope: projections, box/polytope
// constrained quadratic minimization and linear minimization.

#include <utility>

#include "gnep/block_vector.hpp"

namespace gnep {

/// Box intersected with halfspaces {y : a_k . y <= b_k}. Rows are normalized
/// to unit length at construction; rows with a vanishing normal are dropped
/// after checking that they hold.
class FeasibleSection {
 public:
  FeasibleSection() = default;
  FeasibleSection(Vec lo, Vec hi);
  FeasibleSection(Vec lo, Vec hi, Mat rows, Vec rhs);

  int dim() const { return static_cast<int>(lo_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  bool is_box() const { return rhs_.size() == 0; }

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Mat& rows() const { return rows_; }
  const Vec& rhs() const { return rhs_; }

  /// Largest constraint violation of y (0 when feasible).
  double violation(const Vec& y) const;
  bool contains(const Vec& y, double tol) const { return violation(y) <= tol; }

  /// For one-dimensional sections: the exact interval [first, second].
  /// Empty when first > second.
  std::pair<double, double> interval() const;

 private:
  Vec lo_, hi_;
  Mat rows_;
  Vec rhs_;
};

inline constexpr double kFeasTol = 1e-9;
inline constexpr double kSolveTol = 1e-8;
inline constexpr double kCertifyTol = 1e-6;

Vec project_box(const Vec& v, const Vec& lo, const Vec& hi);

/// Euclidean projection onto the section by Dykstra's alternating
/// projections over the box and each halfspace. Stops once a full sweep moves
/// the iterate by less than tol and all rows hold within kFeasTol.
/// Throws ConvergenceError when max_iter sweeps are exhausted.
Vec project_polytope(const Vec& v, const FeasibleSection& section, double tol = 1e-12,
                     int max_iter = 200000);

/// argmin of 1/2 y'qy + g'y over the section. One-dimensional sections are
/// solved in closed form, everything else by accelerated projected gradient
/// (FISTA with adaptive restart) until ||y - P(y - grad)|| <= tol.
/// Ties in a vanishing objective resolve to the projection of the lower
/// corner of the box.
Vec minimize_quadratic_1block(const Mat& q, const Vec& g, const FeasibleSection& section,
                              double tol = kSolveTol, int max_iter = 10000);

/// Exact emptiness test (interval arithmetic in 1-D, simplex phase one
/// otherwise).
bool section_is_empty(const FeasibleSection& section);

struct LinearMin {
  Vec argmin;
  double value = 0.0;
};

/// min g'y over the (bounded) section. Interval and box sections are solved
/// at an endpoint per coordinate (lower endpoint on zero slope); general
/// polytopes by a dense two-phase simplex.
LinearMin minimize_linear_1block(const Vec& g, const FeasibleSection& section,
                                 double tol = kSolveTol);

namespace detail {

/// min c'z s.t. M z <= h, 0 <= z <= u. Returns nullopt-equivalent via
/// throwing DomainError(-1) when infeasible.
Vec dense_simplex(const Vec& c, const Mat& m, const Vec& h, const Vec& u);

}  // namespace detail

}  // namespace gnep
