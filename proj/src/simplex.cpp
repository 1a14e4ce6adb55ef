// Dense two-phase tableau simplex with Bland's rule. Only meant for the
// small linear programs that appear when certifying equilibria.

#include <cmath>
#include <vector>

#include "gnep/error.hpp"
#include "gnep/section.hpp"

namespace gnep::detail {

namespace {

constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  Tableau(Mat body, std::vector<int> basis) : t_(std::move(body)), basis_(std::move(basis)) {}

  int rows() const { return static_cast<int>(t_.rows()); }
  int rhs_col() const { return static_cast<int>(t_.cols()) - 1; }
  const Mat& body() const { return t_; }
  const std::vector<int>& basis() const { return basis_; }

  void pivot(int r, int col) {
    t_.row(r) /= t_(r, col);
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = col;
  }

  /// Minimizes cost'w over the current feasible basis. Columns with
  /// allowed[j] == false never enter.
  void optimize(const Vec& cost, const std::vector<bool>& allowed) {
    const int ncol = rhs_col();
    for (int guard = 0; guard < 100000; ++guard) {
      Vec reduced = cost;
      for (int i = 0; i < rows(); ++i) {
        const double cb = cost[basis_[static_cast<std::size_t>(i)]];
        if (cb != 0.0) reduced -= cb * t_.row(i).head(ncol).transpose();
      }
      int enter = -1;
      for (int j = 0; j < ncol; ++j) {
        if (allowed[static_cast<std::size_t>(j)] && reduced[j] < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(i, ncol) / a;
        if (leave < 0 || ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) throw PreconditionError("linear program is unbounded");
      pivot(leave, enter);
    }
    throw Error("simplex iteration guard exceeded");
  }

 private:
  Mat t_;
  std::vector<int> basis_;
};

}  // namespace

Vec dense_simplex(const Vec& c, const Mat& m, const Vec& h, const Vec& u) {
  const int n = static_cast<int>(c.size());
  const int mr = static_cast<int>(m.rows());
  const int nrow = mr + n;

  Mat rows(nrow, n);
  rows.topRows(mr) = m;
  rows.bottomRows(n) = Mat::Identity(n, n);
  Vec rhs(nrow);
  rhs << h, u;

  int nart = 0;
  for (int r = 0; r < nrow; ++r)
    if (rhs[r] < 0.0) ++nart;
  const int ncol = n + nrow + nart;

  Mat body = Mat::Zero(nrow, ncol + 1);
  std::vector<int> basis(static_cast<std::size_t>(nrow));
  int art = 0;
  for (int r = 0; r < nrow; ++r) {
    const double sign = rhs[r] < 0.0 ? -1.0 : 1.0;
    body.row(r).head(n) = sign * rows.row(r);
    body(r, n + r) = sign;
    body(r, ncol) = sign * rhs[r];
    if (sign < 0.0) {
      body(r, n + nrow + art) = 1.0;
      basis[static_cast<std::size_t>(r)] = n + nrow + art;
      ++art;
    } else {
      basis[static_cast<std::size_t>(r)] = n + r;
    }
  }
  Tableau tab(std::move(body), std::move(basis));
  const auto is_art = [&](int j) { return j >= n + nrow; };

  if (nart > 0) {
    Vec phase1 = Vec::Zero(ncol);
    phase1.tail(nart).setOnes();
    tab.optimize(phase1, std::vector<bool>(static_cast<std::size_t>(ncol), true));
    double infeas = 0.0;
    for (int i = 0; i < nrow; ++i)
      if (is_art(tab.basis()[static_cast<std::size_t>(i)])) infeas += tab.body()(i, ncol);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (infeas > 1e-9 * scale) throw DomainError("polytope is empty", -1);
    for (int i = 0; i < nrow; ++i) {
      if (!is_art(tab.basis()[static_cast<std::size_t>(i)])) continue;
      for (int j = 0; j < n + nrow; ++j) {
        if (std::abs(tab.body()(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  Vec phase2 = Vec::Zero(ncol);
  phase2.head(n) = c;
  std::vector<bool> allowed(static_cast<std::size_t>(ncol), true);
  for (int j = n + nrow; j < ncol; ++j) allowed[static_cast<std::size_t>(j)] = false;
  tab.optimize(phase2, allowed);

  Vec z = Vec::Zero(n);
  for (int i = 0; i < nrow; ++i) {
    const int j = tab.basis()[static_cast<std::size_t>(i)];
    if (j < n) z[j] = tab.body()(i, ncol);
  }
  return z.cwiseMax(0.0).cwiseMin(u);
}

}  // namespace gnep::detail
