#include "gnep/section.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gnep/error.hpp"

namespace gnep {

FeasibleSection::FeasibleSection(Vec lo, Vec hi)
    : FeasibleSection(std::move(lo), std::move(hi), Mat(0, 0), Vec(0)) {}

FeasibleSection::FeasibleSection(Vec lo, Vec hi, Mat rows, Vec rhs)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  const Eigen::Index n = lo_.size();
  if (hi_.size() != n) throw DimensionError("section bounds have different sizes");
  if (rows.size() == 0) rows.resize(0, n);
  if (rows.rows() != rhs.size() || rows.cols() != n)
    throw DimensionError("section rows do not match the bound dimension");
  if (!lo_.allFinite() || !hi_.allFinite())
    throw PreconditionError("section box must be bounded");

  std::vector<Eigen::Index> keep;
  Vec norms = rows.rowwise().norm();
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    if (norms[k] > 1e-14) {
      keep.push_back(k);
    } else if (rhs[k] < -kFeasTol) {
      throw PreconditionError("section row " + std::to_string(k) +
                              " has a zero normal and a negative right-hand side");
    }
  }
  rows_.resize(static_cast<Eigen::Index>(keep.size()), n);
  rhs_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto k = keep[r];
    rows_.row(static_cast<Eigen::Index>(r)) = rows.row(k) / norms[k];
    rhs_[static_cast<Eigen::Index>(r)] = rhs[k] / norms[k];
  }
}

double FeasibleSection::violation(const Vec& y) const {
  double worst = 0.0;
  worst = std::max(worst, (lo_ - y).maxCoeff());
  worst = std::max(worst, (y - hi_).maxCoeff());
  if (num_rows() > 0) worst = std::max(worst, (rows_ * y - rhs_).maxCoeff());
  return worst;
}

std::pair<double, double> FeasibleSection::interval() const {
  if (dim() != 1) throw PreconditionError("interval() needs a one-dimensional section");
  double l = lo_[0];
  double u = hi_[0];
  for (int k = 0; k < num_rows(); ++k) {
    const double a = rows_(k, 0);
    if (a > 0)
      u = std::min(u, rhs_[k] / a);
    else
      l = std::max(l, rhs_[k] / a);
  }
  return {l, u};
}

Vec project_box(const Vec& v, const Vec& lo, const Vec& hi) {
  if (v.size() != lo.size() || v.size() != hi.size())
    throw DimensionError("project_box: size mismatch");
  return v.cwiseMax(lo).cwiseMin(hi);
}

namespace {

std::pair<double, double> nonempty_interval(const FeasibleSection& section) {
  auto [l, u] = section.interval();
  if (l > u + kFeasTol) throw PreconditionError("empty one-dimensional section");
  if (l > u) l = u = 0.5 * (l + u);
  return {l, u};
}

// Exact projection of v onto the face picked out by the current Dykstra
// iterate: rows with a positive correction or no slack, and coordinates held
// at a bound. Accepted only when the KKT conditions hold.
std::optional<Vec> polish_projection(const Vec& v, const FeasibleSection& section, const Vec& x,
                                     const Vec& lambda, double tol) {
  const Mat& a = section.rows();
  const Vec& b = section.rhs();
  const int n = static_cast<int>(v.size());
  std::vector<int> act;
  for (int k = 0; k < section.num_rows(); ++k)
    if (lambda[k] > 0.0 || b[k] - a.row(k).dot(x) <= 1e-9) act.push_back(k);
  Vec y = v;
  std::vector<int> free;
  for (int j = 0; j < n; ++j) {
    if (x[j] <= section.lo()[j] + 1e-12) y[j] = section.lo()[j];
    else if (x[j] >= section.hi()[j] - 1e-12) y[j] = section.hi()[j];
    else free.push_back(j);
  }
  const int na = static_cast<int>(act.size());
  Vec mu = Vec::Zero(na);
  if (na > 0) {
    Mat af(na, static_cast<int>(free.size()));
    Vec r(na);
    for (int p = 0; p < na; ++p) {
      r[p] = a.row(act[static_cast<std::size_t>(p)]).dot(y) - b[act[static_cast<std::size_t>(p)]];
      for (std::size_t q = 0; q < free.size(); ++q) af(p, static_cast<int>(q)) = a(act[static_cast<std::size_t>(p)], free[q]);
    }
    mu = (af * af.transpose()).completeOrthogonalDecomposition().solve(r);
    for (std::size_t q = 0; q < free.size(); ++q) y[free[q]] -= af.col(static_cast<int>(q)).dot(mu);
  }
  if ((mu.array() < -tol).any() || section.violation(y) > tol) return std::nullopt;
  // Stationarity on the fixed coordinates: the residual must push outward.
  Vec push = v - y;
  for (int p = 0; p < na; ++p) push -= mu[p] * a.row(act[static_cast<std::size_t>(p)]).transpose();
  for (int j = 0; j < n; ++j) {
    if (y[j] == section.lo()[j] && y[j] != section.hi()[j] && push[j] > tol) return std::nullopt;
    if (y[j] == section.hi()[j] && y[j] != section.lo()[j] && push[j] < -tol) return std::nullopt;
  }
  return y;
}

}  // namespace

Vec project_polytope(const Vec& v, const FeasibleSection& section, double tol, int max_iter) {
  if (v.size() != section.dim()) throw DimensionError("project_polytope: size mismatch");
  if (section.is_box()) return project_box(v, section.lo(), section.hi());
  if (section.dim() == 1) {
    auto [l, u] = nonempty_interval(section);
    Vec out(1);
    out[0] = std::clamp(v[0], l, u);
    return out;
  }
  if (section.violation(v) <= 0.0) return v;

  const Mat at = section.rows().transpose();  // column k is row k
  const Vec& b = section.rhs();
  const int m = section.num_rows();
  Vec x = v;
  Vec box_increment = Vec::Zero(v.size());
  Vec lambda = Vec::Zero(m);
  double moved = 0.0;
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    const Vec previous = x;
    for (int k = 0; k < m; ++k) {
      const auto a = at.col(k);
      if (lambda[k] > 0.0) x.noalias() += lambda[k] * a;
      const double excess = a.dot(x) - b[k];
      if (excess > 0.0) {
        x.noalias() -= excess * a;
        lambda[k] = excess;
      } else {
        lambda[k] = 0.0;
      }
    }
    const Vec shifted = x + box_increment;
    x = shifted.cwiseMax(section.lo()).cwiseMin(section.hi());
    box_increment = shifted - x;

    moved = (x - previous).norm();
    if (moved < 1e-6 * std::max(1.0, x.norm()) && sweep % 8 == 0) {
      const double scale = std::max(1.0, v.lpNorm<Eigen::Infinity>());
      if (auto y = polish_projection(v, section, x, lambda, 1e-12 * scale)) return *y;
    }
    if (moved >= tol * std::max(1.0, x.norm()) || section.violation(x) > kFeasTol) continue;
    // The iterate can sit still for a few sweeps while the corrections are
    // still being redistributed, so also require complementary slackness:
    // v - x is always the sum of the corrections, and with it KKT holds.
    double gap = 0.0;
    for (int k = 0; k < m; ++k)
      if (lambda[k] > 0.0) gap = std::max(gap, lambda[k] * (b[k] - at.col(k).dot(x)));
    if (gap <= tol) return x;
  }
  throw ConvergenceError("Dykstra projection did not converge", x, moved);
}

Vec minimize_quadratic_1block(const Mat& q, const Vec& g, const FeasibleSection& section,
                              double tol, int max_iter) {
  const int n = section.dim();
  if (q.rows() != n || q.cols() != n || g.size() != n)
    throw DimensionError("minimize_quadratic_1block: size mismatch");

  if (n == 1) {
    auto [l, u] = nonempty_interval(section);
    const double a = q(0, 0);
    if (a < -1e-12) throw NotPsdError("negative curvature in a one-dimensional block");
    Vec y(1);
    if (a <= 1e-14)
      y[0] = g[0] < 0.0 ? u : l;
    else
      y[0] = std::clamp(-g[0] / a, l, u);
    return y;
  }

  const Mat sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin < -1e-10 * std::max(1.0, std::abs(lmax)))
    throw NotPsdError("block matrix has negative curvature (min eigenvalue " +
                      std::to_string(lmin) + ")");
  if (lmax <= 1e-14) {
    if (g.isZero(0.0)) return project_polytope(section.lo(), section);
    return minimize_linear_1block(g, section, tol).argmin;
  }

  const double step = 1.0 / lmax;
  const double proj_tol = 1e-13;
  auto residual_at = [&](const Vec& y) {
    const Vec grad = sym * y + g;
    return (y - project_polytope(y - grad, section, proj_tol)).norm();
  };

  Vec y = project_polytope(section.lo(), section, proj_tol);
  Vec z = y;
  double t = 1.0;
  double residual = residual_at(y);
  for (int it = 0; it < max_iter && residual > tol; ++it) {
    const Vec grad = sym * z + g;
    Vec next = project_polytope(z - step * grad, section, proj_tol);
    // Adaptive restart when momentum points uphill.
    if ((next - y).dot(grad) > 0.0) t = 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - y);
    y = std::move(next);
    t = t_next;
    residual = residual_at(y);
  }
  if (residual > tol)
    throw ConvergenceError("projected gradient did not reach the stationarity tolerance", y,
                           residual);
  return y;
}

bool section_is_empty(const FeasibleSection& section) {
  if (section.dim() == 1) {
    auto [l, u] = section.interval();
    return l > u + kFeasTol;
  }
  if ((section.lo().array() > section.hi().array()).any()) return true;
  if (section.is_box()) return false;
  try {
    detail::dense_simplex(Vec::Zero(section.dim()), section.rows(),
                          section.rhs() - section.rows() * section.lo(),
                          section.hi() - section.lo());
  } catch (const DomainError&) {
    return true;
  }
  return false;
}

LinearMin minimize_linear_1block(const Vec& g, const FeasibleSection& section, double tol) {
  (void)tol;
  const int n = section.dim();
  if (g.size() != n) throw DimensionError("minimize_linear_1block: size mismatch");
  LinearMin out;
  if (g.isZero(0.0)) {
    out.argmin = project_polytope(section.lo(), section);
    out.value = 0.0;
    return out;
  }
  if (n == 1) {
    auto [l, u] = nonempty_interval(section);
    out.argmin = Vec::Constant(1, g[0] < 0.0 ? u : l);
  } else if (section.is_box()) {
    out.argmin.resize(n);
    for (int j = 0; j < n; ++j)
      out.argmin[j] = g[j] < 0.0 ? section.hi()[j] : section.lo()[j];
  } else {
    const Vec upper = section.hi() - section.lo();
    const Vec h = section.rhs() - section.rows() * section.lo();
    const Vec z = detail::dense_simplex(g, section.rows(), h, upper);
    out.argmin = section.lo() + z;
  }
  out.value = g.dot(out.argmin);
  return out;
}

}  // namespace gnep
