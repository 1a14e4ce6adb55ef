#include <doctest.h>

#include <random>

#include "gnep/error.hpp"
#include "gnep/section.hpp"
#include "oracles.hpp"

using namespace gnep;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

FeasibleSection simplex2() {
  return FeasibleSection(Vec::Zero(2), Vec::Constant(2, 10.0), Mat::Ones(1, 2), Vec::Ones(1));
}

/// Random 2-D polytope around the origin plus its oracle twin.
std::pair<FeasibleSection, oracle::Polytope> random_polytope(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec lo = v2(-0.5 - u(rng), -0.5 - u(rng));
  const Vec hi = v2(0.5 + u(rng), 0.5 + u(rng));
  const int m = 1 + static_cast<int>(u(rng) * 3);
  Mat rows(m, 2);
  Vec rhs(m);
  for (int k = 0; k < m; ++k) {
    rows.row(k) = v2(n(rng), n(rng)).transpose();
    rhs[k] = 0.1 + 0.5 * u(rng);
  }
  return {FeasibleSection(lo, hi, rows, rhs), oracle::Polytope{lo, hi, rows, rhs}};
}

}  // namespace

TEST_CASE("box projection") {
  CHECK(project_box(v2(2, -1), Vec::Zero(2), Vec::Ones(2)) == v2(1, 0));
  CHECK(project_box(v2(0.3, 0.6), Vec::Zero(2), Vec::Ones(2)) == v2(0.3, 0.6));
  CHECK(project_box(Vec::Constant(1, 0.5), Vec::Constant(1, 0.5), Vec::Constant(1, 0.5))[0] == 0.5);
}

TEST_CASE("polytope projection examples") {
  CHECK((project_polytope(v2(1, 1), simplex2()) - v2(0.5, 0.5)).norm() < 1e-9);
  const Vec inside = v2(0.2, 0.3);
  CHECK(project_polytope(inside, simplex2()) == inside);
  const FeasibleSection box(Vec::Zero(2), Vec::Ones(2));
  CHECK(project_polytope(v2(-1, -1), box) == v2(0, 0));
}

TEST_CASE("projection onto the simplex-like set matches the grid oracle") {
  const oracle::Polytope p{Vec::Zero(2), Vec::Constant(2, 10.0), Mat::Ones(1, 2), Vec::Ones(1)};
  // Projection of v is the QP min 1/2|y|^2 - v'y.
  const auto [arg, val] = oracle::grid_qp(Mat::Identity(2, 2), -v2(1, 1), p);
  (void)val;
  CHECK((arg - v2(0.5, 0.5)).norm() < 1e-3);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto [sec, poly] = random_polytope(rng);
    const Vec a = v2(n(rng), n(rng));
    const Vec b = v2(n(rng), n(rng));
    const Vec pa = project_polytope(a, sec);
    const Vec pb = project_polytope(b, sec);
    CHECK(sec.violation(pa) <= kFeasTol);
    CHECK((project_polytope(pa, sec) - pa).norm() <= 1e-10);
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-10);
    // Variational characterization: (a - pa).(y - pa) <= 0 for feasible y.
    for (int k = 0; k < 5; ++k) {
      const Vec y = project_polytope(v2(n(rng), n(rng)), sec);
      CHECK((a - pa).dot(y - pa) <= 1e-7);
    }
  }
}

TEST_CASE("section rows are normalized and degenerate rows checked") {
  Mat rows(2, 2);
  rows << 3, 4, 0, 0;
  const FeasibleSection s(Vec::Zero(2), Vec::Ones(2), rows, v2(5, 1));
  CHECK(s.num_rows() == 1);
  CHECK(s.rows().row(0).norm() == doctest::Approx(1.0));
  CHECK(s.rhs()[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(FeasibleSection(Vec::Zero(2), Vec::Ones(2), rows, v2(5, -1)),
                  PreconditionError);
}

TEST_CASE("one-dimensional quadratic subproblem") {
  const FeasibleSection s(Vec::Zero(1), Vec::Constant(1, 0.75));
  // y^2 - 2.75 y has q = 2.
  CHECK(minimize_quadratic_1block(Mat::Constant(1, 1, 2.0), Vec::Constant(1, -2.75), s)[0] ==
        doctest::Approx(0.75));
  const FeasibleSection wide(Vec::Zero(1), Vec::Constant(1, 2.0));
  CHECK(minimize_quadratic_1block(Mat::Constant(1, 1, 2.0), Vec::Constant(1, -2.75), wide)[0] ==
        doctest::Approx(1.375));
  const FeasibleSection cube(Vec::Constant(3, -1), Vec::Ones(3));
  CHECK(minimize_quadratic_1block(Mat::Identity(3, 3), Vec::Zero(3), cube).norm() < 1e-9);
}

TEST_CASE("non-PSD blocks are rejected") {
  const FeasibleSection s(Vec::Zero(2), Vec::Ones(2));
  Mat q(2, 2);
  q << 1, 0, 0, -1;
  CHECK_THROWS_AS(minimize_quadratic_1block(q, Vec::Zero(2), s), NotPsdError);
  CHECK_THROWS_AS(minimize_quadratic_1block(-Mat::Identity(1, 1), Vec::Zero(1),
                                            FeasibleSection(Vec::Zero(1), Vec::Ones(1))),
                  NotPsdError);
}

TEST_CASE("one-dimensional QP agrees with the grid oracle") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec lo = Vec::Constant(1, -u(rng)), hi = Vec::Constant(1, u(rng));
    const FeasibleSection sec(lo, hi);
    const Mat q = Mat::Constant(1, 1, u(rng));
    const Vec g = Vec::Constant(1, n(rng));
    const double y = minimize_quadratic_1block(q, g, sec)[0];
    const auto [ref, ref_val] = oracle::grid_qp(q, g, oracle::Polytope{lo, hi, Mat(0, 1), Vec(0)});
    CHECK(std::abs(y - ref[0]) <= 1e-3);
    CHECK(std::abs(0.5 * q(0, 0) * y * y + g[0] * y - ref_val) <= 1e-6);
  }
}

TEST_CASE("block QP agrees with the exact and grid oracles") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [sec, poly] = random_polytope(rng);
    Mat m(2, 2);
    m << n(rng), n(rng), n(rng), n(rng);
    const Mat q = m.transpose() * m + 0.1 * Mat::Identity(2, 2);
    const Vec g = v2(2 * n(rng), 2 * n(rng));
    const Vec y = minimize_quadratic_1block(q, g, sec);
    const auto [ref, ref_val] = oracle::active_set_qp(q, g, poly);
    const auto [grid, grid_val] = oracle::grid_qp(q, g, poly);
    REQUIRE(ref.size() == 2);
    REQUIRE(grid.size() == 2);
    const double val = 0.5 * y.dot(q * y) + g.dot(y);
    CHECK((y - ref).norm() <= 1e-3);
    CHECK(std::abs(val - ref_val) <= 1e-6);
    // The grid can only do worse than the true minimum.
    CHECK(val <= grid_val + 1e-9);
  }
}

TEST_CASE("zero objective resolves to the lower corner") {
  const FeasibleSection s(v2(-1, 0.5), v2(1, 2));
  CHECK(minimize_quadratic_1block(Mat::Zero(2, 2), Vec::Zero(2), s) == v2(-1, 0.5));
}

TEST_CASE("linear minimization on intervals picks endpoints") {
  const FeasibleSection s(Vec::Constant(1, 0.0), Vec::Constant(1, 0.75));
  CHECK(minimize_linear_1block(Vec::Constant(1, -1.75), s).argmin[0] == 0.75);
  CHECK(minimize_linear_1block(Vec::Constant(1, 2.0), s).argmin[0] == 0.0);
  const auto zero = minimize_linear_1block(Vec::Zero(1), s);
  CHECK(zero.value == 0.0);
  const FeasibleSection box(v2(0, -1), v2(1, 1));
  CHECK(minimize_linear_1block(v2(0.0, 1.0), box).argmin == v2(0, -1));
  const FeasibleSection rect(v2(0, 0), v2(0.75, 0.5));
  const auto lm = minimize_linear_1block(v2(-1.75, -1.5), rect);
  CHECK(lm.argmin == v2(0.75, 0.5));
  CHECK(lm.value == doctest::Approx(-2.0625));
}

TEST_CASE("linear minimization agrees with vertex enumeration") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [sec, poly] = random_polytope(rng);
    const Vec g = v2(n(rng), n(rng));
    const auto lm = minimize_linear_1block(g, sec);
    const auto ref = oracle::vertex_lp(g, poly);
    REQUIRE(ref.has_value());
    CHECK(lm.value == doctest::Approx(*ref).epsilon(1e-9).scale(1.0));
    CHECK(sec.violation(lm.argmin) <= kFeasTol);
  }
}

TEST_CASE("three-dimensional LP against vertex enumeration") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Mat rows(3, 3);
    Vec rhs(3);
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) rows(k, j) = n(rng);
      rhs[k] = 0.3 + std::abs(n(rng));
    }
    const Vec lo = Vec::Constant(3, -1.0), hi = Vec::Constant(3, 1.5);
    const FeasibleSection sec(lo, hi, rows, rhs);
    Vec g(3);
    for (int j = 0; j < 3; ++j) g[j] = n(rng);
    const auto ref = oracle::vertex_lp(g, oracle::Polytope{lo, hi, rows, rhs});
    REQUIRE(ref.has_value());
    CHECK(minimize_linear_1block(g, sec).value == doctest::Approx(*ref).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("emptiness detection") {
  Mat rows(2, 2);
  rows << 1, 1, -1, -1;
  CHECK(section_is_empty(FeasibleSection(Vec::Zero(2), Vec::Ones(2), rows, v2(0.5, -0.8))));
  CHECK_FALSE(section_is_empty(FeasibleSection(Vec::Zero(2), Vec::Ones(2), rows, v2(0.9, -0.8))));
  CHECK(section_is_empty(FeasibleSection(Vec::Zero(1), Vec::Ones(1), Mat::Ones(1, 1),
                                         Vec::Constant(1, -0.5))));
}
