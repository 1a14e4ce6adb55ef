#include <doctest.h>

#include <random>

#include "gnep/error.hpp"
#include "gnep/nikaido_isoda.hpp"
#include "gnep/scenarios.hpp"
#include "oracles.hpp"

using namespace gnep;

namespace {

GameSpec cournot1() { return build_cournot(4, 1, {1, 1.5}, 1.0); }

BlockVector pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return BlockVector({1, 1}, v);
}

/// r_i J_i for a quadratic game.
GameSpec scaled(const GameSpec& g, const Vec& r) {
  std::vector<ObjectiveSpec> objs;
  for (int i = 0; i < g.num_players(); ++i) {
    auto q = std::get<QuadraticObjective>(g.objective(i));
    q.Q *= r[i];
    q.c *= r[i];
    q.d *= r[i];
    objs.emplace_back(q);
  }
  return GameSpec(g.dims(), objs, g.boxes(), g.constraints());
}

/// Uniform point of the Cournot triangle {x >= 0, x1 + x2 <= cap}.
BlockVector triangle_point(std::mt19937_64& rng, double cap) {
  std::uniform_real_distribution<double> u(0.0, cap);
  for (;;) {
    const double a = u(rng), b = u(rng);
    if (a + b <= cap) return pt(a, b);
  }
}

}  // namespace

TEST_CASE("psi examples") {
  const GameSpec g = cournot1();
  CHECK(psi(g, pt(0.75, 0.25), pt(0.75, 0.25)) == doctest::Approx(-1.875).epsilon(1e-14));
  CHECK(psi(g, pt(0.75, 0.25), pt(0, 0)) == 0.0);
  CHECK_THROWS_AS(psi(g, pt(0.75, 0.25), BlockVector({2})), DimensionError);
}

TEST_CASE("psi on the diagonal is the sum of objectives") {
  const GameSpec g = build_random_jointly_convex(3, {2, 1, 2}, 0.7, 5);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const BlockVector x = g.bundle(oracle::uniform_in(rng, g.lower(), g.upper()));
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += evaluate_objective(g, i, x);
    CHECK(std::abs(psi(g, x, x) - sum) <= 1e-12);
  }
}

TEST_CASE("merit at the variational equilibrium") {
  const GapReport r = merit_phi(cournot1(), pt(0.75, 0.25));
  CHECK(std::abs(r.gap) <= 1e-12);
  CHECK(r.argmin.values()[0] == doctest::Approx(0.75));
  CHECK(r.argmin.values()[1] == doctest::Approx(0.25));
  CHECK(r.fixed_point);
  CHECK(r.psi_xx == doctest::Approx(-1.875));
}

TEST_CASE("merit away from equilibrium") {
  const GapReport r = merit_phi(cournot1(), pt(0.5, 0.25));
  CHECK(r.gap == doctest::Approx(0.6875).epsilon(1e-12));
  REQUIRE(r.per_player_improvement.size() == 2);
  CHECK(r.per_player_improvement[0] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(r.per_player_improvement[1] == doctest::Approx(0.3125).epsilon(1e-12));
  CHECK(std::abs(r.gap - (r.per_player_improvement[0] + r.per_player_improvement[1])) <= 1e-10);
}

TEST_CASE("single player at its minimizer has zero gap") {
  Mat q(2, 2);
  q << 2, 0.5, 0.5, 1;
  Vec c(2);
  c << -3, 1;
  const GameSpec g = oracle::single_player(q, c, Vec::Zero(2), Vec::Ones(2));
  // The constrained minimizer (1, 0) satisfies the KKT signs: grad = (-1, 1.5).
  Vec x(3);
  x << 1, 0, 0;
  CHECK(std::abs(merit_phi(g, g.bundle(x)).gap) <= 1e-10);
  CHECK(is_gne(g, g.bundle(x), 1e-6));
}

TEST_CASE("merit outside the domain names the player") {
  try {
    merit_phi(cournot1(), pt(0.2, 1.5));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.player() == 0);
    CHECK(std::string(e.what()).find("player 0") != std::string::npos);
  }
}

TEST_CASE("is_gne examples") {
  const GameSpec g = cournot1();
  CHECK(is_gne(g, pt(0.75, 0.25), 1e-6));
  CHECK(is_gne(g, pt(0.5, 0.5), 1e-6));
  CHECK_FALSE(is_gne(g, pt(0.5, 0.25), 1e-6));
  CHECK_FALSE(is_gne(g, pt(0.8, 0.4), 1e-6));
}

TEST_CASE("qvi residual examples") {
  const GameSpec g = cournot1();
  CHECK(std::abs(qvi_residual(g, pt(0.75, 0.25))) <= 1e-12);
  // Brute-force LP over the product of sections [0,0.75] x [0,0.5].
  const Vec grad = (Vec(2) << -1.75, -1.5).finished();
  const oracle::Polytope sections{Vec::Zero(2), (Vec(2) << 0.75, 0.5).finished(), Mat(0, 2), Vec(0)};
  const double ref = *oracle::vertex_lp(grad, sections) - grad.dot((Vec(2) << 0.5, 0.25).finished());
  CHECK(ref == doctest::Approx(-0.8125));
  CHECK(qvi_residual(g, pt(0.5, 0.25)) == doctest::Approx(ref).epsilon(1e-12));
  const QuadraticObjective zero{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  const Box unit{Vec::Zero(1), Vec::Ones(1)};
  const GameSpec z({1, 1}, {zero, zero}, {unit, unit}, ConstantConstraints{});
  CHECK(qvi_residual(z, pt(0.3, 0.6)) == 0.0);
}

TEST_CASE("blockwise merit agrees with a joint minimization") {
  // Three-firm Cournot: Psi(x, .) over the product of sections, minimized
  // jointly by projected gradient with clamps.
  const double eta = 4, p = 1, cap = 2;
  const std::vector<double> costs{1, 1.5, 2};
  const GameSpec g = build_cournot(eta, p, costs, cap);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, cap);
  int tested = 0;
  while (tested < 50) {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x[k] = u(rng);
    if (x.sum() > cap) continue;
    ++tested;
    Vec hi(3);
    for (int i = 0; i < 3; ++i) hi[i] = cap - (x.sum() - x[i]);
    Vec y = Vec::Zero(3);
    for (int it = 0; it < 2000; ++it) {
      Vec grad(3);
      for (int i = 0; i < 3; ++i)
        grad[i] = 2 * p * y[i] + p * (x.sum() - x[i]) - (eta - costs[static_cast<std::size_t>(i)]);
      y = (y - grad / (2 * p)).cwiseMax(Vec::Zero(3)).cwiseMin(hi);
    }
    const BlockVector xb = g.bundle(x);
    const GapReport r = merit_phi(g, xb);
    CHECK(std::abs(r.phi - psi(g, xb, g.bundle(y))) <= 1e-8);
    CHECK(r.gap >= -1e-8);
  }
}

TEST_CASE("gap is nonnegative on random fixed points") {
  const GameSpec g = build_random_jointly_convex(2, {2, 2}, 1.0, 3);
  const FeasibleSection joint = joint_polytope(g);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vec v = project_polytope(oracle::uniform_in(rng, g.lower(), g.upper()), joint);
    const GapReport r = merit_phi(g, g.bundle(v));
    CHECK(r.gap >= -1e-8);
    for (double imp : r.per_player_improvement) CHECK(imp >= -kSolveTol);
  }
}

TEST_CASE("positive rescaling scales improvements and keeps verdicts") {
  const GameSpec g = cournot1();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Vec& r : {(Vec(2) << 1, 1).finished(), (Vec(2) << 2, 1).finished(),
                       (Vec(2) << 1, 5).finished()}) {
    const GameSpec gr = scaled(g, r);
    for (int k = 0; k < 100; ++k) {
      BlockVector x;
      if (k % 2 == 0) {
        const double a = u(rng);
        x = pt(a, 1 - a);
      } else {
        x = triangle_point(rng, 1.0);
      }
      const GapReport base = merit_phi(g, x);
      const GapReport sc = merit_phi(gr, x);
      for (int i = 0; i < 2; ++i)
        CHECK(sc.per_player_improvement[static_cast<std::size_t>(i)] ==
              doctest::Approx(r[i] * base.per_player_improvement[static_cast<std::size_t>(i)])
                  .epsilon(1e-9)
                  .scale(1e-12));
      CHECK(is_gne(g, x, 1e-6) == is_gne(gr, x, 1e-6));
    }
  }
}

TEST_CASE("small gap implies a small QVI residual") {
  // Empirical factor: on the sampled quadratic games the QVI residual stays
  // above -kFactor * tol wherever gap <= tol.
  constexpr double kFactor = 10.0;
  constexpr double tol = 1e-6;
  const GameSpec g = cournot1();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int small = 0;
  for (int k = 0; k < 400; ++k) {
    const double a = u(rng);
    const double shrink = (k % 4) * u(rng) * 2e-7;
    const BlockVector x = k % 5 == 4 ? triangle_point(rng, 1.0) : pt(a - shrink, 1 - a - shrink);
    if (!is_fixed_point(g, x)) continue;
    const double gap = merit_phi(g, x).gap;
    const double qvi = qvi_residual(g, x);
    CHECK(qvi <= 1e-12);
    if (gap <= tol) {
      ++small;
      CHECK(qvi >= -kFactor * tol);
    }
  }
  CHECK(small > 100);
}
