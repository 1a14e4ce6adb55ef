#include <doctest.h>

#include <random>

#include "gnep/error.hpp"
#include "gnep/game.hpp"
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

}  // namespace

TEST_CASE("block vector replace round trip is bitwise") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<int> dims{1 + trial % 3, 2, 1 + trial % 2};
    Vec v(dims[0] + dims[1] + dims[2]);
    for (int k = 0; k < v.size(); ++k) v[k] = n(rng);
    const BlockVector x(dims, v);
    const int i = trial % 3;
    Vec xi(dims[static_cast<std::size_t>(i)]);
    for (int k = 0; k < xi.size(); ++k) xi[k] = n(rng);
    const BlockVector y = x.with_block(i, xi);
    CHECK(y.block(i) == xi);
    for (int j = 0; j < 3; ++j)
      if (j != i) CHECK(y.block(j) == x.block(j));
    CHECK(y.with_block(i, x.block(i)) == x);
  }
}

TEST_CASE("block vector rejects bad input") {
  CHECK_THROWS_AS(BlockVector({1, 0}), DimensionError);
  CHECK_THROWS_AS(BlockVector({1, 1}, Vec::Zero(3)), DimensionError);
  CHECK_THROWS_AS(BlockVector({1, 1}, Vec::Constant(2, std::nan(""))), DimensionError);
  BlockVector x({2, 1});
  CHECK_THROWS_AS(x.set_block(0, Vec::Zero(1)), DimensionError);
  CHECK_THROWS_AS(x.set_block(2, Vec::Zero(1)), DimensionError);
  CHECK(x.size() == 3);
  CHECK(x.offset(1) == 2);
}

TEST_CASE("cournot objective values") {
  const GameSpec g = cournot1();
  CHECK(evaluate_objective(g, 0, pt(1, 1)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(evaluate_objective(g, 1, pt(0.75, 0.25)) == doctest::Approx(-0.375).epsilon(1e-14));
  CHECK(evaluate_objective(g, 0, pt(0.75, 0.25)) == doctest::Approx(-1.5).epsilon(1e-14));
}

TEST_CASE("zero objective evaluates to zero") {
  const QuadraticObjective zero{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  const GameSpec g({1, 1}, {zero, zero}, {{Vec::Zero(1), Vec::Ones(1)}, {Vec::Zero(1), Vec::Ones(1)}},
                   ConstantConstraints{});
  CHECK(evaluate_objective(g, 0, pt(0.3, 0.9)) == 0.0);
  CHECK(partial_gradient(g, 1, pt(0.3, 0.9))[0] == 0.0);
}

TEST_CASE("dimension mismatch names the offending player") {
  const GameSpec g = cournot1();
  CHECK_THROWS_AS(evaluate_objective(g, 0, BlockVector({2}, Vec::Zero(2))), DimensionError);
  try {
    evaluate_objective(g, 5, pt(0, 0));
    FAIL("expected an error");
  } catch (const DimensionError& e) {
    CHECK(e.player() == 5);
  }
}

TEST_CASE("cournot partial gradients") {
  const GameSpec g = cournot1();
  CHECK(partial_gradient(g, 0, pt(1, 1))[0] == doctest::Approx(0.0));
  CHECK(partial_gradient(g, 1, pt(0.75, 0.25))[0] == doctest::Approx(-1.25));
  CHECK(partial_gradient(g, 0, pt(0.75, 0.25))[0] == doctest::Approx(-1.25));
}

TEST_CASE("identity objective gradient is the own block") {
  const QuadraticObjective half_norm{Mat::Identity(3, 3), Vec::Zero(3), 0.0};
  const GameSpec g({2, 1}, {half_norm, half_norm},
                   {{Vec::Constant(2, -1), Vec::Ones(2)}, {Vec::Constant(1, -1), Vec::Ones(1)}},
                   ConstantConstraints{});
  const BlockVector e1({2, 1}, Vec::Unit(3, 0));
  CHECK(partial_gradient(g, 0, e1) == e1.block(0));
}

TEST_CASE("oracle objective without gradient") {
  OracleObjective o;
  o.evaluate = [](const BlockVector& x) { return x.values().squaredNorm(); };
  const GameSpec g({1, 1}, {o, o}, {{Vec::Zero(1), Vec::Ones(1)}, {Vec::Zero(1), Vec::Ones(1)}},
                   ConstantConstraints{});
  CHECK(evaluate_objective(g, 0, pt(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(partial_gradient(g, 0, pt(0.5, 0.5)), GradientUnavailable);
  CHECK_FALSE(has_gradients(g));
}

TEST_CASE("feasibility under the shared cap") {
  const GameSpec g = cournot1();
  CHECK(feasible(g, 0, Vec::Constant(1, 0.75), pt(0, 0.25)));
  CHECK_FALSE(feasible(g, 0, Vec::Constant(1, 0.9), pt(0, 0.25)));
  CHECK_FALSE(feasible(g, 0, Vec::Constant(1, -0.1), pt(0, 0.25)));
  const GameSpec free = build_cournot(4, 1, {1, 1.5});
  CHECK(feasible(free, 0, Vec::Constant(1, 3.9), pt(0, 3.9)));
  CHECK_FALSE(feasible(free, 0, Vec::Constant(1, 4.1), pt(0, 0)));
}

TEST_CASE("fixed points of the shared map") {
  const GameSpec g = cournot1();
  CHECK(is_fixed_point(g, pt(0.5, 0.5)));
  CHECK_FALSE(is_fixed_point(g, pt(0.8, 0.4)));
  CHECK(is_fixed_point(g, g.bundle(g.shared_set()->feasible_point)));
}

TEST_CASE("game validation") {
  const QuadraticObjective zero{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  const Box unit{Vec::Zero(1), Vec::Ones(1)};
  CHECK_THROWS_AS(GameSpec({1}, {QuadraticObjective{Mat::Zero(1, 1), Vec::Zero(1), 0}}, {unit},
                           ConstantConstraints{}),
                  PreconditionError);
  CHECK_THROWS_AS(GameSpec({1, 1}, {zero, zero},
                           {unit, {Vec::Zero(1), Vec::Constant(1, INFINITY)}},
                           ConstantConstraints{}),
                  PreconditionError);
  CHECK_THROWS_AS(GameSpec({1, 1}, {zero, zero}, {unit, {Vec::Ones(1), Vec::Zero(1)}},
                           ConstantConstraints{}),
                  PreconditionError);
  QuadraticObjective concave{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  concave.Q(0, 0) = -1.0;
  CHECK_THROWS_AS(GameSpec({1, 1}, {concave, zero}, {unit, unit}, ConstantConstraints{}),
                  NotPsdError);
  QuadraticObjective skew{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  skew.Q(0, 1) = 1.0;
  CHECK_THROWS_AS(GameSpec({1, 1}, {skew, zero}, {unit, unit}, ConstantConstraints{}),
                  PreconditionError);
  SharedSet bad;
  bad.A = Mat::Ones(1, 2);
  bad.b = Vec::Constant(1, -1.0);
  bad.feasible_point = Vec::Zero(2);
  CHECK_THROWS_AS(GameSpec({1, 1}, {zero, zero}, {unit, unit}, SharedConstraints{bad}),
                  PreconditionError);
  CHECK_THROWS_AS(WeightVector(Vec::Constant(2, 0.0)), PreconditionError);
}

TEST_CASE("gradient consistency with central differences") {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = build_random_jointly_convex(3, {2, 3, 1}, 0.7, seed);
    for (int s = 0; s < 10; ++s) {
      const BlockVector x = g.bundle(oracle::uniform_in(rng, g.lower(), g.upper()));
      const int i = s % 3;
      const Vec exact = partial_gradient(g, i, x);
      const Vec fd = oracle::finite_difference(g, i, x);
      CHECK((exact - fd).norm() <= 1e-6 * std::max(1.0, exact.norm()));
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("shared sections are convex") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GameSpec g = build_random_jointly_convex(2, {2, 2}, 0.8, 4);
  int tested = 0;
  for (int trial = 0; trial < 2000 && tested < 200; ++trial) {
    // Shrunk draws, since uniform box points rarely land in the section.
    const BlockVector x = g.bundle(u(rng) * oracle::uniform_in(rng, g.lower(), g.upper()));
    const int i = trial % 2;
    const Vec a = u(rng) * oracle::uniform_in(rng, g.box(i).lo, g.box(i).hi);
    const Vec b = u(rng) * oracle::uniform_in(rng, g.box(i).lo, g.box(i).hi);
    if (!feasible(g, i, a, x) || !feasible(g, i, b, x)) continue;
    for (int k = 0; k < 5; ++k) {
      const double t = u(rng);
      CHECK(feasible(g, i, t * a + (1 - t) * b, x));
    }
    ++tested;
  }
  CHECK(tested >= 50);
}

TEST_CASE("fixed points coincide with direct membership in C") {
  std::mt19937_64 rng(8);
  const GameSpec g = build_random_jointly_convex(2, {2, 1}, 0.9, 2);
  const SharedSet& c = *g.shared_set();
  int agree = 0;
  for (int s = 0; s < 1000; ++s) {
    // Shrink toward 0 so both outcomes occur often.
    const double scale = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Vec v = scale * oracle::uniform_in(rng, g.lower(), g.upper());
    const bool direct = ((c.A * v - c.b).array() <= kFeasTol).all() &&
                        ((v - g.lower()).array() >= -kFeasTol).all() &&
                        ((v - g.upper()).array() <= kFeasTol).all();
    agree += is_fixed_point(g, g.bundle(v)) == direct;
  }
  CHECK(agree == 1000);
}

TEST_CASE("player sections freeze the opponents") {
  const GameSpec g = cournot1();
  const FeasibleSection s = player_section(g, 0, pt(0.3, 0.25));
  const auto [lo, hi] = s.interval();
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(0.75));
  try {
    player_section(g, 1, pt(2.0, 0.0));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.player() == 1);
  }
}

TEST_CASE("owner-tagged rows only cut their owner") {
  const QuadraticObjective zero{Mat::Zero(2, 2), Vec::Zero(2), 0.0};
  const Box unit{Vec::Zero(1), Vec::Ones(1)};
  SharedSet s;
  s.A = Mat::Ones(2, 2);
  s.b = Vec(2);
  s.b << 1.0, 0.5;
  s.owners = {0, 1};
  s.feasible_point = Vec::Zero(2);
  const GameSpec g({1, 1}, {zero, zero}, {unit, unit}, SharedConstraints{s});
  CHECK(feasible(g, 0, Vec::Constant(1, 0.7), pt(0, 0.2)));
  CHECK_FALSE(feasible(g, 1, Vec::Constant(1, 0.2), pt(0.7, 0)));
  CHECK_FALSE(is_fixed_point(g, pt(0.7, 0.2)));
  CHECK(is_fixed_point(g, pt(0.3, 0.2)));
}
