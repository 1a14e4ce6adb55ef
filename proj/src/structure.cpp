#include "gnep/structure.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "gnep/error.hpp"

namespace gnep {

Rng sample_rng(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return Rng(seq);
}

namespace {

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec uniform_box(Rng& rng, const Vec& lo, const Vec& hi) {
  Vec v(lo.size());
  for (int j = 0; j < v.size(); ++j) v[j] = uniform(rng, lo[j], hi[j]);
  return v;
}

// Open interval (0, 1), as convex combinations with a zero weight test nothing.
double open_unit(Rng& rng) {
  double t = 0.0;
  while (t == 0.0) t = uniform(rng);
  return t;
}

Vec scalar(double v) { return Vec::Constant(1, v); }

constexpr double kAtomProbability = 0.05;

}  // namespace

IntervalMap builtin_interval_map(const std::string& name) {
  if (name == "kkm-demo-a")
    return {name, [](double) { return 0.0; }, [](double x) { return x == 0.0 ? 1.0 : x; }, {0.0}};
  if (name == "kkm-demo-b")
    return {name, [](double x) { return x <= 0.5 ? 0.0 : x; },
            [](double x) { return x <= 0.5 ? x : 1.0; }, {0.5}};
  if (name == "shifted")
    return {name, [](double x) { return x + 1.0; }, [](double x) { return x + 1.0; }, {}};
  if (name == "constant")
    return {name, [](double) { return 0.0; }, [](double) { return 1.0; }, {}};
  if (name == "ramp") return {name, [](double) { return 0.0; }, [](double x) { return x; }, {}};
  throw PreconditionError("unknown map '" + name + "'");
}

std::vector<std::string> builtin_map_names() {
  return {"kkm-demo-a", "kkm-demo-b", "shifted", "constant", "ramp"};
}

double interval_distance(const IntervalMap& map, double x, double y) {
  const double lo = map.lo(x);
  const double hi = map.hi(x);
  if (lo > hi) return std::numeric_limits<double>::infinity();
  return std::max({0.0, lo - y, y - hi});
}

SetValuedOracle interval_oracle(const IntervalMap& map) {
  SetValuedOracle o;
  o.name = map.name;
  std::vector<double> atoms{0.0, 1.0};
  atoms.insert(atoms.end(), map.breakpoints.begin(), map.breakpoints.end());
  o.sample_domain = [atoms](Rng& rng) {
    if (uniform(rng) < kAtomProbability) {
      std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
      return scalar(atoms[pick(rng)]);
    }
    return scalar(uniform(rng));
  };
  o.membership = [map](const Vec& x, const Vec& y) {
    if (x.size() != 1 || y.size() != 1) return false;
    if (x[0] < 0.0 || x[0] > 1.0) return false;
    return interval_distance(map, x[0], y[0]) <= kFeasTol;
  };
  o.sample_range = [map](const Vec& x, Rng& rng) -> std::optional<Vec> {
    const double lo = map.lo(x[0]);
    const double hi = map.hi(x[0]);
    if (lo > hi) return std::nullopt;
    const double u = uniform(rng);
    if (u < kAtomProbability / 2) return scalar(lo);
    if (u < kAtomProbability) return scalar(hi);
    return scalar(uniform(rng, lo, hi));
  };
  return o;
}

SetValuedOracle constraint_map_oracle(const GameSpec& game) {
  auto g = std::make_shared<const GameSpec>(game);
  const FeasibleSection joint = joint_polytope(game);
  SetValuedOracle o;
  o.name = "constraint-map";
  // Uniform box points miss most of the domain when C is thin, so a third of
  // the draws are projected onto C and a third land between the two.
  o.sample_domain = [g, joint](Rng& rng) {
    const Vec u = uniform_box(rng, g->lower(), g->upper());
    const double mode = uniform(rng);
    if (mode < 1.0 / 3.0) return u;
    const Vec p = project_polytope(u, joint);
    if (mode < 2.0 / 3.0) return p;
    const double t = uniform(rng);
    return Vec(t * u + (1.0 - t) * p);
  };
  o.membership = [g](const Vec& x, const Vec& y) {
    if (x.size() != g->total_dim() || y.size() != g->total_dim()) return false;
    const BlockVector bx = g->bundle(x);
    const BlockVector by = g->bundle(y);
    for (int i = 0; i < g->num_players(); ++i)
      if (!feasible(*g, i, by.block(i), bx)) return false;
    return true;
  };
  o.sample_range = [g](const Vec& x, Rng& rng) -> std::optional<Vec> {
    const BlockVector bx = g->bundle(x);
    Vec y(g->total_dim());
    for (int i = 0; i < g->num_players(); ++i) {
      FeasibleSection sec;
      try {
        sec = player_section(*g, i, bx);
      } catch (const DomainError&) {
        return std::nullopt;
      }
      Vec z = uniform_box(rng, sec.lo(), sec.hi());
      if (!sec.contains(z, 0.0)) z = project_polytope(z, sec);
      y.segment(g->offset(i), bx.dim(i)) = z;
    }
    return y;
  };
  return o;
}

namespace {

struct GraphPair {
  Vec x, y, xp, yp;
  double theta = 0.0;
  bool found = false;
};

std::optional<std::pair<Vec, Vec>> draw_graph_point(const SetValuedOracle& o, Rng& rng) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    Vec x = o.sample_domain(rng);
    if (auto y = o.sample_range(x, rng)) return std::make_pair(std::move(x), std::move(*y));
  }
  return std::nullopt;
}

GraphPair draw_pair(const SetValuedOracle& o, std::uint64_t seed, std::size_t k) {
  Rng rng = sample_rng(seed, k);
  GraphPair p;
  auto a = draw_graph_point(o, rng);
  if (!a) return p;
  auto b = draw_graph_point(o, rng);
  if (!b) return p;
  p.x = std::move(a->first);
  p.y = std::move(a->second);
  p.xp = std::move(b->first);
  p.yp = std::move(b->second);
  p.theta = open_unit(rng);
  p.found = true;
  return p;
}

}  // namespace

Verdict check_graph_convexity(const SetValuedOracle& oracle, int n_samples, std::uint64_t seed,
                              Exec exec) {
  if (n_samples < 1) throw PreconditionError("n_samples must be at least 1");
  if (!oracle.sample_range) throw PreconditionError("graph sampling needs a range sampler");
  std::atomic<bool> any_found{false};
  const auto violates = [&](const GraphPair& p) {
    const Vec xc = p.theta * p.x + (1.0 - p.theta) * p.xp;
    const Vec yc = p.theta * p.y + (1.0 - p.theta) * p.yp;
    return !oracle.membership(xc, yc);
  };
  const auto hit = find_first(exec, static_cast<std::size_t>(n_samples), [&](std::size_t k) {
    const GraphPair p = draw_pair(oracle, seed, k);
    if (!p.found) return false;
    any_found.store(true, std::memory_order_relaxed);
    return violates(p);
  });
  Verdict v;
  v.seed = seed;
  if (!hit) {
    if (!any_found.load()) throw DomainError("graph appears empty", -1);
    v.samples_tested = n_samples;
    return v;
  }
  const GraphPair p = draw_pair(oracle, seed, *hit);
  v.holds = false;
  v.samples_tested = static_cast<int>(*hit) + 1;
  Witness w;
  w.condition = "graph_convexity";
  w.points = {p.x, p.y, p.xp, p.yp};
  w.coefficients = {p.theta};
  w.value = 1.0;
  v.witness = std::move(w);
  return v;
}

bool replay_graph_convexity(const SetValuedOracle& oracle, const Witness& w) {
  if (w.condition != "graph_convexity" || w.points.size() != 4 || w.coefficients.size() != 1)
    return false;
  const double t = w.coefficients[0];
  if (!(t > 0.0 && t < 1.0)) return false;
  if (!oracle.membership(w.points[0], w.points[1])) return false;
  if (!oracle.membership(w.points[2], w.points[3])) return false;
  const Vec xc = t * w.points[0] + (1.0 - t) * w.points[2];
  const Vec yc = t * w.points[1] + (1.0 - t) * w.points[3];
  return !oracle.membership(xc, yc);
}

namespace {

struct KkmProbe {
  std::vector<Vec> points;
  std::vector<double> weights;
  Vec z;
};

bool covered(const SetValuedOracle& o, const std::vector<Vec>& points, const Vec& z) {
  return std::any_of(points.begin(), points.end(),
                     [&](const Vec& x) { return o.membership(x, z); });
}

// Draws subset k and its hull samples; stops at the first uncovered hull point
// and reports it through `out` when given.
bool kkm_subset(const SetValuedOracle& o, int max_size, int hull_samples, std::uint64_t seed,
                std::size_t k, KkmProbe* out) {
  Rng rng = sample_rng(seed, k);
  const int size = std::uniform_int_distribution<int>(1, max_size)(rng);
  std::vector<Vec> points;
  points.reserve(static_cast<std::size_t>(size));
  for (int j = 0; j < size; ++j) points.push_back(o.sample_domain(rng));
  std::exponential_distribution<double> gamma1(1.0);
  std::vector<double> w(static_cast<std::size_t>(size));
  for (int h = 0; h < hull_samples; ++h) {
    double total = 0.0;
    for (auto& wj : w) total += (wj = gamma1(rng));
    Vec z = Vec::Zero(points.front().size());
    for (int j = 0; j < size; ++j) {
      w[static_cast<std::size_t>(j)] /= total;
      z += w[static_cast<std::size_t>(j)] * points[static_cast<std::size_t>(j)];
    }
    if (!covered(o, points, z)) {
      if (out) *out = {points, w, z};
      return true;
    }
  }
  return false;
}

}  // namespace

Verdict check_kkm(const SetValuedOracle& oracle, int n_subsets, int max_subset_size,
                  int hull_samples, std::uint64_t seed, Exec exec) {
  if (n_subsets < 1 || hull_samples < 1 || max_subset_size < 1)
    throw PreconditionError("KKM budgets must be positive");
  const auto hit = find_first(exec, static_cast<std::size_t>(n_subsets), [&](std::size_t k) {
    return kkm_subset(oracle, max_subset_size, hull_samples, seed, k, nullptr);
  });
  Verdict v;
  v.seed = seed;
  if (!hit) {
    v.samples_tested = n_subsets * hull_samples;
    return v;
  }
  KkmProbe probe;
  kkm_subset(oracle, max_subset_size, hull_samples, seed, *hit, &probe);
  v.holds = false;
  v.samples_tested = static_cast<int>(*hit + 1) * hull_samples;
  Witness w;
  w.condition = "kkm";
  w.points = probe.points;
  w.points.push_back(probe.z);
  w.coefficients = probe.weights;
  w.value = 1.0;
  v.witness = std::move(w);
  return v;
}

bool replay_kkm(const SetValuedOracle& oracle, const Witness& w) {
  if (w.condition != "kkm" || w.points.size() < 2 ||
      w.coefficients.size() + 1 != w.points.size())
    return false;
  std::vector<Vec> points(w.points.begin(), w.points.end() - 1);
  Vec z = Vec::Zero(points.front().size());
  double total = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (w.coefficients[j] < 0.0) return false;
    z += w.coefficients[j] * points[j];
    total += w.coefficients[j];
  }
  if (std::abs(total - 1.0) > 1e-12) return false;
  return !covered(oracle, points, z);
}

namespace {

double dsc_expression(const GameSpec& game, const WeightVector& r, const Vec& x, const Vec& y) {
  const Vec dx = pseudogradient(game, r, game.bundle(x)).values();
  const Vec dy = pseudogradient(game, r, game.bundle(y)).values();
  return dx.dot(y - x) + dy.dot(x - y);
}

bool dsc_violated(const GameSpec& game, const WeightVector& r, const Vec& x, const Vec& y) {
  const double dist2 = (y - x).squaredNorm();
  if (dist2 == 0.0) return false;
  return dsc_expression(game, r, x, y) >= -1e-12 * dist2;
}

std::pair<Vec, Vec> dsc_pair(const FeasibleSection& poly, std::uint64_t seed, std::size_t k) {
  Rng rng = sample_rng(seed, k);
  Vec x = uniform_box(rng, poly.lo(), poly.hi());
  Vec y = uniform_box(rng, poly.lo(), poly.hi());
  return {project_polytope(x, poly), project_polytope(y, poly)};
}

}  // namespace

Verdict check_dsc(const GameSpec& game, const WeightVector& r, int n_pairs, std::uint64_t seed,
                  Exec exec) {
  if (n_pairs < 1) throw PreconditionError("n_pairs must be at least 1");
  if (!has_gradients(game)) throw GradientUnavailable("DSC check needs gradients");
  if (r.size() != game.num_players())
    throw DimensionError("weight vector must have one entry per player");
  const FeasibleSection poly = joint_polytope(game);

  const auto hit = find_first(exec, static_cast<std::size_t>(n_pairs), [&](std::size_t k) {
    const auto [x, y] = dsc_pair(poly, seed, k);
    return dsc_violated(game, r, x, y);
  });
  Verdict v;
  v.seed = seed;
  v.samples_tested = hit ? static_cast<int>(*hit) + 1 : n_pairs;
  if (hit) {
    const auto [x, y] = dsc_pair(poly, seed, *hit);
    v.holds = false;
    v.witness = Witness{"dsc", {x, y}, {}, dsc_expression(game, r, x, y), -1};
  }
  if (!game.all_quadratic()) return v;

  v.sampled_holds = v.holds;
  const Mat jac = pseudogradient_jacobian(game, r);
  const Mat sym = jac + jac.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  const double lmin = eig.eigenvalues()[0];
  v.min_eigenvalue = lmin;
  if (lmin > 0.0 || !v.holds) return v;

  // The sampling pass missed the bad directions. Step along the eigenvector
  // from an interior-ish point of C to get a concrete pair.
  v.holds = false;
  const Vec dir = eig.eigenvectors().col(0);
  const Vec a = project_polytope(poly.lo(), poly);
  const Vec b = project_polytope(0.5 * (poly.lo() + poly.hi()), poly);
  const Vec center = 0.5 * (a + b);
  for (double sign : {1.0, -1.0}) {
    double t = (poly.hi() - poly.lo()).norm();
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const Vec y = center + sign * t * dir;
      if (poly.contains(y, 0.0) && dsc_violated(game, r, center, y)) {
        v.witness = Witness{"dsc", {center, y}, {}, dsc_expression(game, r, center, y), -1};
        return v;
      }
    }
  }
  v.witness = Witness{"dsc_eigenvalue", {dir}, {}, dir.dot(sym * dir), -1};
  return v;
}

bool replay_dsc(const GameSpec& game, const WeightVector& r, const Witness& w) {
  if (w.condition == "dsc" && w.points.size() == 2) {
    const FeasibleSection poly = joint_polytope(game);
    if (!poly.contains(w.points[0], kFeasTol) || !poly.contains(w.points[1], kFeasTol))
      return false;
    return dsc_violated(game, r, w.points[0], w.points[1]);
  }
  if (w.condition == "dsc_eigenvalue" && w.points.size() == 1 && game.all_quadratic()) {
    const Mat jac = pseudogradient_jacobian(game, r);
    const Vec& d = w.points[0];
    return d.squaredNorm() > 0.0 && d.dot((jac + jac.transpose()) * d) <= 0.0;
  }
  return false;
}

Verdict check_lsc_interval(const IntervalMap& map, double x0, int n_probes, std::uint64_t seed) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw PreconditionError("x0 must lie in [0, 1]");
  if (n_probes < 1) throw PreconditionError("n_probes must be at least 1");
  Verdict v;
  v.seed = seed;
  const double lo = map.lo(x0);
  const double hi = map.hi(x0);
  if (lo > hi) return v;  // F(x0) empty: nothing to approach

  std::vector<double> targets{lo, hi, 0.5 * (lo + hi)};
  Rng target_rng = sample_rng(seed, 0);
  for (int j = 0; j < 5; ++j) targets.push_back(uniform(target_rng, lo, hi));

  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double y0 = targets[t];
    Rng rng = sample_rng(seed, t + 1);
    double sup = 0.0;
    double worst_probe = x0;
    double delta = 1.0;
    for (int k = 1; k <= kLscLevels; ++k) {
      delta = std::ldexp(1.0, -k);
      const double a = std::max(0.0, x0 - delta);
      const double b = std::min(1.0, x0 + delta);
      sup = 0.0;
      worst_probe = x0;
      auto probe = [&](double x) {
        const double d = interval_distance(map, x, y0);
        ++v.samples_tested;
        if (d > sup) {
          sup = d;
          worst_probe = x;
        }
      };
      probe(a);
      probe(b);
      for (int p = 0; p < n_probes; ++p) probe(uniform(rng, a, b));
    }
    if (sup > kLscMargin) {
      v.holds = false;
      v.witness = Witness{"lsc", {scalar(x0), scalar(y0), scalar(worst_probe)}, {delta}, sup, -1};
      return v;
    }
  }
  return v;
}

bool replay_lsc(const IntervalMap& map, const Witness& w) {
  if (w.condition != "lsc" || w.points.size() != 3 || w.coefficients.size() != 1) return false;
  const double x0 = w.points[0][0];
  const double y0 = w.points[1][0];
  const double probe = w.points[2][0];
  if (interval_distance(map, x0, y0) > 0.0) return false;
  if (std::abs(probe - x0) > w.coefficients[0] || probe < 0.0 || probe > 1.0) return false;
  return interval_distance(map, probe, y0) > kLscMargin;
}

Verdict check_geometric_equilibrium(const GameSpec& game, const BlockVector& x, double epsilon,
                                    int n_probes, std::uint64_t seed, Exec exec) {
  if (x.dims() != game.dims()) throw DimensionError("bundle does not match the game");
  if (n_probes < 1) throw PreconditionError("n_probes must be at least 1");
  if (!is_fixed_point(game, x)) throw PreconditionError("x is not a fixed point of X");
  const int n = game.num_players();
  std::vector<FeasibleSection> sections;
  std::vector<double> current;
  for (int i = 0; i < n; ++i) {
    sections.push_back(player_section(game, i, x));
    current.push_back(evaluate_objective(game, i, x));
  }
  const auto per = static_cast<std::size_t>(n_probes);
  // Probe j of player i. The first two are the extreme points of the
  // section along the box diagonal; the rest are uniform draws.
  auto probe = [&](std::size_t k) {
    const auto i = static_cast<std::size_t>(k / per);
    const std::size_t j = k % per;
    const FeasibleSection& sec = sections[i];
    if (sec.dim() == 1) {
      const auto [a, b] = sec.interval();
      if (j == 0) return scalar(a);
      if (j == 1) return scalar(b);
      Rng rng = sample_rng(seed, k);
      return scalar(uniform(rng, a, b));
    }
    if (j == 0) return project_polytope(sec.lo(), sec);
    if (j == 1) return project_polytope(sec.hi(), sec);
    Rng rng = sample_rng(seed, k);
    Vec z = uniform_box(rng, sec.lo(), sec.hi());
    return sec.contains(z, 0.0) ? z : project_polytope(z, sec);
  };
  auto improvement = [&](std::size_t k, const Vec& z) {
    const int i = static_cast<int>(k / per);
    return current[static_cast<std::size_t>(i)] - evaluate_objective(game, i, x.with_block(i, z));
  };
  const std::size_t total = per * static_cast<std::size_t>(n);
  const auto hit = find_first(exec, total, [&](std::size_t k) {
    return improvement(k, probe(k)) > epsilon;
  });
  Verdict v;
  v.seed = seed;
  v.samples_tested = hit ? static_cast<int>(*hit) + 1 : static_cast<int>(total);
  if (hit) {
    const Vec z = probe(*hit);
    v.holds = false;
    v.witness =
        Witness{"geometric", {x.values(), z}, {}, improvement(*hit, z), static_cast<int>(*hit / per)};
  }
  return v;
}

bool replay_geometric(const GameSpec& game, double epsilon, const Witness& w) {
  if (w.condition != "geometric" || w.points.size() != 2) return false;
  if (w.player < 0 || w.player >= game.num_players()) return false;
  if (w.points[0].size() != game.total_dim()) return false;
  const BlockVector x = game.bundle(w.points[0]);
  const int i = w.player;
  if (w.points[1].size() != x.dim(i)) return false;
  if (!is_fixed_point(game, x) || !feasible(game, i, w.points[1], x)) return false;
  const double gain =
      evaluate_objective(game, i, x) - evaluate_objective(game, i, x.with_block(i, w.points[1]));
  return gain > epsilon;
}

}  // namespace gnep
