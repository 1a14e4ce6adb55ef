#include "gnep/scenarios.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "gnep/error.hpp"

namespace gnep {

namespace {

void check_cournot(double eta, double p, const std::vector<double>& costs) {
  if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("cournot: p must be positive");
  if (!std::isfinite(eta)) throw PreconditionError("cournot: eta must be finite");
  if (costs.size() < 2) throw PreconditionError("cournot: need at least two firms");
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (!(costs[i] > 0.0 && costs[i] < eta))
      throw PreconditionError("cournot: cost of " + player_name(static_cast<int>(i)) +
                              " must lie in (0, eta)");
}

}  // namespace

GameSpec build_cournot(double eta, double p, const std::vector<double>& costs,
                       std::optional<double> cap) {
  check_cournot(eta, p, costs);
  const int n = static_cast<int>(costs.size());
  if (cap && !(*cap >= 0.0 && std::isfinite(*cap)))
    throw PreconditionError("cournot: cap must be a nonnegative number");
  std::vector<ObjectiveSpec> objectives;
  std::vector<Box> boxes;
  for (int i = 0; i < n; ++i) {
    QuadraticObjective q{Mat::Zero(n, n), Vec::Zero(n), 0.0};
    q.Q(i, i) = 2.0 * p;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      q.Q(i, j) = p;
      q.Q(j, i) = p;
    }
    q.c[i] = -(eta - costs[static_cast<std::size_t>(i)]);
    objectives.emplace_back(std::move(q));
    boxes.push_back({Vec::Zero(1), Vec::Constant(1, eta / p)});
  }
  std::vector<int> dims(static_cast<std::size_t>(n), 1);
  if (!cap) return GameSpec(dims, std::move(objectives), std::move(boxes), ConstantConstraints{});
  SharedSet set;
  set.A = Mat::Ones(1, n);
  set.b = Vec::Constant(1, *cap);
  set.feasible_point = Vec::Zero(n);
  return GameSpec(dims, std::move(objectives), std::move(boxes), SharedConstraints{set});
}

PotentialSpec build_cournot_potential(double eta, double p, const std::vector<double>& costs) {
  check_cournot(eta, p, costs);
  const int n = static_cast<int>(costs.size());
  QuadraticObjective g{Mat::Constant(n, n, p), Vec::Zero(n), 0.0};
  for (int i = 0; i < n; ++i) {
    g.Q(i, i) = 2.0 * p;
    g.c[i] = -(eta - costs[static_cast<std::size_t>(i)]);
  }
  return {std::move(g), Forcing::Identity};
}

namespace {

void validate_grid(const HeatMarketConfig& cfg) {
  if (cfg.grid_points < 3) throw PreconditionError("heat market: need at least 3 grid points");
  if (cfg.time_steps < 2) throw PreconditionError("heat market: need at least 2 time steps");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
    throw PreconditionError("heat market: horizon must be positive");
}

}  // namespace

void validate(const HeatMarketConfig& cfg, int n_players) {
  validate_grid(cfg);
  if (n_players < 2) throw PreconditionError("heat market: need at least two players");
  const auto n = static_cast<std::size_t>(n_players);
  if (cfg.caps.size() != n || cfg.buffers.size() != n || cfg.alphas.size() != n)
    throw DimensionError("heat market: caps, buffers and alphas need one entry per player");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cfg.caps[i] > 0.0)) throw PreconditionError("heat market: caps must be positive");
    if (!(cfg.buffers[i] >= 0.0 && cfg.buffers[i] < cfg.state_cap))
      throw PreconditionError("heat market: buffers must lie in [0, state_cap)");
    if (!(cfg.alphas[i] >= 0.0)) throw PreconditionError("heat market: alphas must be >= 0");
  }
  const int dim = cfg.grid_points * cfg.time_steps;
  if (cfg.target.size() != 0 && cfg.target.size() != dim)
    throw DimensionError("heat market: target must have M*T entries");
}

namespace {

Mat implicit_euler_matrix(const HeatMarketConfig& cfg) {
  const int m = cfg.grid_points;
  const double h = 1.0 / (m + 1);
  const double dt = cfg.horizon / cfg.time_steps;
  const double k = dt / (h * h);
  Mat a = Mat::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    a(j, j) = 1.0 + 2.0 * k;
    if (j > 0) a(j, j - 1) = -k;
    if (j + 1 < m) a(j, j + 1) = -k;
  }
  return a;
}

}  // namespace

Vec simulate_heat(const HeatMarketConfig& cfg, const Vec& source) {
  validate_grid(cfg);
  const int m = cfg.grid_points;
  const int t = cfg.time_steps;
  if (source.size() != m * t) throw DimensionError("heat source must have M*T entries");
  const double dt = cfg.horizon / t;
  const Eigen::PartialPivLU<Mat> lu(implicit_euler_matrix(cfg));
  Vec y = Vec::Zero(m);
  Vec out(m * t);
  for (int n = 0; n < t; ++n) {
    y = lu.solve(y + dt * source.segment(n * m, m));
    out.segment(n * m, m) = y;
  }
  return out;
}

Mat heat_solution_matrix(const HeatMarketConfig& cfg, Exec exec) {
  validate_grid(cfg);
  const int m = cfg.grid_points;
  const int t = cfg.time_steps;
  const double dt = cfg.horizon / t;
  const Mat a = implicit_euler_matrix(cfg);
  const Eigen::FullPivLU<Mat> check(a);
  if (!check.isInvertible()) throw PreconditionError("heat market: singular time-step matrix");
  const Eigen::PartialPivLU<Mat> lu(a);
  Mat s = Mat::Zero(m * t, m * t);
  // Column (n0, k) is the response to a unit source at node k in step n0; it
  // vanishes before n0.
  for_each_index(exec, static_cast<std::size_t>(m * t), [&](std::size_t col) {
    const int c = static_cast<int>(col);
    const int n0 = c / m;
    Vec y = Vec::Zero(m);
    y[c % m] = dt;
    for (int n = n0; n < t; ++n) {
      y = lu.solve(y);
      s.col(c).segment(n * m, m) = y;
    }
  });
  return s;
}

GameSpec build_heat_market(const HeatMarketConfig& cfg, int n_players) {
  validate(cfg, n_players);
  const int dim = cfg.grid_points * cfg.time_steps;
  const int total = dim * n_players;
  const Mat s = heat_solution_matrix(cfg);
  Mat e(dim, total);
  for (int i = 0; i < n_players; ++i) e.middleCols(i * dim, dim) = s;
  const Vec target = cfg.target.size() ? cfg.target : Vec::Constant(dim, cfg.target_level);
  const Mat ete = e.transpose() * e;
  const Vec c = -e.transpose() * target;
  const double d = 0.5 * target.squaredNorm();

  std::vector<ObjectiveSpec> objectives;
  std::vector<Box> boxes;
  SharedSet set;
  set.A.resize(dim * n_players, total);
  set.b.resize(dim * n_players);
  for (int i = 0; i < n_players; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    QuadraticObjective q{ete, c, d};
    q.Q.block(i * dim, i * dim, dim, dim).diagonal().array() += cfg.alphas[ui];
    objectives.emplace_back(std::move(q));
    boxes.push_back({Vec::Zero(dim), Vec::Constant(dim, cfg.caps[ui])});
    set.A.middleRows(i * dim, dim) = e;
    set.b.segment(i * dim, dim).setConstant(cfg.state_cap - cfg.buffers[ui]);
    set.owners.insert(set.owners.end(), static_cast<std::size_t>(dim), i);
  }
  set.feasible_point = Vec::Zero(total);
  std::vector<int> dims(static_cast<std::size_t>(n_players), dim);
  return GameSpec(dims, std::move(objectives), std::move(boxes), SharedConstraints{set});
}

GameSpec build_random_jointly_convex(int n_players, const std::vector<int>& dims, double density,
                                     std::uint64_t seed) {
  if (n_players < 2) throw PreconditionError("random game: need at least two players");
  if (static_cast<int>(dims.size()) != n_players)
    throw DimensionError("random game: one dimension per player");
  for (int d : dims)
    if (d <= 0) throw DimensionError("random game: dimensions must be positive");
  if (!(density > 0.0 && density <= 1.0))
    throw PreconditionError("random game: density must lie in (0, 1]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sparse = [&](int rows, int cols) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double v = normal(rng);
        m(r, c) = unit(rng) < density ? v : 0.0;
      }
    return m;
  };

  const int n = n_players;
  std::vector<int> offsets(static_cast<std::size_t>(n), 0);
  int total = 0;
  for (int i = 0; i < n; ++i) {
    offsets[static_cast<std::size_t>(i)] = total;
    total += dims[static_cast<std::size_t>(i)];
  }
  auto dim = [&](int i) { return dims[static_cast<std::size_t>(i)]; };
  auto off = [&](int i) { return offsets[static_cast<std::size_t>(i)]; };

  // coupling[i][j]: how x_j enters player i's gradient.
  std::vector<std::vector<Mat>> coupling(static_cast<std::size_t>(n),
                                         std::vector<Mat>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) coupling[i][j] = 0.5 * sparse(dim(i), dim(j));
  auto spectral = [](const Mat& m) {
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
  };

  std::vector<ObjectiveSpec> objectives;
  std::vector<Box> boxes;
  for (int i = 0; i < n; ++i) {
    const Mat m = sparse(dim(i), dim(i));
    double rho = kRandomRidge;
    for (int j = 0; j < n; ++j)
      if (j != i) rho += spectral(coupling[i][j]) + spectral(coupling[j][i]);
    QuadraticObjective q{Mat::Zero(total, total), Vec::Zero(total), 0.0};
    q.Q.block(off(i), off(i), dim(i), dim(i)) =
        m.transpose() * m + rho * Mat::Identity(dim(i), dim(i));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      q.Q.block(off(i), off(j), dim(i), dim(j)) = coupling[i][j];
      q.Q.block(off(j), off(i), dim(j), dim(i)) = coupling[i][j].transpose();
    }
    for (int k = 0; k < total; ++k) q.c[k] = normal(rng);
    objectives.emplace_back(std::move(q));
    Box b{Vec(dim(i)), Vec(dim(i))};
    for (int k = 0; k < dim(i); ++k) {
      b.lo[k] = -0.5 - 1.5 * unit(rng);
      b.hi[k] = 0.5 + 1.5 * unit(rng);
    }
    boxes.push_back(std::move(b));
  }

  SharedSet set;
  const int rows = total;
  set.A = sparse(rows, total);
  for (int r = 0; r < rows; ++r)
    if (set.A.row(r).norm() == 0.0) set.A(r, r % total) = 1.0;
  set.b.resize(rows);
  for (int r = 0; r < rows; ++r) set.b[r] = 0.2 + 0.8 * unit(rng);
  set.feasible_point = Vec::Zero(total);
  return GameSpec(dims, std::move(objectives), std::move(boxes), SharedConstraints{set});
}

}  // namespace gnep
