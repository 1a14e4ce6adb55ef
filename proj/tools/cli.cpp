#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "gnep/equilibrium.hpp"
#include "gnep/nikaido_isoda.hpp"
#include "gnep/scenarios.hpp"
#include "gnep/structure.hpp"

namespace gnep::cli {

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("cannot read " + what + " from '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw InputError("cannot read " + what + " from '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_list(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(to_double(item, "a number"));
  if (out.empty()) throw InputError("empty list '" + text + "'");
  return out;
}

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  if (text.empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InputError("expected key=value in params, got '" + item + "'");
    if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
      throw InputError("duplicate param '" + item.substr(0, eq) + "'");
  }
  return out;
}

namespace {

class Params {
 public:
  Params(std::string builtin, std::map<std::string, std::string> kv)
      : builtin_(std::move(builtin)), kv_(std::move(kv)) {}

  double number(const std::string& key, double fallback) {
    used_.push_back(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : to_double(it->second, key);
  }
  std::optional<double> optional_number(const std::string& key) {
    used_.push_back(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return to_double(it->second, key);
  }
  int integer(const std::string& key, int fallback) {
    const double v = number(key, fallback);
    if (v != std::floor(v)) throw InputError(key + " must be an integer");
    return static_cast<int>(v);
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    used_.push_back(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_list(it->second, ':');
  }
  void finish() const {
    for (const auto& [k, v] : kv_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw InputError("unknown param '" + k + "' for builtin " + builtin_);
  }

 private:
  std::string builtin_;
  std::map<std::string, std::string> kv_;
  std::vector<std::string> used_;
};

}  // namespace

Scenario builtin_scenario(const std::string& name, const std::string& text) {
  Params p(name, parse_params(text));
  if (name == "cournot") {
    const double eta = p.number("eta", 4.0);
    const double slope = p.number("p", 1.0);
    const auto costs = p.list("c", {1.0, 1.5});
    const auto cap = p.optional_number("cap");
    p.finish();
    return {build_cournot(eta, slope, costs, cap), build_cournot_potential(eta, slope, costs), {}};
  }
  if (name == "heat") {
    HeatMarketConfig cfg;
    const int n = p.integer("players", 2);
    cfg.grid_points = p.integer("M", cfg.grid_points);
    cfg.time_steps = p.integer("T", cfg.time_steps);
    cfg.horizon = p.number("horizon", cfg.horizon);
    cfg.state_cap = p.number("ymax", cfg.state_cap);
    cfg.target_level = p.number("target", cfg.target_level);
    auto per_player = [&](const std::string& key, std::vector<double> def) {
      def.resize(static_cast<std::size_t>(std::max(n, 0)), def.back());
      return p.list(key, def);
    };
    cfg.caps = per_player("caps", cfg.caps);
    cfg.buffers = per_player("buffers", cfg.buffers);
    cfg.alphas = per_player("alphas", cfg.alphas);
    p.finish();
    return {build_heat_market(cfg, n), std::nullopt, {}};
  }
  if (name == "random") {
    const int n = p.integer("players", 2);
    std::vector<int> dims;
    for (double d : p.list("dims", std::vector<double>(static_cast<std::size_t>(std::max(n, 0)), 3.0))) {
      if (d != std::floor(d)) throw InputError("dims must be integers");
      dims.push_back(static_cast<int>(d));
    }
    const double density = p.number("density", 0.5);
    const double seed = p.number("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) throw InputError("seed must be a nonnegative integer");
    p.finish();
    return {build_random_jointly_convex(n, dims, density, static_cast<std::uint64_t>(seed)),
            std::nullopt, {}};
  }
  throw InputError("unknown builtin '" + name + "' (expected cournot, heat or random)");
}

std::vector<WeightVector> parse_grid(const std::string& text, int n_players) {
  std::vector<std::vector<double>> axes;
  std::stringstream in(text);
  std::string group;
  while (std::getline(in, group, ';')) {
    if (group.find(':') != std::string::npos) {
      const auto parts = parse_list(group, ':');
      if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]))
        throw InputError("range must read a:b:n, got '" + group + "'");
      const int count = static_cast<int>(parts[2]);
      std::vector<double> axis;
      for (int k = 0; k < count; ++k)
        axis.push_back(count == 1 ? parts[0]
                                  : parts[0] + (parts[1] - parts[0]) * k / (count - 1));
      axes.push_back(std::move(axis));
    } else {
      axes.push_back(parse_list(group, ','));
    }
  }
  if (static_cast<int>(axes.size()) != n_players)
    throw InputError("grid needs one group per player (" + std::to_string(n_players) + ")");
  std::vector<WeightVector> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    Vec r(n_players);
    for (int i = 0; i < n_players; ++i) {
      r[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
      if (!(r[i] > 0.0)) throw InputError("weights must be strictly positive");
    }
    out.emplace_back(r);
    int i = n_players - 1;
    for (; i >= 0; --i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k < axes[static_cast<std::size_t>(i)].size()) break;
      k = 0;
    }
    if (i < 0) break;
  }
  return out;
}

namespace {

struct Source {
  std::string scenario;
  std::string builtin;
  std::string params;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* s = cmd->add_option("--scenario", src.scenario, "scenario JSON file");
  auto* b = cmd->add_option("--builtin", src.builtin, "builtin scenario: cournot, heat, random");
  s->excludes(b);
  cmd->add_option("--params", src.params, "builtin parameters key=value,... (vectors with ':')");
}

Scenario load(const Source& src) {
  if (!src.scenario.empty()) {
    if (!src.params.empty()) throw InputError("--params only applies to --builtin");
    return load_scenario(src.scenario);
  }
  if (src.builtin.empty()) throw InputError("give --scenario or --builtin");
  return builtin_scenario(src.builtin, src.params);
}

WeightVector parse_weights(const std::string& text, int n) {
  if (text.empty()) return WeightVector::ones(n);
  const auto v = parse_list(text, ',');
  if (static_cast<int>(v.size()) != n)
    throw InputError("--r needs " + std::to_string(n) + " weights");
  Vec r = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  if ((r.array() <= 0.0).any()) throw InputError("weights must be strictly positive");
  return WeightVector(r);
}

BlockVector parse_point(const GameSpec& game, const std::string& text) {
  const auto v = parse_list(text, ',');
  if (static_cast<int>(v.size()) != game.total_dim())
    throw InputError("point needs " + std::to_string(game.total_dim()) + " components");
  return game.bundle(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
}

/// "lower", "midpoint" or an explicit point. Named starts are projected onto
/// C when `onto_c` is set.
BlockVector start_point(const GameSpec& game, const std::string& spec, bool onto_c) {
  Vec x;
  if (spec == "lower") x = game.lower();
  else if (spec == "midpoint") x = 0.5 * (game.lower() + game.upper());
  else return parse_point(game, spec);
  if (onto_c) x = project_polytope(x, joint_polytope(game));
  return game.bundle(x);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

std::string fmt_point(const BlockVector& x) {
  std::string s = "(";
  for (int k = 0; k < x.size(); ++k) s += (k ? ", " : "") + format_double(x.values()[k]);
  return s + ")";
}

struct SolveArgs {
  Source src;
  std::string method = "rosen";
  std::string r;
  std::string x0 = "lower";
  std::string sweep = "gauss-seidel";
  double tol = kSolveTol;
  int max_iter = 0;
  double step = 0.0;
  std::string out;
};

SolveReport run_solve(const SolveArgs& a, const Scenario& sc) {
  const GameSpec& g = sc.game;
  if (!(a.tol > 0.0)) throw InputError("--tol must be positive");
  if (a.method == "br") {
    SweepMode mode;
    if (a.sweep == "gauss-seidel") mode = SweepMode::GaussSeidel;
    else if (a.sweep == "jacobi") mode = SweepMode::Jacobi;
    else throw InputError("--sweep must be gauss-seidel or jacobi");
    return solve_best_response(g, start_point(g, a.x0, false), mode, a.tol,
                               a.max_iter > 0 ? a.max_iter : 10000);
  }
  if (a.method == "rosen") {
    if (!g.shared_set()) throw PreconditionError("variational equilibria require a shared set C");
    return solve_rosen(g, parse_weights(a.r, g.num_players()), start_point(g, a.x0, true), a.step,
                       a.tol, a.max_iter > 0 ? a.max_iter : 100000);
  }
  if (a.method == "potential") {
    if (!sc.potential) throw InputError("scenario has no potential");
    if (!g.shared_set()) throw PreconditionError("potential minimization needs a shared set C");
    return solve_potential(g, *sc.potential, start_point(g, a.x0, true), a.tol,
                           a.max_iter > 0 ? a.max_iter : 100000);
  }
  throw InputError("--method must be br, rosen or potential");
}

void print_summary(const SolveReport& r, std::ostream& err) {
  err << method_name(r.method) << ": x_star = " << fmt_point(r.x_star)
      << ", residual = " << format_double(r.residual) << ", iterations = " << r.iterations
      << (r.converged ? ", converged" : ", NOT converged (" + r.message + ")") << "\n";
}

struct CheckArgs {
  Source src;
  std::string map;
  std::string property;
  std::string point;
  std::string r;
  double x0 = 0.0;
  int samples = 0;
  int subset_size = 4;
  int hull_samples = 50;
  double epsilon = 1e-6;
  double tol = kCertifyTol;
  std::uint64_t seed = 0;
};

int run_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  const std::string& prop = a.property;
  static const std::vector<std::string> known{"graphconvex", "kkm", "dsc", "lsc", "geometric",
                                              "gne"};
  if (std::find(known.begin(), known.end(), prop) == known.end())
    throw InputError("unknown property '" + prop +
                     "' (expected graphconvex, kkm, dsc, lsc, geometric or gne)");
  auto budget = [&](int fallback) { return a.samples > 0 ? a.samples : fallback; };
  Verdict v;
  if (!a.map.empty()) {
    if (!a.src.scenario.empty() || !a.src.builtin.empty())
      throw InputError("--map excludes --scenario and --builtin");
    const IntervalMap map = builtin_interval_map(a.map);
    if (prop == "graphconvex") v = check_graph_convexity(interval_oracle(map), budget(2000), a.seed);
    else if (prop == "kkm")
      v = check_kkm(interval_oracle(map), budget(2000), a.subset_size, a.hull_samples, a.seed);
    else if (prop == "lsc") v = check_lsc_interval(map, a.x0, budget(64), a.seed);
    else throw InputError("property '" + prop + "' needs a game (--scenario or --builtin)");
  } else {
    const Scenario sc = load(a.src);
    const GameSpec& g = sc.game;
    if (prop == "graphconvex") {
      v = check_graph_convexity(constraint_map_oracle(g), budget(2000), a.seed);
    } else if (prop == "dsc") {
      v = check_dsc(g, parse_weights(a.r, g.num_players()), budget(2000), a.seed);
    } else if (prop == "geometric" || prop == "gne") {
      if (a.point.empty()) throw InputError("--point is required for " + prop);
      const BlockVector x = parse_point(g, a.point);
      if (prop == "geometric") {
        v = check_geometric_equilibrium(g, x, a.epsilon, budget(2000), a.seed);
      } else {
        if (!(a.tol > 0.0)) throw InputError("--tol must be positive");
        const bool fixed = is_fixed_point(g, x);
        Json doc{{"property", "gne"}, {"tol", a.tol}};
        bool holds = false;
        if (fixed) {
          const GapReport gap = merit_phi(g, x, std::min(kSolveTol, 0.01 * a.tol));
          holds = gap.gap <= a.tol;
          doc["gap_report"] = to_json(gap);
        } else {
          doc["gap_report"] = nullptr;
          doc["reason"] = "not a fixed point of the constraint map";
        }
        doc["holds"] = holds;
        out << doc.dump(2) << "\n";
        err << "gne: " << (holds ? "holds" : "fails") << "\n";
        return holds ? kOk : kPropertyFails;
      }
    } else {
      throw InputError("property '" + prop + "' needs an interval map (--map)");
    }
  }
  Json doc = to_json(v);
  doc["property"] = prop;
  out << doc.dump(2) << "\n";
  err << prop << ": " << (v.holds ? "holds (no counterexample at this budget)" : "fails") << "\n";
  return v.holds ? kOk : kPropertyFails;
}

struct SweepArgs {
  Source src;
  std::string grid;
  double tol = kSolveTol;
  std::string out;
};

int run_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(a.src);
  const GameSpec& g = sc.game;
  if (!(a.tol > 0.0)) throw InputError("--tol must be positive");
  std::vector<WeightVector> weights = a.grid.empty() ? sc.weights : parse_grid(a.grid, g.num_players());
  if (weights.empty()) throw InputError("no weights: give --grid or a scenario with \"weights\"");
  if (!g.shared_set()) throw PreconditionError("variational equilibria require a shared set C");
  const auto entries = bias_sweep(g, weights, a.tol);

  std::ostringstream csv;
  const int n = g.num_players();
  for (int i = 1; i <= n; ++i) csv << "r" << i << ",";
  for (int k = 1; k <= g.total_dim(); ++k) csv << "x" << k << ",";
  for (int i = 1; i <= n; ++i) csv << "J" << i << ",";
  csv << "converged,unique,dsc_min_eigenvalue,error\n";
  bool all_ok = true;
  for (const auto& e : entries) {
    for (int i = 0; i < n; ++i) csv << format_double(e.r[i]) << ",";
    for (int k = 0; k < g.total_dim(); ++k)
      csv << (e.error.empty() ? format_double(e.x.values()[k]) : "") << ",";
    for (int i = 0; i < n; ++i)
      csv << (e.error.empty() ? format_double(e.objective_values[static_cast<std::size_t>(i)]) : "")
          << ",";
    csv << (e.converged ? 1 : 0) << "," << (e.unique ? 1 : 0) << ",";
    if (g.all_quadratic()) {
      const Mat jac = pseudogradient_jacobian(g, e.r);
      const Mat sym = jac + jac.transpose();
      csv << format_double(Eigen::SelfAdjointEigenSolver<Mat>(sym, Eigen::EigenvaluesOnly)
                               .eigenvalues()[0]);
    }
    std::string msg = e.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    csv << "," << msg << "\n";
    all_ok = all_ok && e.converged && e.error.empty();
  }
  write_text(a.out, csv.str(), out);
  err << "sweep: " << entries.size() << " entries, "
      << (all_ok ? "all converged" : "some entries did not converge") << "\n";
  return all_ok ? kOk : kNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Nash equilibrium solver and structure checker", "gnep"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* cmd_solve = app.add_subcommand("solve", "compute an equilibrium and print the report");
  add_source(cmd_solve, solve.src);
  cmd_solve->add_option("--method", solve.method, "br, rosen or potential");
  cmd_solve->add_option("--r", solve.r, "weights r_1,...,r_N for rosen (default all ones)");
  cmd_solve->add_option("--x0", solve.x0, "start: lower, midpoint or x1,...,xn");
  cmd_solve->add_option("--sweep", solve.sweep, "best-response order: gauss-seidel or jacobi");
  cmd_solve->add_option("--tol", solve.tol, "stopping tolerance");
  cmd_solve->add_option("--max-iter", solve.max_iter, "iteration limit");
  cmd_solve->add_option("--step", solve.step, "rosen step (default 0.1/L)");
  cmd_solve->add_option("--out", solve.out, "write the report JSON here instead of stdout");

  SolveArgs trace;
  std::string gap_out;
  auto* cmd_trace = app.add_subcommand("trace", "solve and write the iteration trace as CSV");
  add_source(cmd_trace, trace.src);
  cmd_trace->add_option("--method", trace.method, "br, rosen or potential");
  cmd_trace->add_option("--r", trace.r, "weights for rosen");
  cmd_trace->add_option("--x0", trace.x0, "start: lower, midpoint or x1,...,xn");
  cmd_trace->add_option("--sweep", trace.sweep, "best-response order");
  cmd_trace->add_option("--tol", trace.tol, "stopping tolerance");
  cmd_trace->add_option("--max-iter", trace.max_iter, "iteration limit");
  cmd_trace->add_option("--step", trace.step, "rosen step");
  cmd_trace->add_option("--out", trace.out, "CSV path (default stdout)");
  cmd_trace->add_option("--gap-out", gap_out, "write the gap report of the last iterate here");

  CheckArgs check;
  auto* cmd_check = app.add_subcommand("check", "falsify a structural property");
  add_source(cmd_check, check.src);
  cmd_check->add_option("--map", check.map, "builtin interval map (kkm-demo-a, kkm-demo-b, ...)");
  cmd_check->add_option("--property", check.property,
                        "graphconvex, kkm, dsc, lsc, geometric or gne")
      ->required();
  cmd_check->add_option("--point", check.point, "bundle x1,...,xn for geometric and gne");
  cmd_check->add_option("--r", check.r, "weights for dsc");
  cmd_check->add_option("--x0", check.x0, "base point for lsc");
  cmd_check->add_option("--samples", check.samples, "sampling budget");
  cmd_check->add_option("--subset-size", check.subset_size, "largest KKM subset");
  cmd_check->add_option("--hull-samples", check.hull_samples, "hull points per KKM subset");
  cmd_check->add_option("--epsilon", check.epsilon, "strictness of induced preferences");
  cmd_check->add_option("--tol", check.tol, "gap tolerance for gne");
  cmd_check->add_option("--seed", check.seed, "random seed");

  SweepArgs sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "variational equilibria over a weight grid");
  add_source(cmd_sweep, sweep.src);
  cmd_sweep->add_option("--grid", sweep.grid, "per-player groups 'a,b,...' or 'lo:hi:n' joined by ';'");
  cmd_sweep->add_option("--tol", sweep.tol, "solver tolerance");
  cmd_sweep->add_option("--out", sweep.out, "CSV path (default stdout)");

  std::string export_params, export_out;
  auto* cmd_heat = app.add_subcommand("export-heat", "write the heat solution matrix S as CSV");
  cmd_heat->add_option("--params", export_params, "heat parameters");
  cmd_heat->add_option("--out", export_out, "CSV path (default stdout)");

  Source export_src;
  std::string scenario_out;
  auto* cmd_export = app.add_subcommand("export", "write a scenario as JSON");
  add_source(cmd_export, export_src);
  cmd_export->add_option("--out", scenario_out, "JSON path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (cmd_solve->parsed()) {
      const Scenario sc = load(solve.src);
      const SolveReport r = run_solve(solve, sc);
      print_summary(r, err);
      write_text(solve.out, to_json(r).dump(2) + "\n", out);
      return r.converged ? kOk : kNotConverged;
    }
    if (cmd_trace->parsed()) {
      const Scenario sc = load(trace.src);
      const SolveReport r = run_solve(trace, sc);
      print_summary(r, err);
      write_text(trace.out, trace_csv(r), out);
      if (!gap_out.empty()) {
        const GapReport gap = merit_phi(sc.game, r.x_star);
        write_text(gap_out, to_json(gap).dump(2) + "\n", out);
      }
      return r.converged ? kOk : kNotConverged;
    }
    if (cmd_check->parsed()) return run_check(check, out, err);
    if (cmd_sweep->parsed()) return run_sweep(sweep, out, err);
    if (cmd_heat->parsed()) {
      (void)builtin_scenario("heat", export_params);  // validates the params
      const auto params = parse_params(export_params);
      HeatMarketConfig cfg;
      if (params.count("M")) cfg.grid_points = static_cast<int>(to_double(params.at("M"), "M"));
      if (params.count("T")) cfg.time_steps = static_cast<int>(to_double(params.at("T"), "T"));
      if (params.count("horizon")) cfg.horizon = to_double(params.at("horizon"), "horizon");
      write_text(export_out, matrix_csv(heat_solution_matrix(cfg)), out);
      return kOk;
    }
    if (cmd_export->parsed()) {
      write_text(scenario_out, dump_scenario(load(export_src)), out);
      return kOk;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace gnep::cli
