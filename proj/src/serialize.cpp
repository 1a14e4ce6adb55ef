#include "gnep/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gnep/scenarios.hpp"

namespace gnep {

ScenarioError::ScenarioError(const std::string& what, std::string field, int line)
    : Error((line > 0 ? "line " + std::to_string(line) + ", " : std::string()) +
            (field.empty() ? std::string() : "field " + field + ": ") + what),
      field_(std::move(field)),
      line_(line) {}

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// Maps JSON pointers to the line their value starts on. nlohmann does not
// keep source positions, so this walks the text once with a minimal scanner.
// It assumes the text already parsed.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : text_(text) {
    skip_ws();
    value("");
  }

  int line(std::string pointer) const {
    while (true) {
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      if (pointer.empty()) return 0;
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string() {
    std::string out;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') ++pos_;
      if (pos_ < text_.size()) out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(const std::string& path) {
    lines_.emplace(path, line_);
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '{' || c == '[') {
      ++pos_;
      int index = 0;
      while (true) {
        skip_ws();
        if (pos_ >= text_.size()) return;
        if (text_[pos_] == '}' || text_[pos_] == ']') {
          ++pos_;
          return;
        }
        std::string child;
        if (c == '{') {
          child = path + "/" + escape(string());
          skip_ws();
          ++pos_;  // ':'
          skip_ws();
        } else {
          child = path + "/" + std::to_string(index++);
        }
        value(child);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
      }
    }
    if (c == '"') {
      string();
      return;
    }
    while (pos_ < text_.size() && !std::strchr(",]}", text_[pos_]) &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

class Reader {
 public:
  explicit Reader(const LineIndex& index) : index_(index) {}

  [[noreturn]] void fail(const std::string& what, const std::string& ptr) const {
    throw ScenarioError(what, ptr.empty() ? "/" : ptr, index_.line(ptr));
  }

  void only_keys(const Json& obj, std::initializer_list<const char*> keys,
                 const std::string& ptr) const {
    if (!obj.is_object()) fail("expected an object", ptr);
    for (const auto& [k, v] : obj.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) fail("unknown key '" + k + "'", ptr + "/" + k);
    }
  }

  const Json& require(const Json& obj, const char* key, const std::string& ptr) const {
    if (!obj.contains(key)) fail(std::string("missing key '") + key + "'", ptr);
    return obj.at(key);
  }

  double number(const Json& v, const std::string& ptr) const {
    if (!v.is_number()) fail("expected a number", ptr);
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail("expected a finite number", ptr);
    return d;
  }

  int integer(const Json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail("expected an integer", ptr);
    return v.get<int>();
  }

  std::string str(const Json& v, const std::string& ptr) const {
    if (!v.is_string()) fail("expected a string", ptr);
    return v.get<std::string>();
  }

  Vec vec(const Json& v, const std::string& ptr, long expected = -1) const {
    if (!v.is_array()) fail("expected an array of numbers", ptr);
    if (expected >= 0 && static_cast<long>(v.size()) != expected)
      fail("expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()),
           ptr);
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k)
      out[static_cast<Eigen::Index>(k)] = number(v[k], ptr + "/" + std::to_string(k));
    return out;
  }

  Mat mat(const Json& v, const std::string& ptr, long rows, long cols) const {
    if (!v.is_array()) fail("expected an array of rows", ptr);
    if (rows >= 0 && static_cast<long>(v.size()) != rows)
      fail("expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()), ptr);
    Mat out(static_cast<Eigen::Index>(v.size()), cols);
    for (std::size_t r = 0; r < v.size(); ++r)
      out.row(static_cast<Eigen::Index>(r)) = vec(v[r], ptr + "/" + std::to_string(r), cols);
    return out;
  }

 private:
  const LineIndex& index_;
};

QuadraticObjective read_quadratic(const Reader& rd, const Json& o, const std::string& ptr,
                                  int total) {
  rd.only_keys(o, {"type", "Q", "c", "d", "forcing"}, ptr);
  QuadraticObjective q;
  q.Q = rd.mat(rd.require(o, "Q", ptr), ptr + "/Q", total, total);
  q.c = rd.vec(rd.require(o, "c", ptr), ptr + "/c", total);
  q.d = o.contains("d") ? rd.number(o.at("d"), ptr + "/d") : 0.0;
  return q;
}

struct CournotArgs {
  double eta = 0.0, p = 0.0;
  std::vector<double> costs;
  int player = 0;
};

CournotArgs read_cournot_params(const Reader& rd, const Json& o, const std::string& ptr,
                                bool with_player) {
  const std::string pp = ptr + "/params";
  const Json& params = rd.require(o, "params", ptr);
  if (with_player) rd.only_keys(params, {"eta", "p", "costs", "player"}, pp);
  else rd.only_keys(params, {"eta", "p", "costs"}, pp);
  CournotArgs a;
  a.eta = rd.number(rd.require(params, "eta", pp), pp + "/eta");
  a.p = rd.number(rd.require(params, "p", pp), pp + "/p");
  const Vec c = rd.vec(rd.require(params, "costs", pp), pp + "/costs");
  a.costs.assign(c.data(), c.data() + c.size());
  if (with_player) a.player = rd.integer(rd.require(params, "player", pp), pp + "/player");
  return a;
}

ObjectiveSpec read_objective(const Reader& rd, const Json& o, const std::string& ptr, int total,
                             int n_players) {
  if (!o.is_object()) rd.fail("expected an object", ptr);
  const std::string type = rd.str(rd.require(o, "type", ptr), ptr + "/type");
  if (type == "quadratic") {
    if (o.contains("forcing")) rd.fail("unknown key 'forcing'", ptr + "/forcing");
    return read_quadratic(rd, o, ptr, total);
  }
  if (type != "builtin") rd.fail("unknown objective type '" + type + "'", ptr + "/type");
  rd.only_keys(o, {"type", "name", "params"}, ptr);
  const std::string name = rd.str(rd.require(o, "name", ptr), ptr + "/name");
  if (name == "zero") {
    if (o.contains("params")) rd.fail("builtin 'zero' takes no params", ptr + "/params");
    return QuadraticObjective{Mat::Zero(total, total), Vec::Zero(total), 0.0};
  }
  if (name != "cournot") rd.fail("unknown builtin objective '" + name + "'", ptr + "/name");
  const CournotArgs a = read_cournot_params(rd, o, ptr, true);
  if (static_cast<int>(a.costs.size()) != n_players || total != n_players)
    rd.fail("cournot objectives need one cost per player and 1-D blocks", ptr + "/params");
  if (a.player < 0 || a.player >= n_players) rd.fail("player out of range", ptr + "/params/player");
  try {
    const GameSpec g = build_cournot(a.eta, a.p, a.costs);
    return g.objective(a.player);
  } catch (const Error& e) {
    rd.fail(e.what(), ptr + "/params");
  }
}

Box read_box(const Reader& rd, const Json& b, const std::string& ptr, int dim) {
  rd.only_keys(b, {"lo", "hi"}, ptr);
  return {rd.vec(rd.require(b, "lo", ptr), ptr + "/lo", dim),
          rd.vec(rd.require(b, "hi", ptr), ptr + "/hi", dim)};
}

Vec phase_one_point(const std::vector<Box>& boxes, const SharedSet& set, int total) {
  Vec lo(total), hi(total);
  int off = 0;
  for (const Box& b : boxes) {
    lo.segment(off, b.lo.size()) = b.lo;
    hi.segment(off, b.hi.size()) = b.hi;
    off += static_cast<int>(b.lo.size());
  }
  if (set.box) {
    lo = lo.cwiseMax(set.box->lo);
    hi = hi.cwiseMin(set.box->hi);
  }
  if ((lo.array() > hi.array()).any()) throw DomainError("shared set is empty", -1);
  const FeasibleSection poly(lo, hi, set.A, set.b);
  return minimize_linear_1block(Vec::Ones(total), poly).argmin;
}

ConstraintSpec read_constraints(const Reader& rd, const Json& c, const std::string& ptr,
                                int total, int n_players, const std::vector<Box>& boxes) {
  if (!c.is_object()) rd.fail("expected an object", ptr);
  const std::string type = rd.str(rd.require(c, "type", ptr), ptr + "/type");
  if (type == "constant") {
    rd.only_keys(c, {"type"}, ptr);
    return ConstantConstraints{};
  }
  if (type != "shared") rd.fail("unknown constraint type '" + type + "'", ptr + "/type");
  rd.only_keys(c, {"type", "A", "b", "box", "feasible_point", "owners"}, ptr);
  SharedSet set;
  const Json& a = rd.require(c, "A", ptr);
  set.A = rd.mat(a, ptr + "/A", -1, total);
  set.b = rd.vec(rd.require(c, "b", ptr), ptr + "/b", set.A.rows());
  if (c.contains("box")) set.box = read_box(rd, c.at("box"), ptr + "/box", total);
  if (c.contains("owners")) {
    const Json& o = c.at("owners");
    const Vec owners = rd.vec(o, ptr + "/owners", set.A.rows());
    for (int k = 0; k < owners.size(); ++k) {
      const int v = static_cast<int>(owners[k]);
      if (v != owners[k] || v < -1 || v >= n_players)
        rd.fail("owner must be -1 or a player index", ptr + "/owners/" + std::to_string(k));
      set.owners.push_back(v);
    }
  }
  if (c.contains("feasible_point")) {
    set.feasible_point = rd.vec(c.at("feasible_point"), ptr + "/feasible_point", total);
  } else {
    try {
      set.feasible_point = phase_one_point(boxes, set, total);
    } catch (const DomainError&) {
      rd.fail("shared set is empty", ptr);
    }
  }
  return SharedConstraints{std::move(set)};
}

std::optional<PotentialSpec> read_potential(const Reader& rd, const Json& o,
                                            const std::string& ptr, int total) {
  if (!o.is_object()) rd.fail("expected an object", ptr);
  const std::string type = rd.str(rd.require(o, "type", ptr), ptr + "/type");
  Forcing forcing = Forcing::Identity;
  if (o.contains("forcing")) {
    const std::string f = rd.str(o.at("forcing"), ptr + "/forcing");
    bool found = false;
    for (Forcing cand : {Forcing::Identity, Forcing::Square, Forcing::CappedLinear}) {
      if (f == forcing_name(cand)) {
        forcing = cand;
        found = true;
      }
    }
    if (!found) rd.fail("unknown forcing '" + f + "'", ptr + "/forcing");
  }
  if (type == "quadratic") return PotentialSpec{read_quadratic(rd, o, ptr, total), forcing};
  if (type != "builtin") rd.fail("unknown potential type '" + type + "'", ptr + "/type");
  rd.only_keys(o, {"type", "name", "params", "forcing"}, ptr);
  const std::string name = rd.str(rd.require(o, "name", ptr), ptr + "/name");
  if (name != "cournot") rd.fail("unknown builtin potential '" + name + "'", ptr + "/name");
  const CournotArgs a = read_cournot_params(rd, o, ptr, false);
  if (static_cast<int>(a.costs.size()) != total)
    rd.fail("cournot potential needs one cost per coordinate", ptr + "/params/costs");
  try {
    PotentialSpec pot = build_cournot_potential(a.eta, a.p, a.costs);
    pot.forcing = forcing;
    return pot;
  } catch (const Error& e) {
    rd.fail(e.what(), ptr + "/params");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ScenarioError(std::string("malformed JSON: ") + e.what(), "", line);
  }
  const LineIndex index(text);
  const Reader rd(index);
  rd.only_keys(doc, {"schema", "name", "players", "dims", "objectives", "boxes", "constraints",
                     "potential", "weights"},
               "");
  const int schema = rd.integer(rd.require(doc, "schema", ""), "/schema");
  if (schema != kScenarioSchema)
    rd.fail("unsupported schema " + std::to_string(schema), "/schema");
  if (doc.contains("name")) rd.str(doc.at("name"), "/name");
  const int n = rd.integer(rd.require(doc, "players", ""), "/players");
  if (n < 2) rd.fail("a game needs at least two players", "/players");
  const Vec dimv = rd.vec(rd.require(doc, "dims", ""), "/dims", n);
  std::vector<int> dims;
  int total = 0;
  for (int i = 0; i < n; ++i) {
    const int d = static_cast<int>(dimv[i]);
    if (d != dimv[i] || d <= 0)
      rd.fail("dimensions must be positive integers", "/dims/" + std::to_string(i));
    dims.push_back(d);
    total += d;
  }

  const Json& objs = rd.require(doc, "objectives", "");
  if (!objs.is_array() || static_cast<int>(objs.size()) != n)
    rd.fail("expected one objective per player", "/objectives");
  std::vector<ObjectiveSpec> objectives;
  for (int i = 0; i < n; ++i)
    objectives.push_back(
        read_objective(rd, objs[static_cast<std::size_t>(i)], "/objectives/" + std::to_string(i),
                       total, n));

  const Json& bx = rd.require(doc, "boxes", "");
  if (!bx.is_array() || static_cast<int>(bx.size()) != n)
    rd.fail("expected one box per player", "/boxes");
  std::vector<Box> boxes;
  for (int i = 0; i < n; ++i)
    boxes.push_back(read_box(rd, bx[static_cast<std::size_t>(i)], "/boxes/" + std::to_string(i),
                             dims[static_cast<std::size_t>(i)]));

  ConstraintSpec constraints = read_constraints(rd, rd.require(doc, "constraints", ""),
                                                "/constraints", total, n, boxes);

  std::optional<PotentialSpec> potential;
  if (doc.contains("potential")) potential = read_potential(rd, doc.at("potential"), "/potential", total);

  std::vector<WeightVector> weights;
  if (doc.contains("weights")) {
    const Json& w = doc.at("weights");
    if (!w.is_array()) rd.fail("expected an array of weight vectors", "/weights");
    for (std::size_t k = 0; k < w.size(); ++k) {
      const std::string ptr = "/weights/" + std::to_string(k);
      const Vec r = rd.vec(w[k], ptr, n);
      if ((r.array() <= 0.0).any()) rd.fail("weights must be strictly positive", ptr);
      weights.emplace_back(r);
    }
  }

  try {
    GameSpec game(std::move(dims), std::move(objectives), std::move(boxes),
                  std::move(constraints));
    return Scenario{std::move(game), std::move(potential), std::move(weights)};
  } catch (const DimensionError& e) {
    const std::string ptr = e.player() >= 0 ? "/objectives/" + std::to_string(e.player()) : "";
    rd.fail(e.what(), ptr);
  } catch (const DomainError& e) {
    rd.fail(e.what(), "/constraints");
  } catch (const Error& e) {
    rd.fail(e.what(), "");
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path + "'", "", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (int k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Json mat_json(const Mat& m) {
  Json out = Json::array();
  for (int r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
  return out;
}

Json quadratic_json(const QuadraticObjective& q) {
  return Json{{"type", "quadratic"}, {"Q", mat_json(q.Q)}, {"c", vec_json(q.c)}, {"d", q.d}};
}

Json box_json(const Box& b) { return Json{{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}}; }

}  // namespace

Json scenario_to_json(const Scenario& s) {
  const GameSpec& g = s.game;
  Json doc;
  doc["schema"] = kScenarioSchema;
  doc["players"] = g.num_players();
  doc["dims"] = g.dims();
  doc["objectives"] = Json::array();
  for (const auto& o : g.objectives()) {
    const auto* q = std::get_if<QuadraticObjective>(&o);
    if (!q) throw PreconditionError("oracle objectives cannot be serialized");
    doc["objectives"].push_back(quadratic_json(*q));
  }
  doc["boxes"] = Json::array();
  for (const auto& b : g.boxes()) doc["boxes"].push_back(box_json(b));
  if (std::holds_alternative<ConstantConstraints>(g.constraints())) {
    doc["constraints"] = Json{{"type", "constant"}};
  } else if (const SharedSet* set = g.shared_set()) {
    Json c{{"type", "shared"},
           {"A", mat_json(set->A)},
           {"b", vec_json(set->b)},
           {"feasible_point", vec_json(set->feasible_point)}};
    if (set->box) c["box"] = box_json(*set->box);
    if (!set->owners.empty()) c["owners"] = set->owners;
    doc["constraints"] = std::move(c);
  } else {
    throw PreconditionError("oracle constraint maps cannot be serialized");
  }
  if (s.potential) {
    const auto* q = std::get_if<QuadraticObjective>(&s.potential->G);
    if (!q) throw PreconditionError("oracle potentials cannot be serialized");
    Json p = quadratic_json(*q);
    p["forcing"] = forcing_name(s.potential->forcing);
    doc["potential"] = std::move(p);
  }
  if (!s.weights.empty()) {
    doc["weights"] = Json::array();
    for (const auto& w : s.weights) doc["weights"].push_back(vec_json(w.values()));
  }
  return doc;
}

std::string dump_scenario(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2) + "\n";
}

Json to_json(const BlockVector& x) {
  Json blocks = Json::array();
  for (int i = 0; i < x.num_blocks(); ++i) blocks.push_back(vec_json(x.block(i)));
  return blocks;
}

Json to_json(const SolveReport& r) {
  Json out{{"method", method_name(r.method)},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"residual", r.residual},
           {"x_star", to_json(r.x_star)},
           {"message", r.message}};
  if (r.method == Method::Potential) out["potential_mismatch"] = r.potential_mismatch;
  if (r.method == Method::Rosen) {
    if (std::isfinite(r.variational_certificate))
      out["variational_certificate"] = r.variational_certificate;
    else
      out["variational_certificate"] = nullptr;
  }
  return out;
}

Json to_json(const GapReport& r) {
  return Json{{"psi_xx", r.psi_xx},
              {"phi", r.phi},
              {"gap", r.gap},
              {"per_player_improvement", r.per_player_improvement},
              {"argmin", to_json(r.argmin)},
              {"fixed_point", r.fixed_point}};
}

Json to_json(const Witness& w) {
  Json points = Json::array();
  for (const auto& p : w.points) points.push_back(vec_json(p));
  Json out{{"condition", w.condition},
           {"points", points},
           {"coefficients", w.coefficients},
           {"value", w.value}};
  if (w.player >= 0) out["player"] = w.player;
  return out;
}

Json to_json(const Verdict& v) {
  Json out{{"holds", v.holds},
           {"samples_tested", v.samples_tested},
           {"seed", v.seed},
           {"note", v.holds ? "no counterexample found at this budget" : "counterexample found"}};
  if (v.witness) out["witness"] = to_json(*v.witness);
  if (v.min_eigenvalue) out["min_eigenvalue"] = *v.min_eigenvalue;
  if (v.sampled_holds) out["sampled_holds"] = *v.sampled_holds;
  return out;
}

std::string trace_csv(const SolveReport& report) {
  std::ostringstream out;
  out << "iter,residual";
  const int n = report.trace.empty() ? report.x_star.size()
                                     : static_cast<int>(report.trace.front().x.size());
  for (int k = 1; k <= n; ++k) out << ",x" << k;
  out << "\n";
  for (const auto& e : report.trace) {
    out << e.iteration << "," << format_double(e.residual);
    for (int k = 0; k < e.x.size(); ++k) out << "," << format_double(e.x[k]);
    out << "\n";
  }
  return out.str();
}

std::string matrix_csv(const Mat& m) {
  std::ostringstream out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << "\n";
  }
  return out.str();
}

}  // namespace gnep
