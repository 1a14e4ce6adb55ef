#pragma once
// JSON scenario format (schema 1), report serialization and CSV writers.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnep/equilibrium.hpp"
#include "gnep/error.hpp"
#include "gnep/game.hpp"
#include "gnep/nikaido_isoda.hpp"
#include "gnep/structure.hpp"

namespace gnep {

using Json = nlohmann::json;

inline constexpr int kScenarioSchema = 1;

/// Malformed scenario input. `field` is a JSON pointer such as
/// "/objectives/1/Q" and `line` the 1-based line it starts on (0 if unknown).
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& what, std::string field, int line);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct Scenario {
  GameSpec game;
  std::optional<PotentialSpec> potential;
  std::vector<WeightVector> weights;
};

/// Parses and validates a scenario document. Unknown keys are rejected. A
/// shared set without "feasible_point" gets one from a phase-one simplex.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Writes quadratic objectives explicitly; oracle objectives and oracle
/// constraint maps cannot be serialized and raise PreconditionError.
Json scenario_to_json(const Scenario& scenario);
std::string dump_scenario(const Scenario& scenario);

Json to_json(const BlockVector& x);
Json to_json(const SolveReport& report);
Json to_json(const GapReport& report);
Json to_json(const Witness& witness);
Json to_json(const Verdict& verdict);

/// Header "iter,residual,x1,...,xn"; one row per trace entry.
std::string trace_csv(const SolveReport& report);
std::string matrix_csv(const Mat& m);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace gnep
