#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gnep/serialize.hpp"

namespace gnep::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNotConverged = 2, kPropertyFails = 3 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `key=value,key=value` with `:`-separated vector values.
std::map<std::string, std::string> parse_params(const std::string& text);
std::vector<double> parse_list(const std::string& text, char sep);

/// Builds a builtin scenario: cournot, heat or random.
Scenario builtin_scenario(const std::string& name, const std::string& params);

/// Weight grid, one group per player separated by ';'. A group is a comma
/// list ("0.8,1,2") or a linspace "a:b:n". Rows are the Cartesian product
/// with the last player varying fastest.
std::vector<WeightVector> parse_grid(const std::string& text, int n_players);

}  // namespace gnep::cli
