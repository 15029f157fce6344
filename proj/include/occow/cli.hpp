#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "occow/scenario.hpp"

namespace occow::cli {

class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value text; '#' starts a comment. Keys absent from the file keep
// the defaults of a 30-node fixed two-hop star. Phase fractions default to
// an even split over the protocol's hops and budgets to (1 - f_S) T / 2.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);

// Every resolved field in file order; parse_scenario reads this back unchanged.
std::vector<std::pair<std::string, std::string>> scenario_fields(const ScenarioConfig& cfg);
std::string format_scenario(const ScenarioConfig& cfg);

enum ExitCode : int { ok = 0, config_error = 1, infeasible = 2, disagreement = 3 };

// Full command-line entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace occow::cli
