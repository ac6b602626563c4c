#pragma once

#include <istream>
#include <string>
#include <vector>

#include "skipstop/experiment.hpp"

namespace skipstop {

/// Contents of an INI run file. Sections: [scenario], [overrides], [solver],
/// [sweep]. Unknown sections or keys are rejected.
struct RunConfig {
    ScenarioConfig scenario;
    SweepGrid sweep;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");

/// Accepts decimal numbers and "inf".
double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
BacktrackRoute parse_backtrack_route(const std::string& text);

} // namespace skipstop
