#include "skipstop/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace skipstop {

namespace pt = boost::property_tree;

double parse_number(const std::string& raw, const std::string& what) {
    const std::string text = boost::algorithm::trim_copy(raw);
    if (text == "inf" || text == "uniform") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
        throw std::invalid_argument(what + ": expected a number, got '" + raw + "'");
    return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(parse_number(p, what));
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (double v : parse_number_list(text, what)) {
        if (v != std::floor(v) || std::isinf(v)) throw std::invalid_argument(what + ": expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

bool parse_bool(const std::string& raw, const std::string& what) {
    const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(raw));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument(what + ": expected true or false, got '" + raw + "'");
}

BacktrackRoute parse_backtrack_route(const std::string& raw) {
    const std::string t = boost::algorithm::trim_copy(raw);
    if (t == "cheaper_option") return BacktrackRoute::cheaper_option;
    if (t == "nearest_transfer") return BacktrackRoute::nearest_transfer;
    throw std::invalid_argument("backtrack_route: expected cheaper_option or nearest_transfer, got '" + raw + "'");
}

namespace {

int parse_int(const std::string& text, const std::string& what) {
    const auto v = parse_int_list(text, what);
    if (v.size() != 1) throw std::invalid_argument(what + ": expected one integer");
    return v.front();
}

void apply_scenario(ScenarioConfig& c, const std::string& key, const std::string& value) {
    const std::string what = "scenario." + key;
    if (key == "mode") c.mode = parse_mode(boost::algorithm::trim_copy(value));
    else if (key == "origin_std_km") c.origin_std_km = parse_number(value, what);
    else if (key == "trip_mean_km") c.trip_mean_km = parse_number(value, what);
    else if (key == "trip_std_km") c.trip_std_km = parse_number(value, what);
    else if (key == "value_of_time") c.value_of_time = parse_number(value, what);
    else if (key == "demand_density") c.demand_density = parse_number(value, what);
    else if (key == "length_km") c.length_km = parse_number(value, what);
    else if (key == "grid_cells") c.grid_cells = parse_int(value, what);
    else if (key == "demand_file") c.demand_file = boost::algorithm::trim_copy(value);
    else throw std::invalid_argument("unknown key '" + what + "'");
}

void apply_override(ScenarioConfig& c, const std::string& key, const std::string& value) {
    const std::string what = "overrides." + key;
    if (key == "transfer_penalty_min") c.transfer_penalty_min = parse_number(value, what);
    else if (key == "walk_speed") c.walk_speed = parse_number(value, what);
    else if (key == "backtrack_weight") c.backtrack_weight = parse_number(value, what);
    else throw std::invalid_argument("unknown key '" + what + "'");
}

void apply_solver(ScenarioConfig& c, const std::string& key, const std::string& value) {
    const std::string what = "solver." + key;
    auto& s = c.solver;
    if (key == "msa_alpha") s.msa_alpha = parse_number(value, what);
    else if (key == "tol_backtrack") s.tol_backtrack = parse_number(value, what);
    else if (key == "tol_headway") s.tol_headway = parse_number(value, what);
    else if (key == "max_bay_size") s.max_bay_size = parse_int(value, what);
    else if (key == "max_iterations") s.max_iterations = parse_int(value, what);
    else if (key == "line_candidates") s.line_candidates = c.bound.line_candidates = parse_int_list(value, what);
    else if (key == "min_spacing_km") s.min_spacing_km = c.bound.min_spacing_km = parse_number(value, what);
    else if (key == "max_spacing_km") s.max_spacing_km = c.bound.max_spacing_km = parse_number(value, what);
    else if (key == "headway_step_min") c.bound.headway_step_h = parse_number(value, what) / 60.0;
    else if (key == "refine_bound") c.bound.refine = parse_bool(value, what);
    else if (key == "bound") c.run_bound = parse_bool(value, what);
    else if (key == "exact") c.run_exact = parse_bool(value, what);
    else if (key == "backtrack_route") c.exact.backtrack_route = parse_backtrack_route(value);
    else throw std::invalid_argument("unknown key '" + what + "'");
}

void apply_sweep(SweepGrid& g, const std::string& key, const std::string& value) {
    const std::string what = "sweep." + key;
    if (key == "modes") {
        std::vector<std::string> parts;
        boost::algorithm::split(parts, value, boost::algorithm::is_any_of(","));
        g.modes.clear();
        for (auto& p : parts) g.modes.push_back(parse_mode(boost::algorithm::trim_copy(p)));
    } else if (key == "origin_std_km") g.origin_std_km = parse_number_list(value, what);
    else if (key == "trip_mean_km") g.trip_mean_km = parse_number_list(value, what);
    else if (key == "trip_std_km") g.trip_std_km = parse_number_list(value, what);
    else if (key == "value_of_time") g.value_of_time = parse_number_list(value, what);
    else if (key == "bus_density") g.bus_density = parse_number_list(value, what);
    else if (key == "rail_density") g.rail_density = parse_number_list(value, what);
    else throw std::invalid_argument("unknown key '" + what + "'");
}

} // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig rc;
    try {
        for (const auto& [section, body] : tree) {
            if (body.empty() && !body.data().empty())
                throw std::invalid_argument("key '" + section + "' outside a section");
            for (const auto& [key, node] : body) {
                const std::string value = node.get_value<std::string>();
                if (section == "scenario") apply_scenario(rc.scenario, key, value);
                else if (section == "overrides") apply_override(rc.scenario, key, value);
                else if (section == "solver") apply_solver(rc.scenario, key, value);
                else if (section == "sweep") apply_sweep(rc.sweep, key, value);
                else throw std::invalid_argument("unknown section [" + section + "]");
            }
        }
        rc.sweep.base = rc.scenario;
        rc.scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(source + ": " + e.what());
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

} // namespace skipstop
