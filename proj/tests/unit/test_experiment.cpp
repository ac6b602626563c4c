#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "skipstop/config.hpp"
#include "skipstop/experiment.hpp"
#include "skipstop/report.hpp"

using namespace skipstop;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const fs::path& p) {
    std::ifstream in(p);
    int n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("skipstop_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ScenarioConfig small_case(Mode mode, double density) {
    ScenarioConfig c;
    c.mode = mode;
    c.origin_std_km = 8.0;
    c.trip_mean_km = 8.0;
    c.trip_std_km = 2.0;
    c.value_of_time = 10.0;
    c.demand_density = density;
    c.grid_cells = 40;
    return c;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("config files are parsed and checked") {
    const auto rc = parse("[scenario]\nmode = rail\norigin_std_km = inf\ntrip_mean_km = 12\n"
                          "value_of_time = 5\ndemand_density = 500\n"
                          "[overrides]\ntransfer_penalty_min = 2\nwalk_speed = 4\n"
                          "[solver]\nline_candidates = 1,2,3\nexact = false\n"
                          "[sweep]\nmodes = bus\nvalue_of_time = 20\n");
    CHECK(rc.scenario.mode == Mode::rail);
    CHECK(std::isinf(rc.scenario.origin_std_km));
    CHECK(rc.scenario.trip_mean_km == 12.0);
    CHECK(rc.scenario.transfer_penalty_min.value() == 2.0);
    CHECK(rc.scenario.params().transfer_penalty_h == doctest::Approx(2.0 / 60.0));
    CHECK(rc.scenario.params().walk_speed == 4.0);
    CHECK(rc.scenario.solver.line_candidates == std::vector<int>{1, 2, 3});
    CHECK_FALSE(rc.scenario.run_exact);
    CHECK(rc.sweep.modes.size() == 1);
    CHECK(rc.sweep.expand().size() == 3 * 2 * 2 * 1 * 3);

    CHECK_THROWS_AS(parse("[scenario]\nspeed = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[extras]\nx = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[scenario]\ntrip_mean_km = eight\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[scenario]\ntrip_std_km = -1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[scenario]\nmode = tram\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[solver]\nline_candidates = 1,2.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[solver]\nexact = maybe\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), std::invalid_argument);
    CHECK(parse_number(" 2.5 ", "x") == 2.5);
    CHECK_THROWS(parse_number("2.5km", "x"));
}

TEST_CASE("case identifiers") {
    auto c = small_case(Mode::bus, 37.5);
    c.grid_cells = 80;
    CHECK(c.id() == "bus_so8_el8_sl2_mu10_d37.5");
    c.origin_std_km = kUniformOrigins;
    c.walk_speed = 4.0;
    CHECK(c.id() == "bus_soinf_el8_sl2_mu10_d37.5_vw4");
}

TEST_CASE("the sweep grid has the fixed nesting order") {
    SweepGrid g;
    const auto cases = g.expand();
    CHECK(cases.size() == 144);
    CHECK(cases.front().mode == Mode::bus);
    CHECK(std::isinf(cases.front().origin_std_km));
    CHECK(cases[1].demand_density == 75.0);
    CHECK(cases[3].value_of_time == 10.0);
    CHECK(cases.back().mode == Mode::rail);
    CHECK(cases.back().demand_density == 1000.0);
}

TEST_CASE("a case reports consistent savings") {
    const auto r = run_case(small_case(Mode::rail, 500.0));
    REQUIRE(r.status == CaseStatus::ok);
    const double expected = (r.all_stop.cost.total - r.skip_stop.cost.total) / r.all_stop.cost.total;
    CHECK(std::fabs(r.savings - expected) <= 1e-12);
    CHECK(r.savings >= 0.0);
    const Solution* cell = nullptr;
    for (const auto& c : r.cells)
        if (c.scalars.lines_cw == 1 && c.scalars.lines_ccw == 1) cell = &c;
    REQUIRE(cell != nullptr);
    CHECK(cell->cost.total == r.all_stop.cost.total);
    REQUIRE(r.bound.has_value());
    CHECK(r.gap >= 0.0);
    REQUIRE(r.exact.has_value());
    CHECK(r.errors.size() == 11);
}

TEST_CASE("invalid scenarios become error rows") {
    auto c = small_case(Mode::bus, 37.5);
    c.trip_std_km = -1.0;
    const auto r = run_case(c);
    CHECK(r.status == CaseStatus::error);
    CHECK_FALSE(r.reason.empty());
}

TEST_CASE("sweeps are deterministic and fill the tables") {
    std::vector<ScenarioConfig> cases{small_case(Mode::bus, 75.0), small_case(Mode::rail, 250.0),
                                      small_case(Mode::rail, 1000.0)};
    for (auto& c : cases) c.run_exact = false;
    const auto a = run_sweep(cases);
    const auto b = run_sweep(cases);
    const auto da = scratch("sweep_a"), db = scratch("sweep_b");
    emit_reports(a, da);
    emit_reports(b, db);
    for (const char* f : {"cases.csv", "summary.csv", "savings.csv", "gaps.csv"}) {
        REQUIRE(fs::exists(da / f));
        CHECK(slurp(da / f) == slurp(db / f));
    }
    CHECK(line_count(da / "cases.csv") == 1 + static_cast<int>(cases.size()));
    std::ifstream in(da / "cases.csv");
    std::string header;
    std::getline(in, header);
    std::string joined;
    for (const auto& col : case_columns()) joined += (joined.empty() ? "" : ",") + col;
    CHECK(header == joined);
    const auto s = summarize(a);
    CHECK(s.cases == 3);
    CHECK(s.max_savings >= 0.0);
}

TEST_CASE("number formatting") {
    CHECK(format_number(std::nan("")) == "");
    CHECK(format_number(0.5) == "0.5");
    CHECK(std::stod(format_number(1.0 / 3.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("the command line rejects invalid configs") {
    const auto dir = scratch("cli");
    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[scenario]\nmode = bus\ntrip_std_km = -2\n";
    const std::string cmd = std::string(SKIPSTOP_CLI) + " solve -q --config " + bad.string() + " --out "
                            + (dir / "out").string() + " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) != 0);

    const auto good = dir / "good.ini";
    std::ofstream(good) << "[scenario]\nmode = bus\norigin_std_km = 8\ndemand_density = 75\ngrid_cells = 40\n"
                           "[solver]\nexact = false\n";
    const std::string ok = std::string(SKIPSTOP_CLI) + " bound -q --config " + good.string() + " --out "
                           + (dir / "out").string() + " > /dev/null 2>&1";
    CHECK(std::system(ok.c_str()) == 0);
}

} // TEST_SUITE
