#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "skipstop/config.hpp"
#include "skipstop/report.hpp"

using namespace skipstop;
namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    std::optional<std::string> mode, origin_std, demand_file, backtrack_route, lines;
    std::optional<double> trip_mean, trip_std, mu, density, length, transfer_penalty, walk_speed, backtrack_weight;
    std::optional<int> cells;
    bool no_bound = false;
    bool no_exact = false;
    int workers = 0;
    bool verbose = false;
    bool quiet = false;
    std::string od_dump;
};

void add_scenario_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "INI run file");
    cmd->add_option("--out", f.out, "report directory")->capture_default_str();
    cmd->add_option("--mode", f.mode, "bus or rail");
    cmd->add_option("--origin-std", f.origin_std, "origin spread around L/2 in km, or inf");
    cmd->add_option("--trip-mean", f.trip_mean, "mean trip length (km)");
    cmd->add_option("--trip-std", f.trip_std, "trip length standard deviation (km)");
    cmd->add_option("--mu", f.mu, "value of time ($/h)");
    cmd->add_option("--density", f.density, "trips/h per km, each direction");
    cmd->add_option("--length", f.length, "loop length (km)");
    cmd->add_option("--cells", f.cells, "grid cells (even)");
    cmd->add_option("--demand-file", f.demand_file, "n x n OD density matrix (trips/km^2/h)");
    cmd->add_option("--transfer-penalty", f.transfer_penalty, "minutes per transfer");
    cmd->add_option("--walk-speed", f.walk_speed, "km/h");
    cmd->add_option("--backtrack-weight", f.backtrack_weight, "weight on backtracking time (>= 1)");
    cmd->add_option("--lines", f.lines, "candidate line counts, e.g. 1,2,3,4");
    cmd->add_option("--backtrack-route", f.backtrack_route, "cheaper_option or nearest_transfer");
    cmd->add_flag("-v,--verbose", f.verbose, "debug logging");
    cmd->add_flag("-q,--quiet", f.quiet, "warnings and errors only");
}

RunConfig resolve(const Flags& f) {
    RunConfig rc;
    if (!f.config.empty()) rc = load_config(f.config);
    auto& s = rc.scenario;
    if (f.mode) s.mode = parse_mode(*f.mode);
    if (f.origin_std) s.origin_std_km = parse_number(*f.origin_std, "--origin-std");
    if (f.trip_mean) s.trip_mean_km = *f.trip_mean;
    if (f.trip_std) s.trip_std_km = *f.trip_std;
    if (f.mu) s.value_of_time = *f.mu;
    if (f.density) s.demand_density = *f.density;
    if (f.length) s.length_km = *f.length;
    if (f.cells) s.grid_cells = *f.cells;
    if (f.demand_file) s.demand_file = *f.demand_file;
    if (f.transfer_penalty) s.transfer_penalty_min = *f.transfer_penalty;
    if (f.walk_speed) s.walk_speed = *f.walk_speed;
    if (f.backtrack_weight) s.backtrack_weight = *f.backtrack_weight;
    if (f.lines) s.solver.line_candidates = s.bound.line_candidates = parse_int_list(*f.lines, "--lines");
    if (f.backtrack_route) s.exact.backtrack_route = parse_backtrack_route(*f.backtrack_route);
    if (f.no_bound) s.run_bound = false;
    if (f.no_exact) s.run_exact = false;
    s.validate();
    // Command-line scenario values become the fixed part of a sweep.
    rc.sweep.base = s;
    return rc;
}

void print_case(const CaseResult& r) {
    fmt::print("case {}: {}", r.config.id(), to_string(r.status));
    if (!r.reason.empty()) fmt::print(" ({})", r.reason);
    fmt::print("\n");
    if (r.status != CaseStatus::ok) return;
    const auto& s = r.skip_stop;
    fmt::print("  lines cw/ccw {} / {}, headways {:.3f} / {:.3f} min, GC {:.4f} h/h\n", s.scalars.lines_cw,
               s.scalars.lines_ccw, s.scalars.headway_cw * 60.0, s.scalars.headway_ccw * 60.0, s.cost.total);
    if (r.all_stop.feasible)
        fmt::print("  all-stop GC {:.4f} h/h, savings {:.3f}%\n", r.all_stop.cost.total, 100.0 * r.savings);
    if (std::isfinite(r.gap))
        fmt::print("  lower bound {:.4f}, gap {:.3f}%{}\n", r.bound->value, 100.0 * r.gap,
                   r.gap_indicative ? " (indicative)" : "");
    if (r.exact)
        fmt::print("  {} stops, {} transfer stops, exact GC {:.4f}\n", r.plan->stop_count(),
                   r.plan->transfer_count(), r.exact->cost.total);
}

int exit_code(const std::vector<CaseResult>& results) {
    for (const auto& r : results)
        if (r.status == CaseStatus::error) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("skipstop");
    spdlog::set_default_logger(logger);

    CLI::App app{"Skip-stop loop corridor design"};
    app.require_subcommand(1);
    Flags f;

    auto* solve = app.add_subcommand("solve", "solve one case and write its reports");
    add_scenario_flags(solve, f);
    solve->add_flag("--no-bound", f.no_bound, "skip the lower bound");
    solve->add_flag("--no-exact", f.no_exact, "skip the stop plan and exact evaluation");

    auto* sweep = app.add_subcommand("sweep", "run the scenario grid");
    add_scenario_flags(sweep, f);
    sweep->add_option("--workers", f.workers, "cases solved concurrently (0 = all threads)");
    sweep->add_flag("--no-bound", f.no_bound, "skip the lower bound");
    sweep->add_flag("--no-exact", f.no_exact, "skip the stop plan and exact evaluation");

    auto* plan = app.add_subcommand("plan", "solve one case and emit its stop plan");
    add_scenario_flags(plan, f);

    auto* verify = app.add_subcommand("verify", "exact evaluation of the stop plan against the model");
    add_scenario_flags(verify, f);
    verify->add_option("--od-dump", f.od_dump, "write per-OD-pair accounting to this CSV");

    auto* bound = app.add_subcommand("bound", "lower bound only");
    add_scenario_flags(bound, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    spdlog::set_level(f.verbose ? spdlog::level::debug : f.quiet ? spdlog::level::warn : spdlog::level::info);

    RunConfig rc;
    try {
        rc = resolve(f);
    } catch (const std::exception& e) {
        fmt::print(stderr, "invalid configuration: {}\n", e.what());
        return 2;
    }

    try {
        const fs::path out(f.out);
        fs::create_directories(out);
        if (solve->parsed()) {
            const CaseResult r = run_case(rc.scenario);
            print_case(r);
            emit_reports({r}, out);
            return exit_code({r});
        }
        if (sweep->parsed()) {
            const auto cases = rc.sweep.expand();
            spdlog::info("sweeping {} cases", cases.size());
            const auto results = run_sweep(cases, f.workers);
            emit_reports(results, out);
            const auto s = summarize(results);
            fmt::print("{} cases, {} feasible; gap mean {:.3f}% max {:.3f}%; max savings {:.3f}%\n", s.cases,
                       s.feasible, 100.0 * s.mean_gap, 100.0 * s.max_gap, 100.0 * s.max_savings);
            return exit_code(results);
        }
        if (plan->parsed() || verify->parsed()) {
            ScenarioConfig c = rc.scenario;
            c.run_bound = false;
            c.run_exact = true;
            const CaseResult r = run_case(c);
            print_case(r);
            if (r.status != CaseStatus::ok) return r.status == CaseStatus::error ? 1 : 0;
            write_plan(r, out);
            write_profiles(r, out);
            if (verify->parsed()) {
                write_errors(r, out);
                for (const auto& e : r.errors)
                    fmt::print("  {:<13} approx {:>12.5f} exact {:>12.5f} {}{:.3f}{}\n", e.component, e.approx,
                               e.exact, e.absolute ? "abs " : "", e.absolute ? e.error : 100.0 * e.error,
                               e.absolute ? "" : "%");
                if (!f.od_dump.empty()) {
                    const DemandField field = build_scenario_field(c);
                    write_od_accounts(od_accounts(field, *r.plan, r.skip_stop.scalars, c.params(), c.exact),
                                      f.od_dump);
                }
            }
            return 0;
        }
        if (bound->parsed()) {
            const ScenarioConfig& c = rc.scenario;
            const DemandField field = build_scenario_field(c);
            const auto lb = lb_solve(field, c.params(), c.bound);
            if (!lb.feasible) {
                fmt::print("case {}: no feasible headway range\n", c.id());
                return 0;
            }
            fmt::print("case {}: lower bound {:.4f} h/h at lines {} / {}, headways {:.3f} / {:.3f} min "
                       "(grid {:.4f}){}\n",
                       c.id(), lb.value, lb.scalars.lines_cw, lb.scalars.lines_ccw, lb.scalars.headway_cw * 60.0,
                       lb.scalars.headway_ccw * 60.0, lb.grid_value, lb.symmetric_demand ? "" : ", asymmetric demand");
            CsvWriter w(out / ("bound_" + c.id() + ".csv"));
            w.row({"x_km", "single_stop_bays", "spacing_free_km", "spacing_bay_km", "value"});
            for (int j = 0; j < field.size(); ++j) {
                const auto& p = lb.points[j];
                w.row({format_number(field.corridor().point(j)), p.single_stop_bays ? "1" : "0",
                       format_number(p.spacing_free), format_number(p.spacing_bay), format_number(p.value)});
            }
            w.close();
            return 0;
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
