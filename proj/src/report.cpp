#include "skipstop/report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace skipstop {

namespace fs = std::filesystem;

CsvWriter::CsvWriter(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed on '" + path_.string() + "'");
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("closing '" + path_.string() + "' failed");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    return fmt::format("{:.10g}", v);
}

namespace {

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string minutes(double hours) { return format_number(hours * 60.0); }
std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

const ErrorRow* find_error(const CaseResult& r, const std::string& name) {
    for (const auto& e : r.errors)
        if (e.component == name) return &e;
    return nullptr;
}

} // namespace

std::vector<std::string> case_columns() {
    return {"case_id",        "mode",           "origin_std_km",   "trip_mean_km",    "trip_std_km",
            "value_of_time",  "demand_density", "transfer_penalty_min", "walk_speed", "backtrack_weight",
            "status",         "reason",         "lines_cw",        "lines_ccw",       "headway_cw_min",
            "headway_ccw_min", "gc",            "user_cost",       "agency_cost",     "access",
            "wait",           "in_vehicle",     "transfer",        "vehicle_km",      "vehicle_hours",
            "line_infra",     "stop_infra",     "converged",       "allstop_gc",      "allstop_headway_cw_min",
            "allstop_headway_ccw_min", "multi_line_feasible", "savings", "lower_bound",   "gap",             "gap_indicative",
            "removed_term",   "stops",          "transfer_stops",  "exact_gc",        "gc_error",
            "transfer_error", "max_load_ratio"};
}

std::vector<std::string> case_row(const CaseResult& r) {
    const auto& c = r.config;
    const auto& s = r.skip_stop;
    const bool ok = r.status == CaseStatus::ok;
    std::vector<std::string> row{c.id(),
                                 to_string(c.mode),
                                 num(c.origin_std_km),
                                 num(c.trip_mean_km),
                                 num(c.trip_std_km),
                                 num(c.value_of_time),
                                 num(c.demand_density),
                                 opt(c.transfer_penalty_min),
                                 opt(c.walk_speed),
                                 opt(c.backtrack_weight),
                                 to_string(r.status),
                                 r.reason};
    if (ok) {
        for (auto& f : std::vector<std::string>{
                 num(s.scalars.lines_cw), num(s.scalars.lines_ccw), minutes(s.scalars.headway_cw),
                 minutes(s.scalars.headway_ccw), num(s.cost.total), num(s.cost.user()), num(s.cost.agency()),
                 num(s.cost.access), num(s.cost.wait), num(s.cost.in_vehicle), num(s.cost.transfer),
                 num(s.cost.vehicle_km), num(s.cost.vehicle_hours), num(s.cost.line_infra), num(s.cost.stop_infra),
                 s.converged ? "1" : "0"})
            row.push_back(f);
    } else {
        row.resize(row.size() + 16);
    }
    if (ok && r.all_stop.feasible) {
        row.push_back(num(r.all_stop.cost.total));
        row.push_back(minutes(r.all_stop.scalars.headway_cw));
        row.push_back(minutes(r.all_stop.scalars.headway_ccw));
    } else {
        row.resize(row.size() + 3);
    }
    row.push_back(ok ? (r.multi_line_feasible ? "1" : "0") : "");
    row.push_back(num(r.savings));
    row.push_back(r.bound && r.bound->feasible ? num(r.bound->value) : "");
    row.push_back(num(r.gap));
    row.push_back(std::isfinite(r.gap) ? (r.gap_indicative ? "1" : "0") : "");
    row.push_back(num(r.removed));
    row.push_back(r.plan ? num(r.plan->stop_count()) : "");
    row.push_back(r.plan ? num(r.plan->transfer_count()) : "");
    row.push_back(r.exact ? num(r.exact->cost.total) : "");
    const ErrorRow* gc = find_error(r, "GC");
    const ErrorRow* tr = find_error(r, "UT_t");
    row.push_back(gc ? num(gc->error) : "");
    row.push_back(tr ? num(tr->error) : "");
    row.push_back(r.exact ? num(r.exact->max_load_ratio) : "");
    return row;
}

void write_cases(const std::vector<CaseResult>& results, const fs::path& dir) {
    CsvWriter w(dir / "cases.csv");
    w.row(case_columns());
    for (const auto& r : results) w.row(case_row(r));
    w.close();
}

void write_summary(const SweepSummary& s, const fs::path& dir) {
    CsvWriter w(dir / "summary.csv");
    w.row({"metric", "value"});
    w.row({"cases", num(s.cases)});
    w.row({"feasible", num(s.feasible)});
    w.row({"bounded", num(s.bounded)});
    w.row({"mean_gap", num(s.mean_gap)});
    w.row({"max_gap", num(s.max_gap)});
    w.row({"max_savings", num(s.max_savings)});
    for (std::size_t k = 0; k < s.error_components.size(); ++k) {
        w.row({"mean_error_" + s.error_components[k], num(s.mean_error[k])});
        w.row({"max_error_" + s.error_components[k], num(s.max_error[k])});
    }
    w.close();
}

void write_savings(const std::vector<CaseResult>& results, const fs::path& dir) {
    CsvWriter w(dir / "savings.csv");
    w.row({"mode", "origin_std_km", "trip_mean_km", "trip_std_km", "value_of_time", "demand_density",
           "transfer_penalty_min", "walk_speed", "backtrack_weight", "status", "lines_cw", "lines_ccw", "multi_line_feasible", "savings"});
    for (const auto& r : results) {
        const auto& c = r.config;
        const bool ok = r.status == CaseStatus::ok;
        w.row({to_string(c.mode), num(c.origin_std_km), num(c.trip_mean_km), num(c.trip_std_km),
               num(c.value_of_time), num(c.demand_density), opt(c.transfer_penalty_min), opt(c.walk_speed),
               opt(c.backtrack_weight), ok ? std::string(to_string(r.status)) : r.reason,
               ok ? num(r.skip_stop.scalars.lines_cw) : "", ok ? num(r.skip_stop.scalars.lines_ccw) : "",
               ok ? (r.multi_line_feasible ? "1" : "0") : "", num(r.savings)});
    }
    w.close();
}

void write_gaps(const std::vector<CaseResult>& results, const fs::path& dir) {
    CsvWriter w(dir / "gaps.csv");
    w.row({"case_id", "gc_heuristic", "gc_lower_bound", "gap_pct", "indicative"});
    for (const auto& r : results) {
        if (!std::isfinite(r.gap)) continue;
        w.row({r.config.id(), num(r.skip_stop.cost.total), num(r.bound->value), num(100.0 * r.gap),
               r.gap_indicative ? "1" : "0"});
    }
    w.close();
}

void write_profiles(const CaseResult& r, const fs::path& dir) {
    const auto& s = r.skip_stop;
    const Corridor corridor(r.config.length_km, r.config.grid_cells);
    std::vector<ProfileComparisonRow> cmp;
    if (r.plan) cmp = compare_profiles(corridor, s.profiles, *r.plan);
    CsvWriter w(dir / ("profiles_" + r.config.id() + ".csv"));
    w.row({"x_km", "spacing_km", "bay_size", "backtrack_cw", "backtrack_ccw", "spacing_fit_km", "bay_fit",
           "spacing_realized_km", "bay_realized", "bound_single_stop_bays"});
    for (int j = 0; j < corridor.size(); ++j) {
        std::vector<std::string> row{num(corridor.point(j)), num(s.profiles.spacing[j]), num(s.profiles.bay_size[j]),
                                     num(s.backtrack.cw[j]), num(s.backtrack.ccw[j])};
        if (!cmp.empty()) {
            row.push_back(num(cmp[j].spacing_fit));
            row.push_back(num(cmp[j].bay_fit));
            row.push_back(num(cmp[j].spacing_realized));
            row.push_back(num(cmp[j].bay_realized));
        } else {
            row.resize(row.size() + 4);
        }
        row.push_back(r.bound && r.bound->feasible ? (r.bound->points[j].single_stop_bays ? "1" : "0") : "");
        w.row(row);
    }
    w.close();
}

void write_errors(const CaseResult& r, const fs::path& dir) {
    CsvWriter w(dir / ("errors_" + r.config.id() + ".csv"));
    w.row({"component", "approx", "exact", "error", "absolute"});
    for (const auto& e : r.errors)
        w.row({e.component, num(e.approx), num(e.exact), num(e.error), e.absolute ? "1" : "0"});
    w.close();
}

void write_plan(const CaseResult& r, const fs::path& dir) {
    const auto& p = *r.plan;
    CsvWriter w(dir / ("plan_" + r.config.id() + ".csv"));
    w.row({"stop", "x_km", "is_transfer", "line_cw", "line_ccw"});
    for (int i = 0; i < p.stop_count(); ++i)
        w.row({num(i), num(p.stops[i]), p.is_transfer[i] ? "1" : "0", p.line_cw[i] < 0 ? "" : num(p.line_cw[i]),
               p.line_ccw[i] < 0 ? "" : num(p.line_ccw[i])});
    w.close();
}

void write_trace(const CaseResult& r, const fs::path& dir) {
    CsvWriter w(dir / ("trace_" + r.config.id() + ".csv"));
    w.row({"lines_cw", "lines_ccw", "outer_iteration", "msa_iterations", "headway_cw_min", "headway_ccw_min",
           "headway_residual_min", "gc", "feasible"});
    for (const auto& c : r.cells)
        for (const auto& t : c.trace)
            w.row({num(c.scalars.lines_cw), num(c.scalars.lines_ccw), num(t.outer_iteration), num(t.msa_iterations),
                   minutes(t.headway_cw), minutes(t.headway_ccw), minutes(t.headway_residual),
                   num(t.generalized_cost), c.feasible ? "1" : "0"});
    w.close();
}

void write_od_accounts(const std::vector<OdAccount>& rows, const fs::path& path) {
    CsvWriter w(path);
    w.row({"origin", "destination", "direction", "type", "distance_km", "visited", "transfer_stop", "demand", "wait_h",
           "ride_h", "transfer_h"});
    for (const auto& a : rows)
        w.row({num(a.origin), num(a.destination), to_string(a.trip.direction), num(a.trip.type),
               num(a.trip.distance), num(a.trip.visited), a.trip.transfer_stop < 0 ? "" : num(a.trip.transfer_stop),
               num(a.demand), num(a.wait), num(a.ride), num(a.transfer)});
    w.close();
}

void write_case_files(const CaseResult& r, const fs::path& dir) {
    if (r.status != CaseStatus::ok) return;
    write_profiles(r, dir);
    write_trace(r, dir);
    if (!r.errors.empty()) write_errors(r, dir);
    if (r.plan) write_plan(r, dir);
}

void emit_reports(const std::vector<CaseResult>& results, const fs::path& dir) {
    fs::create_directories(dir);
    write_cases(results, dir);
    write_summary(summarize(results), dir);
    write_savings(results, dir);
    write_gaps(results, dir);
    for (const auto& r : results) write_case_files(r, dir);
}

} // namespace skipstop
