#include "skipstop/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <omp.h>
#include <spdlog/spdlog.h>

namespace skipstop {

void ScenarioConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    if (!(origin_std_km > 0.0)) throw std::invalid_argument("origin spread must be positive (inf for uniform)");
    positive(trip_mean_km, "mean trip length");
    if (!(trip_std_km >= 0.0)) throw std::invalid_argument("trip length spread must be non-negative");
    positive(value_of_time, "value of time");
    positive(demand_density, "demand density");
    positive(length_km, "corridor length");
    if (grid_cells < 4 || grid_cells % 2 != 0) throw std::invalid_argument("grid cell count must be even and >= 4");
    if (transfer_penalty_min && !(*transfer_penalty_min >= 0.0))
        throw std::invalid_argument("transfer penalty must be non-negative");
    if (walk_speed) positive(*walk_speed, "walk speed");
    if (backtrack_weight && !(*backtrack_weight >= 1.0))
        throw std::invalid_argument("backtracking weight must be at least 1");
    solver.validate();
    bound.validate();
    if (exact.substeps_per_cell < 1) throw std::invalid_argument("access quadrature needs at least one sub-step");
    params().validate();
}

ParamSet ScenarioConfig::params() const {
    ParamSet p = ParamSet::preset(mode, value_of_time);
    if (transfer_penalty_min) p.transfer_penalty_h = *transfer_penalty_min / 60.0;
    if (walk_speed) p.walk_speed = *walk_speed;
    if (backtrack_weight) p.backtrack_weight = *backtrack_weight;
    return p;
}

DemandSpec ScenarioConfig::demand() const {
    DemandSpec d;
    d.trips_per_direction = demand_density * length_km;
    if (std::isinf(origin_std_km))
        d.origins = UniformOrigins{};
    else
        d.origins = TruncatedNormalOrigins{origin_std_km};
    d.trip_length = {trip_mean_km, trip_std_km};
    if (demand_file) d.raw_matrix = load_demand_matrix_csv(*demand_file, grid_cells);
    return d;
}

std::string ScenarioConfig::id() const {
    std::string s = fmt::format("{}_so{}_el{:g}_sl{:g}_mu{:g}_d{:g}", to_string(mode),
                                std::isinf(origin_std_km) ? std::string("inf") : fmt::format("{:g}", origin_std_km),
                                trip_mean_km, trip_std_km, value_of_time, demand_density);
    if (length_km != 40.0 || grid_cells != 80) s += fmt::format("_L{:g}_n{}", length_km, grid_cells);
    if (transfer_penalty_min) s += fmt::format("_ct{:g}", *transfer_penalty_min);
    if (walk_speed) s += fmt::format("_vw{:g}", *walk_speed);
    if (backtrack_weight) s += fmt::format("_wb{:g}", *backtrack_weight);
    if (demand_file) s += "_file";
    return s;
}

const char* to_string(CaseStatus s) {
    switch (s) {
    case CaseStatus::ok: return "ok";
    case CaseStatus::infeasible: return "infeasible";
    default: return "error";
    }
}

double savings_fraction(const CostBreakdown& all_stop, const CostBreakdown& skip_stop) {
    return (all_stop.total - skip_stop.total) / all_stop.total;
}

DemandField build_scenario_field(const ScenarioConfig& config) {
    const Corridor corridor(config.length_km, config.grid_cells);
    return build_demand_field(config.demand(), corridor);
}

namespace {

std::string infeasible_reason(const std::vector<Solution>& cells) {
    for (const auto& c : cells)
        if (c.infeasible_reason == "capacity exceeded") return c.infeasible_reason;
    return cells.empty() ? "no line pairs" : cells.front().infeasible_reason;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

} // namespace

CaseResult run_case(const ScenarioConfig& config) {
    CaseResult r;
    r.config = config;
    try {
        config.validate();
        const ParamSet params = config.params();
        const auto t0 = std::chrono::steady_clock::now();
        const DemandField field = build_scenario_field(config);
        r.preprocess_seconds = seconds_since(t0);

        const auto t1 = std::chrono::steady_clock::now();
        HeuristicResult h = stage2_solve(field, params, config.solver);
        SolverSettings single = config.solver;
        single.line_candidates = {1};
        r.all_stop = stage2_solve(field, params, single).best;
        if (const Solution* cell = h.cell(1, 1)) {
            if (cell->feasible != r.all_stop.feasible
                || (cell->feasible && cell->cost.total != r.all_stop.cost.total))
                throw std::logic_error("all-stop restriction disagrees with the (1, 1) enumeration cell");
        }
        r.skip_stop = h.best;
        r.cells = std::move(h.cells);
        for (const auto& c : r.cells)
            if (c.feasible && std::max(c.scalars.lines_cw, c.scalars.lines_ccw) > 1) r.multi_line_feasible = true;
        if (!r.skip_stop.feasible) {
            r.status = CaseStatus::infeasible;
            r.reason = infeasible_reason(r.cells);
            r.solve_seconds = seconds_since(t1);
            return r;
        }
        if (r.all_stop.feasible) r.savings = savings_fraction(r.all_stop.cost, r.skip_stop.cost);

        if (config.run_bound) {
            r.bound = lb_solve(field, params, config.bound);
            if (r.bound->feasible) {
                r.gap = optimality_gap(r.skip_stop.cost.total, r.bound->value);
                r.removed = removed_term(field, r.skip_stop, params);
                r.gap_indicative = r.removed < 0.0;
                if (r.gap_indicative) spdlog::warn("{}: dropped backtracking term is {:.4g}", config.id(), r.removed);
            }
        }
        if (config.run_exact) {
            const auto& sc = r.skip_stop.scalars;
            r.plan = generate_stop_plan(field.corridor(), r.skip_stop.profiles, sc.lines_cw, sc.lines_ccw);
            r.exact = exact_costs(field, *r.plan, sc, params, config.exact);
            r.errors = error_report(r.exact->cost, r.skip_stop.cost);
            if (!r.exact->capacity_ok)
                spdlog::warn("{}: discrete plan loads vehicles to {:.3f} of capacity", config.id(),
                             r.exact->max_load_ratio);
        }
        r.solve_seconds = seconds_since(t1);
        spdlog::info("{}: GC {:.4f}, m ({}, {}), savings {:.4f}, gap {:.5f}, {:.2f}s + {:.2f}s", config.id(),
                     r.skip_stop.cost.total, r.skip_stop.scalars.lines_cw, r.skip_stop.scalars.lines_ccw,
                     r.savings, r.gap, r.preprocess_seconds, r.solve_seconds);
    } catch (const std::exception& e) {
        r.status = CaseStatus::error;
        r.reason = e.what();
        spdlog::error("{}: {}", config.id(), e.what());
    }
    return r;
}

std::vector<ScenarioConfig> SweepGrid::expand() const {
    std::vector<ScenarioConfig> out;
    for (Mode mode : modes)
        for (double so : origin_std_km)
            for (double el : trip_mean_km)
                for (double sl : trip_std_km)
                    for (double mu : value_of_time)
                        for (double d : mode == Mode::bus ? bus_density : rail_density) {
                            ScenarioConfig c = base;
                            c.mode = mode;
                            c.origin_std_km = so;
                            c.trip_mean_km = el;
                            c.trip_std_km = sl;
                            c.value_of_time = mu;
                            c.demand_density = d;
                            out.push_back(std::move(c));
                        }
    return out;
}

std::vector<CaseResult> run_sweep(const std::vector<ScenarioConfig>& cases, int workers) {
    std::vector<CaseResult> out(cases.size());
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    const int count = static_cast<int>(cases.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int i = 0; i < count; ++i) out[i] = run_case(cases[i]);
    return out;
}

SweepSummary summarize(const std::vector<CaseResult>& results) {
    SweepSummary s;
    s.cases = static_cast<int>(results.size());
    double gap_sum = 0.0;
    int exact_cases = 0;
    for (const auto& r : results) {
        if (r.status != CaseStatus::ok) continue;
        ++s.feasible;
        if (std::isfinite(r.gap)) {
            ++s.bounded;
            gap_sum += r.gap;
            s.max_gap = std::max(s.max_gap, r.gap);
        }
        if (std::isfinite(r.savings)) s.max_savings = std::max(s.max_savings, r.savings);
        if (!r.errors.empty()) {
            if (s.error_components.empty()) {
                for (const auto& e : r.errors) s.error_components.push_back(e.component);
                s.mean_error.assign(r.errors.size(), 0.0);
                s.max_error.assign(r.errors.size(), 0.0);
            }
            for (std::size_t k = 0; k < r.errors.size(); ++k) {
                s.mean_error[k] += r.errors[k].error;
                s.max_error[k] = std::max(s.max_error[k], r.errors[k].error);
            }
            ++exact_cases;
        }
    }
    if (s.bounded > 0) s.mean_gap = gap_sum / s.bounded;
    for (auto& e : s.mean_error) e /= exact_cases;
    return s;
}

} // namespace skipstop
