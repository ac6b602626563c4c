#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "skipstop/exact_eval.hpp"
#include "skipstop/heuristic.hpp"
#include "skipstop/lower_bound.hpp"
#include "skipstop/stop_plan.hpp"

namespace skipstop {

inline constexpr double kUniformOrigins = std::numeric_limits<double>::infinity();

struct ScenarioConfig {
    Mode mode = Mode::bus;
    double origin_std_km = kUniformOrigins;
    double trip_mean_km = 8.0;
    double trip_std_km = 2.0;
    double value_of_time = 20.0;
    double demand_density = 37.5;  // trips/h per km of corridor, each direction
    double length_km = 40.0;
    int grid_cells = 80;
    std::optional<double> transfer_penalty_min;
    std::optional<double> walk_speed;
    std::optional<double> backtrack_weight;
    std::optional<std::string> demand_file;
    SolverSettings solver;
    LowerBoundSettings bound;
    ExactSettings exact;
    bool run_bound = true;
    bool run_exact = true;

    void validate() const;
    ParamSet params() const;
    DemandSpec demand() const;
    /// Stable identifier built from the scenario values.
    std::string id() const;
};

enum class CaseStatus { ok, infeasible, error };
const char* to_string(CaseStatus s);

struct CaseResult {
    ScenarioConfig config;
    CaseStatus status = CaseStatus::ok;
    std::string reason;
    Solution skip_stop;   // best over every line pair
    Solution all_stop;    // one line per direction
    std::vector<Solution> cells;
    /// Some pair with more than one line in a direction is feasible.
    bool multi_line_feasible = false;
    std::optional<LowerBoundResult> bound;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double removed = std::numeric_limits<double>::quiet_NaN();
    bool gap_indicative = false;
    std::optional<StopPlan> plan;
    std::optional<ExactResult> exact;
    std::vector<ErrorRow> errors;
    double savings = std::numeric_limits<double>::quiet_NaN();
    double preprocess_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// (all-stop GC - skip-stop GC) / all-stop GC.
double savings_fraction(const CostBreakdown& all_stop, const CostBreakdown& skip_stop);

DemandField build_scenario_field(const ScenarioConfig& config);

CaseResult run_case(const ScenarioConfig& config);

struct SweepGrid {
    ScenarioConfig base;
    std::vector<Mode> modes{Mode::bus, Mode::rail};
    std::vector<double> origin_std_km{kUniformOrigins, 8.0, 4.0};
    std::vector<double> trip_mean_km{8.0, 12.0};
    std::vector<double> trip_std_km{2.0, 4.0};
    std::vector<double> value_of_time{5.0, 10.0};
    std::vector<double> bus_density{37.5, 75.0, 150.0};
    std::vector<double> rail_density{250.0, 500.0, 1000.0};

    /// Cartesian product in a fixed nesting order: mode, sigma_o, E_l,
    /// sigma_l, mu, density.
    std::vector<ScenarioConfig> expand() const;
};

/// Runs every case; results keep the input order. workers <= 0 uses the
/// OpenMP default.
std::vector<CaseResult> run_sweep(const std::vector<ScenarioConfig>& cases, int workers = 0);

struct SweepSummary {
    int cases = 0;
    int feasible = 0;
    int bounded = 0;
    double mean_gap = 0.0;
    double max_gap = 0.0;
    double max_savings = 0.0;
    std::vector<std::string> error_components;
    std::vector<double> mean_error;
    std::vector<double> max_error;
};

SweepSummary summarize(const std::vector<CaseResult>& results);

} // namespace skipstop
