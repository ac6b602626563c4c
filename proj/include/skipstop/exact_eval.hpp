#pragma once

#include <array>
#include <string>
#include <vector>

#include "skipstop/cost_model.hpp"
#include "skipstop/stop_plan.hpp"

namespace skipstop {

enum class BacktrackRoute {
    cheaper_option,    // compare transferring downstream vs. backtracking first
    nearest_transfer,  // transfer at whichever bay end is closer to both stops
};

struct ExactSettings {
    BacktrackRoute backtrack_route = BacktrackRoute::cheaper_option;
    int substeps_per_cell = 50;
};

/// Trips per hour between stops, row-major [origin * N + destination]. Each
/// demand cell is shared among the stops whose catchments overlap it.
std::vector<double> aggregate_od_demand(const DemandField& field, const StopPlan& plan);

struct TripClass {
    Direction direction = Direction::cw;
    int type = 1;                  // 1..5
    double distance = 0.0;         // km travelled, including any backtrack
    double visited = 0.0;          // stops served en route, alighting stop included
    int transfer_stop = -1;        // stop where the line change happens
};

/// Direction, trip type, distance and visited stops for a trip i -> j, i != j.
TripClass classify_trip(int i, int j, const StopPlan& plan, const ParamSet& params,
                        const ExactSettings& settings = {});

struct ExactResult {
    CostBreakdown cost;
    std::array<double, 5> trips_cw{};   // trips per hour by type
    std::array<double, 5> trips_ccw{};
    double demand_total = 0.0;          // stop-to-stop trips including i = j
    double same_stop_demand = 0.0;
    double max_load_ratio = 0.0;        // peak segment load per vehicle over capacity
    bool capacity_ok = true;
};

ExactResult exact_costs(const DemandField& field, const StopPlan& plan, const DesignScalars& scalars,
                        const ParamSet& params, const ExactSettings& settings = {});

struct OdAccount {
    int origin = 0;
    int destination = 0;
    double demand = 0.0;
    TripClass trip;
    double wait = 0.0;      // h per trip
    double ride = 0.0;
    double transfer = 0.0;
};

/// Per-pair accounting for pairs with positive demand.
std::vector<OdAccount> od_accounts(const DemandField& field, const StopPlan& plan, const DesignScalars& scalars,
                                   const ParamSet& params, const ExactSettings& settings = {});

struct ErrorRow {
    std::string component;
    double approx = 0.0;
    double exact = 0.0;
    double error = 0.0;     // |exact - approx| / approx, or the absolute gap when approx = 0
    bool absolute = false;
};

/// Eleven rows: GC, user total, agency total, then the eight components.
std::vector<ErrorRow> error_report(const CostBreakdown& exact, const CostBreakdown& approx);

} // namespace skipstop
