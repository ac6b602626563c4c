#pragma once

#include <array>
#include <span>
#include <vector>

#include "skipstop/demand.hpp"
#include "skipstop/params.hpp"

namespace skipstop {

inline constexpr int kMaxLines = 4;

/// Number of lines and combined headway (h) per direction.
struct DesignScalars {
    int lines_cw = 1;
    int lines_ccw = 1;
    double headway_cw = 0.1;
    double headway_ccw = 0.1;

    int lines(Direction d) const { return d == Direction::cw ? lines_cw : lines_ccw; }
    double headway(Direction d) const { return d == Direction::cw ? headway_cw : headway_ccw; }
};

/// Headway floor: H_min, plus one dwell when several lines share the lane.
double headway_floor(int lines, const ParamSet& params);

/// Stop spacing (km) and stops per skip-stop bay at each grid cell.
struct DesignProfiles {
    std::vector<double> spacing;
    std::vector<int> bay_size;

    static DesignProfiles uniform(int n, double spacing, int bay_size);
    void validate(int n, int max_bay_size = 30) const;
};

/// Every component in passenger-hours per hour.
struct CostBreakdown {
    double access = 0.0;
    double wait = 0.0;
    double in_vehicle = 0.0;
    double transfer = 0.0;
    double vehicle_km = 0.0;
    double vehicle_hours = 0.0;
    double line_infra = 0.0;
    double stop_infra = 0.0;
    double total = 0.0;

    double user() const { return access + wait + in_vehicle + transfer; }
    double agency() const { return vehicle_km + vehicle_hours + line_infra + stop_infra; }
    void sum() { total = user() + agency(); }
};

/// Vehicle pace (h/km) including dwell at the stops a line visits.
double pace(double spacing, int bay_size, int lines, const ParamSet& params);
inline double commercial_speed(double spacing, int bay_size, int lines, const ParamSet& params) {
    return 1.0 / pace(spacing, bay_size, lines, params);
}

double access_cost(const DemandField& field, std::span<const double> spacing, const ParamSet& params);

double wait_cost(const DemandField& field, const DesignScalars& scalars, std::span<const int> bay_size,
                 const BacktrackDensities& backtrack, const ParamSet& params);

/// Average wait per trip for the five trip types, per direction.
struct TripTypeWaits {
    std::array<double, 5> cw{};
    std::array<double, 5> ccw{};
};
TripTypeWaits trip_type_waits(const DesignScalars& scalars);

double invehicle_cost(const DemandField& field, const DesignScalars& scalars, const DesignProfiles& profiles,
                      const BacktrackDensities& backtrack, const ParamSet& params);

double transfer_penalty(const DemandField& field, const DesignScalars& scalars, std::span<const int> bay_size,
                        const ParamSet& params);

struct AgencyCosts {
    double vehicle_km = 0.0;
    double vehicle_hours = 0.0;
    double line_infra = 0.0;
    double stop_infra = 0.0;
};
AgencyCosts agency_costs(const DesignScalars& scalars, const DesignProfiles& profiles, const ParamSet& params,
                         const Corridor& corridor);

/// Generalised cost with backtracking densities derived from the profiles.
CostBreakdown generalized_cost(const DemandField& field, const DesignScalars& scalars,
                               const DesignProfiles& profiles, const ParamSet& params);
/// Generalised cost with caller-supplied backtracking densities.
CostBreakdown generalized_cost(const DemandField& field, const DesignScalars& scalars,
                               const DesignProfiles& profiles, const BacktrackDensities& backtrack,
                               const ParamSet& params);

/// Demand aggregates at one grid cell.
struct PointDemand {
    double p_cw = 0.0, q_cw = 0.0, p_ccw = 0.0, q_ccw = 0.0;
    double c_cw = 0.0, c_ccw = 0.0;

    static PointDemand at(const DemandField& field, int j);
    double trip_ends() const { return p_cw + q_cw + p_ccw + q_ccw; }
};

/// The part of GC that depends on the scalars only.
double scalar_cost(const DemandField& field, const DesignScalars& scalars, const ParamSet& params);

/// Cost density (h/h per km) collecting every spacing- and bay-dependent term
/// at one point, so that GC = scalar_cost + sum_j G_j dx.
double pointwise_cost(const DesignScalars& scalars, double spacing, int bay_size, const PointDemand& demand,
                      const PointBacktrack& backtrack, const ParamSet& params);

/// scalar_cost + sum_j pointwise_cost * dx.
double split_cost(const DemandField& field, const DesignScalars& scalars, const DesignProfiles& profiles,
                  const BacktrackDensities& backtrack, const ParamSet& params);

} // namespace skipstop
