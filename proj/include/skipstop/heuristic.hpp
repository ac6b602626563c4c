#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skipstop/cost_model.hpp"

namespace skipstop {

struct SolverSettings {
    double msa_alpha = 0.5;
    double tol_backtrack = 1e-4;  // trips/km/h
    double tol_headway = 1e-4;    // h
    int max_bay_size = 30;
    std::vector<int> line_candidates{1, 2, 3, 4};
    int max_iterations = 200;
    // Spacing search box; the upper end also stands in when a point has no
    // demand and no backtracking, where the first-order condition is silent.
    double min_spacing_km = 1e-3;
    double max_spacing_km = 5.0;

    void validate() const;
};

/// Interior optimum of the pointwise cost in s for a fixed bay size and
/// backtracking density. std::nullopt when the s-coefficient vanishes.
std::optional<double> spacing_candidate(const DesignScalars& scalars, int bay_size, const PointDemand& demand,
                                        const PointBacktrack& backtrack, const ParamSet& params);

struct SpacingChoice {
    double spacing = 0.0;
    bool capacity_infeasible = false;
};

/// Caps the candidate by the vehicle-capacity limit on backtracking flow.
SpacingChoice clamp_spacing(double candidate, int bay_size, const DesignScalars& scalars,
                            const PointDemand& demand, const PointBacktrack& backtrack, const ParamSet& params);

struct PointSolution {
    double spacing = 0.0;
    int bay_size = 1;
    PointBacktrack backtrack;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    bool feasible = true;
};

/// Bay-size enumeration with a successive-averages fixed point on the
/// backtracking densities at grid cell j.
PointSolution solve_point(const DemandField& field, int j, const DesignScalars& scalars, const ParamSet& params,
                          const SolverSettings& settings);

struct StageOneResult {
    DesignProfiles profiles;
    BacktrackDensities backtrack;
    int max_msa_iterations = 0;
    int unconverged_points = 0;
    int infeasible_points = 0;
};

/// Profiles for fixed scalars. Grid cells are solved concurrently.
StageOneResult stage1(const DemandField& field, const DesignScalars& scalars, const ParamSet& params,
                      const SolverSettings& settings);

namespace reference {
StageOneResult stage1(const DemandField& field, const DesignScalars& scalars, const ParamSet& params,
                      const SolverSettings& settings);
} // namespace reference

/// Unconstrained optimum headway for one direction given the profiles.
/// std::nullopt when the marginal wait coefficient is not positive.
std::optional<double> headway_candidate(Direction dir, int lines, const DesignProfiles& profiles,
                                        const BacktrackDensities& backtrack, const DemandField& field,
                                        const ParamSet& params);

/// Largest headway keeping peak on-board flow (including backtracking
/// patrons) within vehicle capacity.
double capacity_headway(Direction dir, const DesignProfiles& profiles, const BacktrackDensities& backtrack,
                        const DemandField& field, const ParamSet& params);

/// Middle value of the three.
double mid(double a, double b, double c);

/// mid{floor, candidate, ceiling}; std::nullopt when floor > ceiling.
std::optional<double> clamp_headway(double floor, double candidate, double ceiling);

struct TraceRow {
    int outer_iteration = 0;
    int msa_iterations = 0;
    double headway_cw = 0.0;
    double headway_ccw = 0.0;
    double headway_residual = 0.0;
    double generalized_cost = 0.0;
};

struct Solution {
    DesignScalars scalars;
    DesignProfiles profiles;
    BacktrackDensities backtrack;
    CostBreakdown cost;
    std::vector<TraceRow> trace;
    bool feasible = false;
    bool converged = false;
    std::string infeasible_reason;
};

/// Alternates stage 1 and the headway update for a fixed line pair.
Solution solve_line_pair(const DemandField& field, int lines_cw, int lines_ccw, const ParamSet& params,
                         const SolverSettings& settings);

struct HeuristicResult {
    Solution best;
    std::vector<Solution> cells;  // one per (lines_cw, lines_ccw) candidate, row-major

    /// Cell for a line pair, or nullptr when it was not enumerated.
    const Solution* cell(int lines_cw, int lines_ccw) const;
};

/// Enumerates every line pair and keeps the cheapest feasible design.
HeuristicResult stage2_solve(const DemandField& field, const ParamSet& params, const SolverSettings& settings);

} // namespace skipstop
