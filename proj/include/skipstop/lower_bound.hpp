#pragma once

#include <vector>

#include "skipstop/cost_model.hpp"
#include "skipstop/heuristic.hpp"

namespace skipstop {

struct LowerBoundSettings {
    double headway_step_h = 0.1 / 60.0;
    std::vector<int> line_candidates{1, 2, 3, 4};
    double min_spacing_km = 1e-3;
    double max_spacing_km = 5.0;
    double golden_tol_km = 1e-6;
    // Local search around the best grid node for each line pair.
    bool refine = true;

    void validate() const;
};

/// Terms of the relaxed cost at one grid cell for fixed scalars:
/// f(s) = access * s + fixed_over_s / s + constant, and the bay branch
/// f(s) + beta(s) = access * s + bay_over_s / s + bay_constant.
struct LbPointCoeffs {
    double access = 0.0;
    double fixed_over_s = 0.0;
    double constant = 0.0;
    double bay_over_s = 0.0;
    double bay_constant = 0.0;

    double f(double s) const { return access * s + fixed_over_s / s + constant; }
    double beta(double s) const { return (bay_over_s - fixed_over_s) / s + bay_constant - constant; }
};

LbPointCoeffs lb_point_coeffs(const PointDemand& demand, const DesignScalars& scalars, const ParamSet& params);

/// Scalar-only part of the relaxed cost.
double lb_theta(const DemandField& field, const DesignScalars& scalars, const ParamSet& params);

struct InnerMin {
    double value = 0.0;
    bool single_stop_bays = false;  // true when the T = 1 branch wins
    double spacing_free = 0.0;      // argmin of f
    double spacing_bay = 0.0;       // argmin of f + beta
};

/// Closed-form minimum of a*s + c/s over the spacing box.
InnerMin lb_inner_minimize(const LbPointCoeffs& k, double s_lo, double s_hi);
/// Golden-section search of the same two branches.
InnerMin lb_inner_minimize_golden(const LbPointCoeffs& k, double s_lo, double s_hi, double tol);

/// Relaxed cost for fixed scalars, inner minimum in closed form.
double lb_objective(const DemandField& field, const DesignScalars& scalars, const ParamSet& params,
                    const LowerBoundSettings& settings);

struct LowerBoundResult {
    bool feasible = false;
    double value = 0.0;       // bound after local refinement
    double grid_value = 0.0;  // best value on the 0.1-minute grid
    DesignScalars scalars;
    std::vector<InnerMin> points;
    bool symmetric_demand = false;
};

LowerBoundResult lb_solve(const DemandField& field, const ParamSet& params, const LowerBoundSettings& settings);

namespace reference {
/// Serial exhaustive search with golden-section inner minimisation.
LowerBoundResult lb_solve(const DemandField& field, const ParamSet& params, const LowerBoundSettings& settings);
} // namespace reference

/// Backtracking cost that the relaxation drops, evaluated at a design.
/// Non-negative for symmetric demand.
double removed_term(const DemandField& field, const Solution& solution, const ParamSet& params);

/// (heuristic - bound) / bound.
double optimality_gap(double heuristic_cost, double bound);

} // namespace skipstop
