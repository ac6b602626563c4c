#pragma once

#include <vector>

#include "skipstop/cost_model.hpp"
#include "skipstop/spline.hpp"

namespace skipstop {

/// Cumulative integrals of 1/s(x) and T(x) on a fine sub-grid of [0, L].
class ProfileIntegrals {
public:
    ProfileIntegrals(const ProfileFit& fit, int substeps_per_cell = 50);

    /// Integral of 1/s from 0 to x.
    double stops_to(double x) const { return lookup(inv_spacing_, x); }
    /// Integral of T from 0 to x.
    double bays_to(double x) const { return lookup(bay_, x); }
    double stop_count() const { return inv_spacing_.back(); }
    double step() const { return h_; }
    const std::vector<double>& cumulative_inverse_spacing() const { return inv_spacing_; }

private:
    double lookup(const std::vector<double>& c, double x) const;

    double length_ = 0.0;
    double h_ = 0.0;
    std::vector<double> inv_spacing_;
    std::vector<double> bay_;
};

struct StopPlan {
    double length = 0.0;
    int lines_cw = 1;
    int lines_ccw = 1;
    std::vector<double> stops;      // km, ascending, first at 0
    std::vector<int> transfers;     // indices into stops, first is 0
    std::vector<bool> is_transfer;
    std::vector<int> line_cw;       // -1 at transfer stops
    std::vector<int> line_ccw;

    int stop_count() const { return static_cast<int>(stops.size()); }
    int transfer_count() const { return static_cast<int>(transfers.size()); }
    /// Stops in bay k, counting the transfer stop that opens it.
    int bay_stops(int k) const;
    /// Index of the bay holding stop i.
    int bay_of(int i) const;
    /// Throws std::logic_error if an ordering or bay-size invariant fails.
    void validate() const;
};

/// Stop positions where the integral of 1/s crosses an integer, with the
/// last one dropped if it crowds the origin.
std::vector<double> place_stops(const ProfileFit& fit, const ProfileIntegrals& integrals);

/// Transfer-stop indices by the greedy bay-matching recursion.
std::vector<int> select_transfer_stops(const std::vector<double>& stops, const ProfileIntegrals& integrals,
                                       double length, int lines_cw, int lines_ccw);

/// Cyclic line assignment of non-transfer stops inside each bay.
StopPlan assign_lines(std::vector<double> stops, std::vector<int> transfers, double length, int lines_cw,
                      int lines_ccw);

StopPlan generate_stop_plan(const Corridor& corridor, const DesignProfiles& profiles, int lines_cw, int lines_ccw);

/// Spacing and bay size implied by a plan at every grid cell centre.
DesignProfiles plan_to_profiles(const StopPlan& plan, const Corridor& corridor);

struct ProfileComparisonRow {
    double x = 0.0;
    double spacing_grid = 0.0;
    double spacing_fit = 0.0;
    double spacing_realized = 0.0;
    int bay_grid = 1;
    double bay_fit = 1.0;
    int bay_realized = 1;
};

std::vector<ProfileComparisonRow> compare_profiles(const Corridor& corridor, const DesignProfiles& profiles,
                                                   const StopPlan& plan);

} // namespace skipstop
