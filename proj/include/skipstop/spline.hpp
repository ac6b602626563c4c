#pragma once

#include <memory>
#include <span>
#include <vector>

#include "skipstop/corridor.hpp"

namespace skipstop {

/// Periodic cubic interpolant through values at the cell centres of a loop
/// grid. Spans where the cubic dips to or below `floor` are replaced by the
/// chord between their two knots.
class PeriodicSpline {
public:
    PeriodicSpline(const Corridor& corridor, std::span<const double> values, double floor);
    ~PeriodicSpline();
    PeriodicSpline(PeriodicSpline&&) noexcept;
    PeriodicSpline& operator=(PeriodicSpline&&) noexcept;

    double operator()(double x) const;
    int linear_spans() const { return linear_count_; }
    bool is_linear_span(int i) const { return linear_[i]; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<bool> linear_;
    int linear_count_ = 0;
};

/// Continuous stop spacing and bay size along the loop.
class ProfileFit {
public:
    ProfileFit(const Corridor& corridor, std::span<const double> spacing, std::span<const int> bay_size);

    double spacing(double x) const { return spacing_(x); }
    /// Fitted bay size, never below one stop.
    double bay_size(double x) const;
    const Corridor& corridor() const { return corridor_; }
    int linear_spans() const { return spacing_.linear_spans(); }

private:
    Corridor corridor_;
    PeriodicSpline spacing_;
    PeriodicSpline bay_;
};

} // namespace skipstop
