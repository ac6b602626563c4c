#pragma once

#include <cstddef>

namespace skipstop {

/// Closed-loop corridor discretised into n equal cells. Cell j (0-based) is
/// centred at (j + 0.5) * step. All positional arithmetic wraps with period L.
class Corridor {
public:
    Corridor(double length_km, int grid_count);

    double length() const { return length_; }
    int size() const { return n_; }
    double step() const { return step_; }
    double point(int j) const { return (j + 0.5) * step_; }

    /// Maps any integer index onto [0, n).
    int wrap_index(long long j) const {
        long long r = j % n_;
        return static_cast<int>(r < 0 ? r + n_ : r);
    }
    /// Maps any position onto [0, L).
    double wrap(double x) const;

    /// Forward (CW) distance from a to b, in [0, L).
    double forward_distance(double a, double b) const { return wrap(b - a); }

private:
    double length_;
    int n_;
    double step_;
};

/// Shorter of the two arcs between x and y on a loop of length L.
double circular_trip_length(double x, double y, double length);

} // namespace skipstop
