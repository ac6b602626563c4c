#include "skipstop/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace skipstop {

Corridor::Corridor(double length_km, int grid_count)
    : length_(length_km), n_(grid_count), step_(length_km / grid_count) {
    if (!(length_km > 0.0) || !std::isfinite(length_km))
        throw std::invalid_argument("corridor length must be positive, got " + std::to_string(length_km));
    if (grid_count < 4)
        throw std::invalid_argument("corridor needs at least 4 grid cells, got " + std::to_string(grid_count));
    // Even n keeps the antipodal cell exactly on the half-loop boundary.
    if (grid_count % 2 != 0)
        throw std::invalid_argument("corridor grid count must be even, got " + std::to_string(grid_count));
}

double Corridor::wrap(double x) const {
    double r = std::fmod(x, length_);
    if (r < 0.0) r += length_;
    if (r >= length_) r = 0.0;
    return r;
}

double circular_trip_length(double x, double y, double length) {
    const double d = std::fabs(x - y);
    return std::min(d, length - d);
}

} // namespace skipstop
