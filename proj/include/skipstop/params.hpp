#pragma once

#include <string>
#include <vector>

namespace skipstop {

enum class Mode { bus, rail };

const char* to_string(Mode m);
Mode parse_mode(const std::string& text);

/// Operating and cost parameters. Times are in hours, speeds in km/h and
/// money in $; agency costs are converted to hours by dividing by the value
/// of time.
struct ParamSet {
    double dwell_h = 30.0 / 3600.0;       // lost time per stop visited
    double cruise_speed = 25.0;           // km/h
    double walk_speed = 2.0;              // km/h
    double capacity = 80.0;               // patrons per vehicle
    double min_headway_h = 1.0 / 60.0;
    double cost_vehicle_km = 0.59;        // $/veh-km
    double cost_vehicle_hour = 62.66;     // $/veh-h
    double cost_line_km = 10.0;           // $/km/h
    double cost_stop = 0.7;               // $/stop/h
    double value_of_time = 20.0;          // $/h
    double transfer_penalty_h = 1.0 / 60.0;
    double backtrack_weight = 1.0;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;

    /// Bus or rail operating parameters with the value-of-time dependent cost
    /// rows evaluated at `value_of_time`.
    static ParamSet preset(Mode mode, double value_of_time);
};

} // namespace skipstop
