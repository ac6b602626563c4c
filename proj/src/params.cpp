#include "skipstop/params.hpp"

#include <cmath>
#include <stdexcept>

namespace skipstop {

const char* to_string(Mode m) { return m == Mode::bus ? "bus" : "rail"; }

Mode parse_mode(const std::string& text) {
    if (text == "bus") return Mode::bus;
    if (text == "rail") return Mode::rail;
    throw std::invalid_argument("unknown mode '" + text + "' (expected bus or rail)");
}

void ParamSet::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(dwell_h, "dwell time");
    positive(cruise_speed, "cruise speed");
    positive(walk_speed, "walk speed");
    positive(capacity, "vehicle capacity");
    positive(min_headway_h, "minimum headway");
    positive(cost_vehicle_km, "vehicle-km cost");
    positive(cost_vehicle_hour, "vehicle-hour cost");
    positive(cost_line_km, "line infrastructure cost");
    positive(cost_stop, "stop cost");
    positive(value_of_time, "value of time");
    if (!(transfer_penalty_h >= 0.0)) throw std::invalid_argument("transfer penalty must be non-negative");
    if (!(backtrack_weight >= 1.0)) throw std::invalid_argument("backtracking weight must be at least 1");
}

ParamSet ParamSet::preset(Mode mode, double mu) {
    ParamSet p;
    p.value_of_time = mu;
    if (mode == Mode::bus) {
        p.cost_vehicle_km = 0.59;
        p.cost_vehicle_hour = 2.66 + 3.0 * mu;
        p.cost_line_km = 6.0 + 0.2 * mu;
        p.cost_stop = 0.42 + 0.014 * mu;
        p.dwell_h = 30.0 / 3600.0;
        p.cruise_speed = 25.0;
        p.capacity = 80.0;
        p.min_headway_h = 1.0 / 60.0;
    } else {
        p.cost_vehicle_km = 2.20;
        p.cost_vehicle_hour = 101.0 + 5.0 * mu;
        p.cost_line_km = 594.0 + 19.8 * mu;
        p.cost_stop = 294.0 + 9.8 * mu;
        p.dwell_h = 45.0 / 3600.0;
        p.cruise_speed = 60.0;
        p.capacity = 3000.0;
        p.min_headway_h = 1.5 / 60.0;
    }
    p.walk_speed = 2.0;
    p.transfer_penalty_h = 1.0 / 60.0;
    p.backtrack_weight = 1.0;
    return p;
}

} // namespace skipstop
