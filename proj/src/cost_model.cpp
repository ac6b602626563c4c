#include "skipstop/cost_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace skipstop {

double headway_floor(int lines, const ParamSet& params) {
    return params.min_headway_h + (lines > 1 ? params.dwell_h : 0.0);
}

DesignProfiles DesignProfiles::uniform(int n, double spacing, int bay_size) {
    return {std::vector<double>(n, spacing), std::vector<int>(n, bay_size)};
}

void DesignProfiles::validate(int n, int max_bay_size) const {
    if (static_cast<int>(spacing.size()) != n || static_cast<int>(bay_size.size()) != n)
        throw std::invalid_argument("profiles must have one value per grid cell");
    for (int j = 0; j < n; ++j) {
        if (!(spacing[j] > 0.0) || !std::isfinite(spacing[j]))
            throw std::invalid_argument("stop spacing must be positive at cell " + std::to_string(j));
        if (bay_size[j] < 1 || bay_size[j] > max_bay_size)
            throw std::invalid_argument("bay size out of range at cell " + std::to_string(j));
    }
}

double pace(double spacing, int bay_size, int lines, const ParamSet& params) {
    const double t = bay_size;
    const double visited_per_km = ((t - 1.0) / lines + 1.0) / (t * spacing);
    return 1.0 / params.cruise_speed + params.dwell_h * visited_per_km;
}

double access_cost(const DemandField& field, std::span<const double> spacing, const ParamSet& params) {
    double sum = 0.0;
    for (int j = 0; j < field.size(); ++j) sum += spacing[j] / (4.0 * params.walk_speed) * field.trip_ends(j);
    return sum * field.step();
}

double wait_cost(const DemandField& field, const DesignScalars& sc, std::span<const int> bay_size,
                 const BacktrackDensities& bt, const ParamSet& params) {
    const double m_cw = sc.lines_cw, m_ccw = sc.lines_ccw;
    const double h_cw = sc.headway_cw, h_ccw = sc.headway_ccw;
    const auto& p_cw = field.origins(Direction::cw);
    const auto& q_cw = field.destinations(Direction::cw);
    const auto& p_ccw = field.origins(Direction::ccw);
    const auto& q_ccw = field.destinations(Direction::ccw);
    double integral = 0.0;
    for (int j = 0; j < field.size(); ++j) {
        const double t = bay_size[j];
        integral += -(m_cw - 1.0) * h_cw * (p_cw[j] + q_cw[j]) / (2.0 * t)
                    - (m_ccw - 1.0) * h_ccw * (p_ccw[j] + q_ccw[j]) / (2.0 * t)
                    + params.backtrack_weight * 0.5 * (m_ccw * h_ccw - m_cw * h_cw) * (bt.cw[j] - bt.ccw[j]);
    }
    return 0.5 * (2.0 * m_cw - 1.0) * h_cw * field.total(Direction::cw)
           + 0.5 * (2.0 * m_ccw - 1.0) * h_ccw * field.total(Direction::ccw) + integral * field.step();
}

TripTypeWaits trip_type_waits(const DesignScalars& sc) {
    const double line_cw = sc.lines_cw * sc.headway_cw;
    const double line_ccw = sc.lines_ccw * sc.headway_ccw;
    TripTypeWaits w;
    w.cw = {sc.headway_cw / 2.0, line_cw / 2.0, line_cw / 2.0, (line_cw + line_ccw) / 2.0, line_cw};
    w.ccw = {sc.headway_ccw / 2.0, line_ccw / 2.0, line_ccw / 2.0, (line_cw + line_ccw) / 2.0, line_ccw};
    return w;
}

namespace {

// Extra ride time per backtracking trip (h).
double backtrack_ride(double spacing, int bay_size, const DesignScalars& sc, const ParamSet& params) {
    const double t = bay_size;
    return t * spacing / (3.0 * params.cruise_speed)
           + params.dwell_h / 6.0 * ((t - 1.0) / sc.lines_cw + (t - 1.0) / sc.lines_ccw + 2.0);
}

// Share of trip ends at a point not paired with a transfer-stop partner,
// from the single-integral transfer approximation.
double transfer_weight(int bay_size) {
    const double t = bay_size;
    return (2.0 * t - 1.0) / (2.0 * t * t);
}

} // namespace

double invehicle_cost(const DemandField& field, const DesignScalars& sc, const DesignProfiles& pr,
                      const BacktrackDensities& bt, const ParamSet& params) {
    const auto& c_cw = field.flow(Direction::cw);
    const auto& c_ccw = field.flow(Direction::ccw);
    double sum = 0.0;
    for (int j = 0; j < field.size(); ++j) {
        const double s = pr.spacing[j];
        const int t = pr.bay_size[j];
        sum += c_cw[j] * pace(s, t, sc.lines_cw, params) + c_ccw[j] * pace(s, t, sc.lines_ccw, params)
               + params.backtrack_weight * (bt.cw[j] + bt.ccw[j]) * backtrack_ride(s, t, sc, params);
    }
    return sum * field.step();
}

double transfer_penalty(const DemandField& field, const DesignScalars& sc, std::span<const int> bay_size,
                        const ParamSet& params) {
    const double f_cw = (sc.lines_cw - 1.0) / sc.lines_cw;
    const double f_ccw = (sc.lines_ccw - 1.0) / sc.lines_ccw;
    if (f_cw == 0.0 && f_ccw == 0.0) return 0.0;
    const auto& p_cw = field.origins(Direction::cw);
    const auto& q_cw = field.destinations(Direction::cw);
    const auto& p_ccw = field.origins(Direction::ccw);
    const auto& q_ccw = field.destinations(Direction::ccw);
    double integral = 0.0;
    for (int j = 0; j < field.size(); ++j)
        integral += (f_cw * (p_cw[j] + q_cw[j]) + f_ccw * (p_ccw[j] + q_ccw[j])) * transfer_weight(bay_size[j]);
    const double head = f_cw * field.total(Direction::cw) + f_ccw * field.total(Direction::ccw);
    const double value = params.transfer_penalty_h * (head - integral * field.step());
    if (value < 0.0) {
        const double scale = params.transfer_penalty_h * head;
        if (-value > 1e-9 * scale)
            throw std::logic_error("transfer penalty is materially negative: " + std::to_string(value));
        if (-value > 1e-12 * scale) spdlog::warn("transfer penalty {:.3e} clamped to zero", value);
        return 0.0;
    }
    return value;
}

AgencyCosts agency_costs(const DesignScalars& sc, const DesignProfiles& pr, const ParamSet& params,
                         const Corridor& corridor) {
    const double mu = params.value_of_time;
    const double L = corridor.length();
    AgencyCosts a;
    a.vehicle_km = params.cost_vehicle_km * L / mu * (1.0 / sc.headway_cw + 1.0 / sc.headway_ccw);
    double hours = 0.0, stops = 0.0;
    for (int j = 0; j < corridor.size(); ++j) {
        hours += pace(pr.spacing[j], pr.bay_size[j], sc.lines_cw, params) / sc.headway_cw
                 + pace(pr.spacing[j], pr.bay_size[j], sc.lines_ccw, params) / sc.headway_ccw;
        stops += 1.0 / pr.spacing[j];
    }
    a.vehicle_hours = params.cost_vehicle_hour / mu * hours * corridor.step();
    a.line_infra = 2.0 * params.cost_line_km * L / mu;
    a.stop_infra = params.cost_stop / mu * stops * corridor.step();
    return a;
}

CostBreakdown generalized_cost(const DemandField& field, const DesignScalars& scalars,
                               const DesignProfiles& profiles, const ParamSet& params) {
    const auto bt =
        backtrack_densities(field, profiles.spacing, profiles.bay_size, scalars.lines_cw, scalars.lines_ccw);
    return generalized_cost(field, scalars, profiles, bt, params);
}

CostBreakdown generalized_cost(const DemandField& field, const DesignScalars& scalars,
                               const DesignProfiles& profiles, const BacktrackDensities& bt,
                               const ParamSet& params) {
    CostBreakdown c;
    c.access = access_cost(field, profiles.spacing, params);
    c.wait = wait_cost(field, scalars, profiles.bay_size, bt, params);
    c.in_vehicle = invehicle_cost(field, scalars, profiles, bt, params);
    c.transfer = transfer_penalty(field, scalars, profiles.bay_size, params);
    const auto a = agency_costs(scalars, profiles, params, field.corridor());
    c.vehicle_km = a.vehicle_km;
    c.vehicle_hours = a.vehicle_hours;
    c.line_infra = a.line_infra;
    c.stop_infra = a.stop_infra;
    c.sum();
    return c;
}

PointDemand PointDemand::at(const DemandField& f, int j) {
    return {f.origins(Direction::cw)[j],      f.destinations(Direction::cw)[j],
            f.origins(Direction::ccw)[j],     f.destinations(Direction::ccw)[j],
            f.flow(Direction::cw)[j],         f.flow(Direction::ccw)[j]};
}

double scalar_cost(const DemandField& field, const DesignScalars& sc, const ParamSet& params) {
    const double m_cw = sc.lines_cw, m_ccw = sc.lines_ccw;
    const double L = field.corridor().length();
    const double mu = params.value_of_time;
    const double lam_cw = field.total(Direction::cw), lam_ccw = field.total(Direction::ccw);
    return 0.5 * (2.0 * m_cw - 1.0) * sc.headway_cw * lam_cw + 0.5 * (2.0 * m_ccw - 1.0) * sc.headway_ccw * lam_ccw
           + params.transfer_penalty_h * ((m_cw - 1.0) / m_cw * lam_cw + (m_ccw - 1.0) / m_ccw * lam_ccw)
           + params.cost_vehicle_km * L / mu * (1.0 / sc.headway_cw + 1.0 / sc.headway_ccw)
           + 2.0 * params.cost_line_km * L / mu;
}

double pointwise_cost(const DesignScalars& sc, double s, int bay_size, const PointDemand& d,
                      const PointBacktrack& b, const ParamSet& params) {
    const double m_cw = sc.lines_cw, m_ccw = sc.lines_ccw;
    const double h_cw = sc.headway_cw, h_ccw = sc.headway_ccw;
    const double t = bay_size;
    const double mu = params.value_of_time;
    const double wb = params.backtrack_weight;
    const double pace_cw = pace(s, bay_size, sc.lines_cw, params);
    const double pace_ccw = pace(s, bay_size, sc.lines_ccw, params);

    const double access = s / (4.0 * params.walk_speed) * d.trip_ends();
    const double wait = -(m_cw - 1.0) * h_cw * (d.p_cw + d.q_cw) / (2.0 * t)
                        - (m_ccw - 1.0) * h_ccw * (d.p_ccw + d.q_ccw) / (2.0 * t)
                        + wb * 0.5 * (m_ccw * h_ccw - m_cw * h_cw) * (b.cw - b.ccw);
    const double ride = d.c_cw * pace_cw + d.c_ccw * pace_ccw + wb * (b.cw + b.ccw) * backtrack_ride(s, bay_size, sc, params);
    const double transfer = -params.transfer_penalty_h
                            * ((m_cw - 1.0) / m_cw * (d.p_cw + d.q_cw) + (m_ccw - 1.0) / m_ccw * (d.p_ccw + d.q_ccw))
                            * transfer_weight(bay_size);
    const double hours = params.cost_vehicle_hour / mu * (pace_cw / h_cw + pace_ccw / h_ccw);
    const double stops = params.cost_stop / mu / s;
    return access + wait + ride + transfer + hours + stops;
}

double split_cost(const DemandField& field, const DesignScalars& scalars, const DesignProfiles& profiles,
                  const BacktrackDensities& bt, const ParamSet& params) {
    double sum = 0.0;
    for (int j = 0; j < field.size(); ++j)
        sum += pointwise_cost(scalars, profiles.spacing[j], profiles.bay_size[j], PointDemand::at(field, j),
                              {bt.cw[j], bt.ccw[j]}, params);
    return scalar_cost(field, scalars, params) + sum * field.step();
}

} // namespace skipstop
