#include "skipstop/exact_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace skipstop {

namespace {

struct Catchment {
    std::vector<std::vector<std::pair<int, double>>> cells;  // per cell: (stop, share of the cell)
};

// Each stop serves the arc between the midpoints to its neighbours.
Catchment catchments(const Corridor& corridor, const StopPlan& plan) {
    const int n_stops = plan.stop_count();
    const double L = plan.length;
    const double dx = corridor.step();
    Catchment c;
    c.cells.resize(corridor.size());
    auto add_piece = [&](int stop, double lo, double hi) {
        if (!(hi > lo)) return;
        const int first = std::max(0, static_cast<int>(std::floor(lo / dx)));
        const int last = std::min(corridor.size() - 1, static_cast<int>(std::ceil(hi / dx)));
        for (int a = first; a <= last; ++a) {
            const double overlap = std::min(hi, (a + 1) * dx) - std::max(lo, a * dx);
            if (overlap > 0.0) c.cells[a].emplace_back(stop, overlap / dx);
        }
    };
    for (int i = 0; i < n_stops; ++i) {
        const double here = plan.stops[i];
        const double prev = i > 0 ? plan.stops[i - 1] : plan.stops[n_stops - 1] - L;
        const double next = i + 1 < n_stops ? plan.stops[i + 1] : plan.stops[0] + L;
        double lo = 0.5 * (prev + here), hi = 0.5 * (here + next);
        if (n_stops == 1) lo = here - 0.5 * L, hi = here + 0.5 * L;
        if (lo < 0.0) {
            add_piece(i, lo + L, L);
            add_piece(i, 0.0, hi);
        } else if (hi > L) {
            add_piece(i, lo, L);
            add_piece(i, 0.0, hi - L);
        } else {
            add_piece(i, lo, hi);
        }
    }
    return c;
}

double nearest_stop_distance(const StopPlan& plan, double z) {
    auto it = std::upper_bound(plan.stops.begin(), plan.stops.end(), z);
    const double after = it == plan.stops.end() ? plan.stops.front() + plan.length : *it;
    const double before = *(it - 1);
    return std::min(z - before, after - z);
}

// Which stops each line serves and prefix counts along the stop order.
class LineIndex {
public:
    explicit LineIndex(const StopPlan& plan) : plan_(plan) {
        const int n = plan.stop_count();
        build(prefix_cw_, plan.line_cw, plan.lines_cw, n);
        build(prefix_ccw_, plan.line_ccw, plan.lines_ccw, n);
    }

    /// Stops strictly between a and b, travelling in dir, that `line` serves.
    int served_between(Direction dir, int line, int a, int b) const {
        const auto& pre = (dir == Direction::cw ? prefix_cw_ : prefix_ccw_)[line];
        if (dir == Direction::ccw) std::swap(a, b);
        const int n = plan_.stop_count();
        if (a < b) return pre[b] - pre[a + 1];
        return (pre[n] - pre[a + 1]) + pre[b];
    }

    int line(Direction dir, int i) const { return dir == Direction::cw ? plan_.line_cw[i] : plan_.line_ccw[i]; }

private:
    static void build(std::vector<std::vector<int>>& pre, const std::vector<int>& line_of, int lines, int n) {
        pre.assign(lines, std::vector<int>(n + 1, 0));
        for (int l = 0; l < lines; ++l)
            for (int k = 0; k < n; ++k) pre[l][k + 1] = pre[l][k] + (line_of[k] < 0 || line_of[k] == l ? 1 : 0);
    }

    const StopPlan& plan_;
    std::vector<std::vector<int>> prefix_cw_, prefix_ccw_;
};

double forward(const StopPlan& plan, int a, int b) {
    double d = plan.stops[b] - plan.stops[a];
    if (d < 0.0) d += plan.length;
    return d;
}

Direction opposite(Direction d) { return d == Direction::cw ? Direction::ccw : Direction::cw; }

// Travel distance from a to b in direction dir.
double along(const StopPlan& plan, Direction dir, int a, int b) {
    return dir == Direction::cw ? forward(plan, a, b) : forward(plan, b, a);
}

struct Leg {
    Direction dir;
    int from, to;
};

struct Route {
    TripClass trip;
    std::array<Leg, 2> legs{};
    int leg_count = 1;
};

Route route_trip(int i, int j, const StopPlan& plan, const LineIndex& index, const ParamSet& params,
                 const ExactSettings& settings) {
    Route r;
    TripClass& t = r.trip;
    const double fwd = forward(plan, i, j);
    t.direction = fwd <= 0.5 * plan.length ? Direction::cw : Direction::ccw;
    const Direction dir = t.direction;
    const int lines = dir == Direction::cw ? plan.lines_cw : plan.lines_ccw;
    t.distance = along(plan, dir, i, j);
    r.legs[0] = {dir, i, j};

    const bool ti = plan.is_transfer[i], tj = plan.is_transfer[j];
    if (ti && tj) {
        t.type = 1;
        double sum = 0.0;
        for (int l = 0; l < lines; ++l) sum += index.served_between(dir, l, i, j) + 1;
        t.visited = sum / lines;
        return r;
    }
    if (ti || tj) {
        t.type = 2;
        t.visited = index.served_between(dir, index.line(dir, ti ? j : i), i, j) + 1;
        return r;
    }
    const int li = index.line(dir, i), lj = index.line(dir, j);
    if (li == lj) {
        t.type = 3;
        t.visited = index.served_between(dir, li, i, j) + 1;
        return r;
    }

    const int k = plan.bay_of(i);
    const int upstream = plan.transfers[k];
    const int downstream = k + 1 < plan.transfer_count() ? plan.transfers[k + 1] : plan.transfers[0];
    // Transfer stop reached first when leaving i in dir, and the one behind.
    const int ahead = dir == Direction::cw ? downstream : upstream;
    const int behind = dir == Direction::cw ? upstream : downstream;
    const bool same_bay = plan.bay_of(j) == k && (dir == Direction::cw ? j > i : j < i);
    const Direction back = opposite(dir);

    if (same_bay) {
        t.type = 4;
        // Option 1: overshoot to the bay end ahead, come back on the opposite direction.
        const double d1 = along(plan, dir, i, ahead) + along(plan, back, ahead, j);
        const double n1 = index.served_between(dir, li, i, ahead) + 1
                          + index.served_between(back, index.line(back, j), ahead, j) + 1;
        // Option 2: go back to the bay end behind, then ride forward to j.
        const double d2 = along(plan, back, i, behind) + along(plan, dir, behind, j);
        const double n2 = index.served_between(back, index.line(back, i), i, behind) + 1
                          + index.served_between(dir, lj, behind, j) + 1;
        bool first;
        if (settings.backtrack_route == BacktrackRoute::cheaper_option)
            first = params.dwell_h * n1 + d1 / params.cruise_speed <= params.dwell_h * n2 + d2 / params.cruise_speed;
        else
            first = d1 <= d2;
        if (first) {
            t.distance = d1;
            t.visited = n1;
            t.transfer_stop = ahead;
            r.legs = {Leg{dir, i, ahead}, Leg{back, ahead, j}};
        } else {
            t.distance = d2;
            t.visited = n2;
            t.transfer_stop = behind;
            r.legs = {Leg{back, i, behind}, Leg{dir, behind, j}};
        }
        r.leg_count = 2;
        return r;
    }

    t.type = 5;
    t.transfer_stop = ahead;
    t.visited = index.served_between(dir, li, i, ahead) + 1 + index.served_between(dir, lj, ahead, j) + 1;
    r.legs = {Leg{dir, i, ahead}, Leg{dir, ahead, j}};
    r.leg_count = 2;
    return r;
}

// Adds flow to the segments covered by a leg; segment k joins stop k and k + 1.
void add_leg(std::vector<double>& cw, std::vector<double>& ccw, const Leg& leg, double flow) {
    const int n = static_cast<int>(cw.size());
    auto& load = leg.dir == Direction::cw ? cw : ccw;
    int a = leg.dir == Direction::cw ? leg.from : leg.to;
    const int b = leg.dir == Direction::cw ? leg.to : leg.from;
    while (a != b) {
        load[a] += flow;
        a = (a + 1) % n;
    }
}

double wait_time(int type, Direction dir, const DesignScalars& sc) {
    const double h = sc.headway(dir);
    const double line_h = sc.lines(dir) * h;
    switch (type) {
    case 1: return 0.5 * h;
    case 2:
    case 3: return 0.5 * line_h;
    case 4: return 0.5 * (sc.lines_cw * sc.headway_cw + sc.lines_ccw * sc.headway_ccw);
    default: return line_h;
    }
}

} // namespace

std::vector<double> aggregate_od_demand(const DemandField& field, const StopPlan& plan) {
    const int n = field.size();
    const int n_stops = plan.stop_count();
    const auto c = catchments(field.corridor(), plan);
    const double area = field.step() * field.step();
    std::vector<double> od(static_cast<std::size_t>(n_stops) * n_stops, 0.0);
    // Rows are built per origin cell then folded in cell order.
    for (int a = 0; a < n; ++a) {
        std::vector<double> row(n_stops, 0.0);
        for (int b = 0; b < n; ++b) {
            const double mass = field.lambda(a, b) * area;
            if (mass == 0.0) continue;
            for (const auto& [j, fb] : c.cells[b]) row[j] += mass * fb;
        }
        for (const auto& [i, fa] : c.cells[a])
            for (int j = 0; j < n_stops; ++j) od[static_cast<std::size_t>(i) * n_stops + j] += fa * row[j];
    }
    return od;
}

TripClass classify_trip(int i, int j, const StopPlan& plan, const ParamSet& params, const ExactSettings& settings) {
    if (i == j) throw std::invalid_argument("trip needs distinct stops");
    const LineIndex index(plan);
    return route_trip(i, j, plan, index, params, settings).trip;
}

ExactResult exact_costs(const DemandField& field, const StopPlan& plan, const DesignScalars& sc,
                        const ParamSet& params, const ExactSettings& settings) {
    plan.validate();
    const int n_stops = plan.stop_count();
    const auto od = aggregate_od_demand(field, plan);
    const LineIndex index(plan);

    struct RowTotals {
        double wait = 0.0, ride = 0.0, transfer = 0.0, same = 0.0, total = 0.0;
        std::array<double, 5> cw{}, ccw{};
        std::vector<double> load_cw, load_ccw;
    };
    std::vector<RowTotals> rows(n_stops);
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < n_stops; ++i) {
        RowTotals& r = rows[i];
        r.load_cw.assign(n_stops, 0.0);
        r.load_ccw.assign(n_stops, 0.0);
        for (int j = 0; j < n_stops; ++j) {
            const double flow = od[static_cast<std::size_t>(i) * n_stops + j];
            if (flow == 0.0) continue;
            r.total += flow;
            if (i == j) {
                r.same += flow;
                continue;
            }
            const Route route = route_trip(i, j, plan, index, params, settings);
            const TripClass& t = route.trip;
            r.wait += flow * wait_time(t.type, t.direction, sc);
            r.ride += flow * (params.dwell_h * t.visited + t.distance / params.cruise_speed);
            if (t.type >= 4) r.transfer += flow * params.transfer_penalty_h;
            (t.direction == Direction::cw ? r.cw : r.ccw)[t.type - 1] += flow;
            for (int l = 0; l < route.leg_count; ++l) add_leg(r.load_cw, r.load_ccw, route.legs[l], flow);
        }
    }

    ExactResult out;
    std::vector<double> load_cw(n_stops, 0.0), load_ccw(n_stops, 0.0);
    for (const auto& r : rows) {
        out.cost.wait += r.wait;
        out.cost.in_vehicle += r.ride;
        out.cost.transfer += r.transfer;
        out.same_stop_demand += r.same;
        out.demand_total += r.total;
        for (int k = 0; k < 5; ++k) {
            out.trips_cw[k] += r.cw[k];
            out.trips_ccw[k] += r.ccw[k];
        }
        for (int s = 0; s < n_stops; ++s) {
            load_cw[s] += r.load_cw[s];
            load_ccw[s] += r.load_ccw[s];
        }
    }
    for (int s = 0; s < n_stops; ++s)
        out.max_load_ratio = std::max({out.max_load_ratio, load_cw[s] * sc.headway_cw / params.capacity,
                                       load_ccw[s] * sc.headway_ccw / params.capacity});
    out.capacity_ok = out.max_load_ratio <= 1.0 + 1e-9;

    const int sub = settings.substeps_per_cell;
    const double h = field.step() / sub;
    double access = 0.0;
    for (int a = 0; a < field.size(); ++a) {
        double g = 0.0;
        for (int k = 0; k < sub; ++k) g += nearest_stop_distance(plan, a * field.step() + (k + 0.5) * h);
        access += field.trip_ends(a) * g * h;
    }
    out.cost.access = access / params.walk_speed;

    const double mu = params.value_of_time;
    const double L = plan.length;
    const int n_transfer = plan.transfer_count();
    auto stops_per_loop = [&](int lines) {
        return n_transfer + static_cast<double>(n_stops - n_transfer) / lines;
    };
    out.cost.vehicle_km = params.cost_vehicle_km * L / mu * (1.0 / sc.headway_cw + 1.0 / sc.headway_ccw);
    out.cost.vehicle_hours =
        params.cost_vehicle_hour / mu
        * ((params.dwell_h * stops_per_loop(sc.lines_cw) + L / params.cruise_speed) / sc.headway_cw
           + (params.dwell_h * stops_per_loop(sc.lines_ccw) + L / params.cruise_speed) / sc.headway_ccw);
    out.cost.line_infra = 2.0 * params.cost_line_km * L / mu;
    out.cost.stop_infra = params.cost_stop * n_stops / mu;
    out.cost.sum();
    return out;
}

std::vector<OdAccount> od_accounts(const DemandField& field, const StopPlan& plan, const DesignScalars& sc,
                                   const ParamSet& params, const ExactSettings& settings) {
    const int n_stops = plan.stop_count();
    const auto od = aggregate_od_demand(field, plan);
    const LineIndex index(plan);
    std::vector<OdAccount> out;
    for (int i = 0; i < n_stops; ++i) {
        for (int j = 0; j < n_stops; ++j) {
            const double flow = od[static_cast<std::size_t>(i) * n_stops + j];
            if (i == j || flow == 0.0) continue;
            OdAccount a;
            a.origin = i;
            a.destination = j;
            a.demand = flow;
            a.trip = route_trip(i, j, plan, index, params, settings).trip;
            a.wait = wait_time(a.trip.type, a.trip.direction, sc);
            a.ride = params.dwell_h * a.trip.visited + a.trip.distance / params.cruise_speed;
            a.transfer = a.trip.type >= 4 ? params.transfer_penalty_h : 0.0;
            out.push_back(a);
        }
    }
    return out;
}

std::vector<ErrorRow> error_report(const CostBreakdown& exact, const CostBreakdown& approx) {
    const std::pair<const char*, std::pair<double, double>> items[] = {
        {"GC", {approx.total, exact.total}},
        {"user_total", {approx.user(), exact.user()}},
        {"agency_total", {approx.agency(), exact.agency()}},
        {"UT_a", {approx.access, exact.access}},
        {"UT_w", {approx.wait, exact.wait}},
        {"UT_v", {approx.in_vehicle, exact.in_vehicle}},
        {"UT_t", {approx.transfer, exact.transfer}},
        {"AC_K", {approx.vehicle_km, exact.vehicle_km}},
        {"AC_H", {approx.vehicle_hours, exact.vehicle_hours}},
        {"AC_I", {approx.line_infra, exact.line_infra}},
        {"AC_S", {approx.stop_infra, exact.stop_infra}},
    };
    std::vector<ErrorRow> rows;
    for (const auto& [name, v] : items) {
        ErrorRow r;
        r.component = name;
        r.approx = v.first;
        r.exact = v.second;
        const double diff = std::fabs(r.exact - r.approx);
        if (r.approx == 0.0) {
            r.absolute = r.exact != 0.0;
            r.error = diff;
        } else {
            r.error = diff / std::fabs(r.approx);
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace skipstop
