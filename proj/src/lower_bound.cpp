#include "skipstop/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace skipstop {

void LowerBoundSettings::validate() const {
    if (!(headway_step_h > 0.0)) throw std::invalid_argument("headway grid step must be positive");
    if (line_candidates.empty()) throw std::invalid_argument("no line-count candidates");
    for (int m : line_candidates)
        if (m < 1 || m > kMaxLines) throw std::invalid_argument("line count must be in 1..4");
    if (!(min_spacing_km > 0.0 && max_spacing_km > min_spacing_km))
        throw std::invalid_argument("spacing bounds must satisfy 0 < min < max");
    if (!(golden_tol_km > 0.0)) throw std::invalid_argument("golden-section tolerance must be positive");
}

LbPointCoeffs lb_point_coeffs(const PointDemand& d, const DesignScalars& sc, const ParamSet& params) {
    const double mu = params.value_of_time;
    const double g_cw = d.c_cw + params.cost_vehicle_hour / (mu * sc.headway_cw);
    const double g_ccw = d.c_ccw + params.cost_vehicle_hour / (mu * sc.headway_ccw);
    const double f_cw = (sc.lines_cw - 1.0) / sc.lines_cw;
    const double f_ccw = (sc.lines_ccw - 1.0) / sc.lines_ccw;
    LbPointCoeffs k;
    k.access = d.trip_ends() / (4.0 * params.walk_speed);
    k.fixed_over_s =
        params.dwell_h * (g_cw / sc.lines_cw + g_ccw / sc.lines_ccw) + params.cost_stop / mu;
    k.constant = (g_cw + g_ccw) / params.cruise_speed;
    k.bay_over_s = params.dwell_h * (g_cw + g_ccw) + params.cost_stop / mu;
    k.bay_constant = k.constant
                     - (f_cw * params.transfer_penalty_h + 0.5 * (sc.lines_cw - 1.0) * sc.headway_cw) * (d.p_cw + d.q_cw)
                     - (f_ccw * params.transfer_penalty_h + 0.5 * (sc.lines_ccw - 1.0) * sc.headway_ccw)
                           * (d.p_ccw + d.q_ccw);
    return k;
}

double lb_theta(const DemandField& field, const DesignScalars& sc, const ParamSet& params) {
    const double m_cw = sc.lines_cw, m_ccw = sc.lines_ccw;
    const double lam_cw = field.total(Direction::cw), lam_ccw = field.total(Direction::ccw);
    const double L = field.corridor().length();
    const double mu = params.value_of_time;
    return 0.5 * (2.0 * m_cw - 1.0) * lam_cw * sc.headway_cw + 0.5 * (2.0 * m_ccw - 1.0) * lam_ccw * sc.headway_ccw
           + params.transfer_penalty_h * ((m_cw - 1.0) / m_cw * lam_cw + (m_ccw - 1.0) / m_ccw * lam_ccw)
           + params.cost_vehicle_km * L / mu * (1.0 / sc.headway_cw + 1.0 / sc.headway_ccw)
           + 2.0 * params.cost_line_km * L / mu;
}

namespace {

inline double box_argmin(double a, double c, double lo, double hi) {
    if (!(a > 0.0)) return hi;
    return std::clamp(std::sqrt(c / a), lo, hi);
}

template <class F>
double golden(F&& fn, double lo, double hi, double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = fn(x2);
        }
    }
    const double x = 0.5 * (a + b);
    // The interval ends can beat the interior when the optimum sits on the box.
    double best = x, fb = fn(x);
    if (fn(lo) < fb) best = lo, fb = fn(lo);
    if (fn(hi) < fb) best = hi;
    return best;
}

InnerMin pick(const LbPointCoeffs& k, double s_free, double s_bay) {
    InnerMin r;
    r.spacing_free = s_free;
    r.spacing_bay = s_bay;
    const double v_free = k.f(s_free);
    const double v_bay = k.access * s_bay + k.bay_over_s / s_bay + k.bay_constant;
    r.single_stop_bays = v_bay < v_free;
    r.value = std::min(v_free, v_bay);
    return r;
}

} // namespace

InnerMin lb_inner_minimize(const LbPointCoeffs& k, double s_lo, double s_hi) {
    return pick(k, box_argmin(k.access, k.fixed_over_s, s_lo, s_hi), box_argmin(k.access, k.bay_over_s, s_lo, s_hi));
}

InnerMin lb_inner_minimize_golden(const LbPointCoeffs& k, double s_lo, double s_hi, double tol) {
    const double s_free = golden([&](double s) { return k.f(s); }, s_lo, s_hi, tol);
    const double s_bay =
        golden([&](double s) { return k.access * s + k.bay_over_s / s + k.bay_constant; }, s_lo, s_hi, tol);
    return pick(k, s_free, s_bay);
}

namespace {

// Per-cell demand terms that do not depend on the scalars.
struct CellTerms {
    std::vector<double> access, c_cw, c_ccw, ends_cw, ends_ccw;
};

CellTerms cell_terms(const DemandField& field, const ParamSet& params) {
    const int n = field.size();
    CellTerms t;
    t.access.resize(n);
    t.c_cw.resize(n);
    t.c_ccw.resize(n);
    t.ends_cw.resize(n);
    t.ends_ccw.resize(n);
    for (int j = 0; j < n; ++j) {
        const auto d = PointDemand::at(field, j);
        t.access[j] = d.trip_ends() / (4.0 * params.walk_speed);
        t.c_cw[j] = d.c_cw;
        t.c_ccw[j] = d.c_ccw;
        t.ends_cw[j] = d.p_cw + d.q_cw;
        t.ends_ccw[j] = d.p_ccw + d.q_ccw;
    }
    return t;
}

// Same algebra as lb_point_coeffs + lb_inner_minimize, flattened for the grid.
double fast_objective(const CellTerms& t, double theta, double dx, const DesignScalars& sc, const ParamSet& params,
                      double s_lo, double s_hi) {
    const double mu = params.value_of_time;
    const double tau = params.dwell_h;
    const double hcw = params.cost_vehicle_hour / (mu * sc.headway_cw);
    const double hccw = params.cost_vehicle_hour / (mu * sc.headway_ccw);
    const double inv_m_cw = 1.0 / sc.lines_cw, inv_m_ccw = 1.0 / sc.lines_ccw;
    const double stop = params.cost_stop / mu;
    const double credit_cw =
        (1.0 - inv_m_cw) * params.transfer_penalty_h + 0.5 * (sc.lines_cw - 1.0) * sc.headway_cw;
    const double credit_ccw =
        (1.0 - inv_m_ccw) * params.transfer_penalty_h + 0.5 * (sc.lines_ccw - 1.0) * sc.headway_ccw;
    const double inv_v = 1.0 / params.cruise_speed;
    double sum = 0.0;
    const int n = static_cast<int>(t.access.size());
    for (int j = 0; j < n; ++j) {
        const double g_cw = t.c_cw[j] + hcw, g_ccw = t.c_ccw[j] + hccw;
        const double a = t.access[j];
        const double c_free = tau * (g_cw * inv_m_cw + g_ccw * inv_m_ccw) + stop;
        const double c_bay = tau * (g_cw + g_ccw) + stop;
        const double base = (g_cw + g_ccw) * inv_v;
        const double s_free = box_argmin(a, c_free, s_lo, s_hi);
        const double s_bay = box_argmin(a, c_bay, s_lo, s_hi);
        const double v_free = a * s_free + c_free / s_free + base;
        const double v_bay =
            a * s_bay + c_bay / s_bay + base - credit_cw * t.ends_cw[j] - credit_ccw * t.ends_ccw[j];
        sum += std::min(v_free, v_bay);
    }
    return theta + sum * dx;
}

std::vector<double> headway_grid(double lo, double hi, double step) {
    std::vector<double> g;
    if (lo > hi) return g;
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    g.reserve(count + 1);
    for (long long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

struct GridBest {
    double value = std::numeric_limits<double>::infinity();
    DesignScalars scalars;
};

template <class Objective>
GridBest search_pair(int m_cw, int m_ccw, const std::vector<double>& grid_cw, const std::vector<double>& grid_ccw,
                     Objective&& objective, bool parallel) {
    const int rows = static_cast<int>(grid_cw.size());
    std::vector<GridBest> per_row(rows);
#pragma omp parallel for schedule(static) if (parallel)
    for (int r = 0; r < rows; ++r) {
        GridBest best;
        for (double h_ccw : grid_ccw) {
            DesignScalars sc{m_cw, m_ccw, grid_cw[r], h_ccw};
            const double v = objective(sc);
            if (v < best.value) best = {v, sc};
        }
        per_row[r] = best;
    }
    GridBest best;
    for (const auto& b : per_row)
        if (b.value < best.value) best = b;
    return best;
}

template <class Objective>
GridBest refine_pair(GridBest start, double lo_cw, double hi_cw, double lo_ccw, double hi_ccw, double step,
                     Objective&& objective) {
    GridBest best = start;
    for (int sweep = 0; sweep < 3; ++sweep) {
        DesignScalars sc = best.scalars;
        const double a_cw = std::max(lo_cw, sc.headway_cw - step), b_cw = std::min(hi_cw, sc.headway_cw + step);
        sc.headway_cw = golden(
            [&](double h) {
                DesignScalars t = sc;
                t.headway_cw = h;
                return objective(t);
            },
            a_cw, b_cw, 1e-9);
        const double a_ccw = std::max(lo_ccw, sc.headway_ccw - step),
                     b_ccw = std::min(hi_ccw, sc.headway_ccw + step);
        sc.headway_ccw = golden(
            [&](double h) {
                DesignScalars t = sc;
                t.headway_ccw = h;
                return objective(t);
            },
            a_ccw, b_ccw, 1e-9);
        const double v = objective(sc);
        if (v < best.value) best = {v, sc};
    }
    return best;
}

template <class Objective>
LowerBoundResult solve_impl(const DemandField& field, const ParamSet& params, const LowerBoundSettings& settings,
                            Objective&& objective, bool parallel) {
    params.validate();
    settings.validate();
    LowerBoundResult result;
    result.symmetric_demand = field.is_symmetric(1e-9);
    const double ceil_cw = params.capacity / field.max_flow(Direction::cw);
    const double ceil_ccw = params.capacity / field.max_flow(Direction::ccw);

    GridBest overall;
    double grid_best = std::numeric_limits<double>::infinity();
    for (int m_cw : settings.line_candidates) {
        for (int m_ccw : settings.line_candidates) {
            const double lo_cw = headway_floor(m_cw, params), lo_ccw = headway_floor(m_ccw, params);
            const auto grid_cw = headway_grid(lo_cw, ceil_cw, settings.headway_step_h);
            const auto grid_ccw = headway_grid(lo_ccw, ceil_ccw, settings.headway_step_h);
            if (grid_cw.empty() || grid_ccw.empty()) continue;
            GridBest best = search_pair(m_cw, m_ccw, grid_cw, grid_ccw, objective, parallel);
            grid_best = std::min(grid_best, best.value);
            if (settings.refine)
                best = refine_pair(best, lo_cw, ceil_cw, lo_ccw, ceil_ccw, settings.headway_step_h, objective);
            if (best.value < overall.value) overall = best;
        }
    }
    if (!std::isfinite(overall.value)) return result;
    result.feasible = true;
    result.value = overall.value;
    result.grid_value = grid_best;
    result.scalars = overall.scalars;
    result.points.resize(field.size());
    for (int j = 0; j < field.size(); ++j)
        result.points[j] = lb_inner_minimize(lb_point_coeffs(PointDemand::at(field, j), overall.scalars, params),
                                             settings.min_spacing_km, settings.max_spacing_km);
    return result;
}

} // namespace

double lb_objective(const DemandField& field, const DesignScalars& sc, const ParamSet& params,
                    const LowerBoundSettings& settings) {
    double sum = 0.0;
    for (int j = 0; j < field.size(); ++j)
        sum += lb_inner_minimize(lb_point_coeffs(PointDemand::at(field, j), sc, params), settings.min_spacing_km,
                                 settings.max_spacing_km)
                   .value;
    return lb_theta(field, sc, params) + sum * field.step();
}

LowerBoundResult lb_solve(const DemandField& field, const ParamSet& params, const LowerBoundSettings& settings) {
    const CellTerms terms = cell_terms(field, params);
    const double dx = field.step();
    auto objective = [&](const DesignScalars& sc) {
        return fast_objective(terms, lb_theta(field, sc, params), dx, sc, params, settings.min_spacing_km,
                              settings.max_spacing_km);
    };
    return solve_impl(field, params, settings, objective, true);
}

namespace reference {
LowerBoundResult lb_solve(const DemandField& field, const ParamSet& params, const LowerBoundSettings& settings) {
    auto objective = [&](const DesignScalars& sc) {
        double sum = 0.0;
        for (int j = 0; j < field.size(); ++j)
            sum += lb_inner_minimize_golden(lb_point_coeffs(PointDemand::at(field, j), sc, params),
                                            settings.min_spacing_km, settings.max_spacing_km, settings.golden_tol_km)
                       .value;
        return lb_theta(field, sc, params) + sum * field.step();
    };
    return solve_impl(field, params, settings, objective, false);
}
} // namespace reference

double removed_term(const DemandField& field, const Solution& sol, const ParamSet& params) {
    const auto& sc = sol.scalars;
    const double skew = 0.5 * (sc.lines_ccw * sc.headway_ccw - sc.lines_cw * sc.headway_cw);
    double sum = 0.0;
    for (int j = 0; j < field.size(); ++j) {
        const double s = sol.profiles.spacing[j];
        const double t = sol.profiles.bay_size[j];
        const double b_cw = sol.backtrack.cw[j], b_ccw = sol.backtrack.ccw[j];
        const double ride = s * t / (3.0 * params.cruise_speed)
                            + params.dwell_h / 6.0 * ((t - 1.0) / sc.lines_cw + (t - 1.0) / sc.lines_ccw + 2.0);
        sum += skew * (b_cw - b_ccw) + ride * (b_cw + b_ccw);
    }
    return params.backtrack_weight * sum * field.step();
}

double optimality_gap(double heuristic_cost, double bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("lower bound must be positive");
    return (heuristic_cost - bound) / bound;
}

} // namespace skipstop
