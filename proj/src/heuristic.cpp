#include "skipstop/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace skipstop {

void SolverSettings::validate() const {
    if (!(msa_alpha > 0.0 && msa_alpha < 1.0)) throw std::invalid_argument("MSA smoothing factor must be in (0, 1)");
    if (!(tol_backtrack > 0.0) || !(tol_headway > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (max_bay_size < 1) throw std::invalid_argument("maximum bay size must be at least 1");
    if (max_iterations < 1) throw std::invalid_argument("iteration cap must be at least 1");
    if (line_candidates.empty()) throw std::invalid_argument("no line-count candidates");
    for (int m : line_candidates)
        if (m < 1 || m > kMaxLines) throw std::invalid_argument("line count must be in 1..4");
    if (!(min_spacing_km > 0.0 && max_spacing_km > min_spacing_km))
        throw std::invalid_argument("spacing bounds must satisfy 0 < min < max");
}

std::optional<double> spacing_candidate(const DesignScalars& sc, int bay_size, const PointDemand& d,
                                        const PointBacktrack& b, const ParamSet& params) {
    const double t = bay_size;
    const double mu = params.value_of_time;
    auto dwell_weight = [t](double m) { return 1.0 / m + (m - 1.0) / (m * t); };
    const double numerator =
        dwell_weight(sc.lines_cw) * (d.c_cw + params.cost_vehicle_hour / (mu * sc.headway_cw)) * params.dwell_h
        + dwell_weight(sc.lines_ccw) * (d.c_ccw + params.cost_vehicle_hour / (mu * sc.headway_ccw)) * params.dwell_h
        + params.cost_stop / mu;
    const double denominator = d.trip_ends() / (4.0 * params.walk_speed)
                               + params.backtrack_weight * t * (b.cw + b.ccw) / (3.0 * params.cruise_speed);
    if (!(denominator > 0.0)) return std::nullopt;
    return std::sqrt(numerator / denominator);
}

SpacingChoice clamp_spacing(double candidate, int bay_size, const DesignScalars& sc, const PointDemand& d,
                            const PointBacktrack& b, const ParamSet& params) {
    const double backtracking = (b.cw + b.ccw) * bay_size;
    if (!(backtracking > 0.0)) return {candidate, false};
    const double room = std::min(2.0 * params.capacity / sc.headway_cw - 2.0 * d.c_cw,
                                 2.0 * params.capacity / sc.headway_ccw - 2.0 * d.c_ccw);
    if (!(room > 0.0)) return {0.0, true};
    return {std::min(candidate, room / backtracking), false};
}

PointSolution solve_point(const DemandField& field, int j, const DesignScalars& sc, const ParamSet& params,
                          const SolverSettings& settings) {
    const PointDemand demand = PointDemand::at(field, j);
    const double half_loop = 0.5 * field.corridor().length();
    const bool skip_stop = sc.lines_cw > 1 || sc.lines_ccw > 1;

    PointBacktrack b;
    PointSolution best_iterate;
    double best_residual = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
        double best_cost = std::numeric_limits<double>::infinity();
        double best_s = 0.0;
        int best_t = 0;
        for (int t = 1; t <= settings.max_bay_size; ++t) {
            const double free_s = spacing_candidate(sc, t, demand, b, params).value_or(settings.max_spacing_km);
            const double cand = std::clamp(free_s, settings.min_spacing_km, settings.max_spacing_km);
            const auto choice = clamp_spacing(cand, t, sc, demand, b, params);
            if (choice.capacity_infeasible || choice.spacing < settings.min_spacing_km) continue;
            if (skip_stop && t > 1 && t * choice.spacing > half_loop) continue;
            const double g = pointwise_cost(sc, choice.spacing, t, demand, b, params);
            // Ties go to the smaller bay.
            if (best_t == 0 || g < best_cost - 1e-12 * std::max(1.0, std::fabs(best_cost))) {
                best_cost = g;
                best_s = choice.spacing;
                best_t = t;
            }
        }
        if (best_t == 0) {
            PointSolution out;
            out.spacing = settings.min_spacing_km;
            out.bay_size = 1;
            out.backtrack = b;
            out.iterations = iter;
            out.feasible = false;
            return out;
        }
        const PointBacktrack target = backtrack_at(field, j, best_s, best_t, sc.lines_cw, sc.lines_ccw);
        b.cw = (1.0 - settings.msa_alpha) * b.cw + settings.msa_alpha * target.cw;
        b.ccw = (1.0 - settings.msa_alpha) * b.ccw + settings.msa_alpha * target.ccw;
        const double residual = std::fabs(b.cw - target.cw) + std::fabs(b.ccw - target.ccw);

        PointSolution current{best_s, best_t, b, best_cost, iter, residual <= settings.tol_backtrack, true};
        if (current.converged) return current;
        if (residual < best_residual) {
            best_residual = residual;
            best_iterate = current;
        }
    }
    best_iterate.iterations = settings.max_iterations;
    return best_iterate;
}

namespace {

StageOneResult collect(std::vector<PointSolution> points) {
    const int n = static_cast<int>(points.size());
    StageOneResult r;
    r.profiles.spacing.resize(n);
    r.profiles.bay_size.resize(n);
    r.backtrack.cw.resize(n);
    r.backtrack.ccw.resize(n);
    for (int j = 0; j < n; ++j) {
        const auto& p = points[j];
        r.profiles.spacing[j] = p.spacing;
        r.profiles.bay_size[j] = p.bay_size;
        r.backtrack.cw[j] = p.backtrack.cw;
        r.backtrack.ccw[j] = p.backtrack.ccw;
        r.max_msa_iterations = std::max(r.max_msa_iterations, p.iterations);
        if (!p.converged) ++r.unconverged_points;
        if (!p.feasible) ++r.infeasible_points;
    }
    return r;
}

} // namespace

StageOneResult stage1(const DemandField& field, const DesignScalars& sc, const ParamSet& params,
                      const SolverSettings& settings) {
    const int n = field.size();
    std::vector<PointSolution> points(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (int j = 0; j < n; ++j) points[j] = solve_point(field, j, sc, params, settings);
    return collect(std::move(points));
}

namespace reference {
StageOneResult stage1(const DemandField& field, const DesignScalars& sc, const ParamSet& params,
                      const SolverSettings& settings) {
    const int n = field.size();
    std::vector<PointSolution> points(n);
    for (int j = 0; j < n; ++j) points[j] = solve_point(field, j, sc, params, settings);
    return collect(std::move(points));
}
} // namespace reference

std::optional<double> headway_candidate(Direction dir, int lines, const DesignProfiles& pr,
                                        const BacktrackDensities& bt, const DemandField& field,
                                        const ParamSet& params) {
    const double m = lines;
    const double mu = params.value_of_time;
    const auto& p = field.origins(dir);
    const auto& q = field.destinations(dir);
    const auto& own = dir == Direction::cw ? bt.cw : bt.ccw;
    const auto& other = dir == Direction::cw ? bt.ccw : bt.cw;
    double vehicle_time = 0.0, credit = 0.0;
    for (int j = 0; j < field.size(); ++j) {
        const double t = pr.bay_size[j];
        vehicle_time += 1.0 / params.cruise_speed + params.dwell_h / pr.spacing[j] * (1.0 / m + (m - 1.0) / (m * t));
        credit += -0.5 * (m - 1.0) * (p[j] + q[j]) / t
                  + params.backtrack_weight * 0.5 * m * (other[j] - own[j]);
    }
    const double numerator = params.cost_vehicle_km * field.corridor().length() / mu
                             + params.cost_vehicle_hour / mu * vehicle_time * field.step();
    const double denominator = 0.5 * (2.0 * m - 1.0) * field.total(dir) + credit * field.step();
    if (!(denominator > 0.0)) return std::nullopt;
    return std::sqrt(numerator / denominator);
}

double capacity_headway(Direction dir, const DesignProfiles& pr, const BacktrackDensities& bt,
                        const DemandField& field, const ParamSet& params) {
    const auto& c = field.flow(dir);
    double peak = 0.0;
    for (int j = 0; j < field.size(); ++j)
        peak = std::max(peak, c[j] + 0.5 * pr.bay_size[j] * pr.spacing[j] * (bt.cw[j] + bt.ccw[j]));
    return peak > 0.0 ? params.capacity / peak : std::numeric_limits<double>::infinity();
}

double mid(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

std::optional<double> clamp_headway(double floor, double candidate, double ceiling) {
    if (floor > ceiling) return std::nullopt;
    return mid(floor, candidate, ceiling);
}

Solution solve_line_pair(const DemandField& field, int lines_cw, int lines_ccw, const ParamSet& params,
                         const SolverSettings& settings) {
    Solution sol;
    sol.scalars.lines_cw = lines_cw;
    sol.scalars.lines_ccw = lines_ccw;
    const double floor_cw = headway_floor(lines_cw, params);
    const double floor_ccw = headway_floor(lines_ccw, params);
    const double ceil_cw = params.capacity / field.max_flow(Direction::cw);
    const double ceil_ccw = params.capacity / field.max_flow(Direction::ccw);
    if (floor_cw > ceil_cw || floor_ccw > ceil_ccw) {
        sol.infeasible_reason = "capacity exceeded";
        return sol;
    }
    // Centre of the interval allowed by the headway floor and capacity with
    // no backtracking flow.
    auto centre = [](double lo, double hi) { return std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo; };
    sol.scalars.headway_cw = centre(floor_cw, ceil_cw);
    sol.scalars.headway_ccw = centre(floor_ccw, ceil_ccw);

    StageOneResult s1;
    for (int outer = 1; outer <= settings.max_iterations; ++outer) {
        s1 = stage1(field, sol.scalars, params, settings);
        if (s1.infeasible_points > 0) {
            sol.infeasible_reason = "capacity exceeded";
            return sol;
        }
        const auto cand_cw = headway_candidate(Direction::cw, lines_cw, s1.profiles, s1.backtrack, field, params);
        const auto cand_ccw = headway_candidate(Direction::ccw, lines_ccw, s1.profiles, s1.backtrack, field, params);
        if (!cand_cw || !cand_ccw) {
            sol.infeasible_reason = "degenerate headway";
            return sol;
        }
        const auto next_cw = clamp_headway(
            floor_cw, *cand_cw, capacity_headway(Direction::cw, s1.profiles, s1.backtrack, field, params));
        const auto next_ccw = clamp_headway(
            floor_ccw, *cand_ccw, capacity_headway(Direction::ccw, s1.profiles, s1.backtrack, field, params));
        if (!next_cw || !next_ccw) {
            sol.infeasible_reason = "capacity exceeded";
            return sol;
        }
        const double residual =
            std::fabs(sol.scalars.headway_cw - *next_cw) + std::fabs(sol.scalars.headway_ccw - *next_ccw);
        TraceRow row;
        row.outer_iteration = outer;
        row.msa_iterations = s1.max_msa_iterations;
        row.headway_cw = sol.scalars.headway_cw;
        row.headway_ccw = sol.scalars.headway_ccw;
        row.headway_residual = residual;
        row.generalized_cost = generalized_cost(field, sol.scalars, s1.profiles, s1.backtrack, params).total;
        sol.trace.push_back(row);

        sol.scalars.headway_cw = *next_cw;
        sol.scalars.headway_ccw = *next_ccw;
        if (residual <= settings.tol_headway) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged)
        spdlog::debug("line pair ({}, {}) hit the iteration cap", lines_cw, lines_ccw);

    // Final evaluation with backtracking densities recomputed from the
    // profiles, projecting the headways back inside the capacity limit.
    sol.profiles = std::move(s1.profiles);
    sol.backtrack = backtrack_densities(field, sol.profiles.spacing, sol.profiles.bay_size, lines_cw, lines_ccw);
    sol.scalars.headway_cw =
        std::min(sol.scalars.headway_cw, capacity_headway(Direction::cw, sol.profiles, sol.backtrack, field, params));
    sol.scalars.headway_ccw = std::min(sol.scalars.headway_ccw,
                                       capacity_headway(Direction::ccw, sol.profiles, sol.backtrack, field, params));
    if (sol.scalars.headway_cw < floor_cw || sol.scalars.headway_ccw < floor_ccw) {
        sol.infeasible_reason = "capacity exceeded";
        return sol;
    }
    sol.cost = generalized_cost(field, sol.scalars, sol.profiles, sol.backtrack, params);
    sol.feasible = std::isfinite(sol.cost.total);
    if (!sol.feasible) sol.infeasible_reason = "non-finite cost";
    return sol;
}

const Solution* HeuristicResult::cell(int lines_cw, int lines_ccw) const {
    for (const auto& c : cells)
        if (c.scalars.lines_cw == lines_cw && c.scalars.lines_ccw == lines_ccw) return &c;
    return nullptr;
}

HeuristicResult stage2_solve(const DemandField& field, const ParamSet& params, const SolverSettings& settings) {
    params.validate();
    settings.validate();
    const auto& cand = settings.line_candidates;
    const int k = static_cast<int>(cand.size());
    HeuristicResult result;
    result.cells.resize(static_cast<std::size_t>(k) * k);
#pragma omp parallel for schedule(dynamic, 1)
    for (int idx = 0; idx < k * k; ++idx)
        result.cells[idx] = solve_line_pair(field, cand[idx / k], cand[idx % k], params, settings);

    const Solution* best = nullptr;
    // Designs equal to rounding (e.g. several lines with single-stop bays
    // everywhere) resolve to the earlier, simpler line pair.
    for (const auto& c : result.cells)
        if (c.feasible && (!best || c.cost.total < best->cost.total * (1.0 - 1e-10))) best = &c;
    if (best) {
        result.best = *best;
    } else {
        result.best.infeasible_reason = "all line pairs infeasible";
    }
    return result;
}

} // namespace skipstop
