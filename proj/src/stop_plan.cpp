#include "skipstop/stop_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace skipstop {

ProfileIntegrals::ProfileIntegrals(const ProfileFit& fit, int substeps_per_cell)
    : length_(fit.corridor().length()), h_(fit.corridor().step() / substeps_per_cell) {
    const int steps = fit.corridor().size() * substeps_per_cell;
    inv_spacing_.assign(steps + 1, 0.0);
    bay_.assign(steps + 1, 0.0);
    for (int k = 0; k < steps; ++k) {
        const double z = (k + 0.5) * h_;
        inv_spacing_[k + 1] = inv_spacing_[k] + h_ / fit.spacing(z);
        bay_[k + 1] = bay_[k] + h_ * fit.bay_size(z);
    }
}

double ProfileIntegrals::lookup(const std::vector<double>& c, double x) const {
    const int last = static_cast<int>(c.size()) - 1;
    if (x <= 0.0) return 0.0;
    if (x >= length_) return c[last];
    const int k = std::min(static_cast<int>(x / h_), last - 1);
    const double w = (x - k * h_) / h_;
    return (1.0 - w) * c[k] + w * c[k + 1];
}

int StopPlan::bay_stops(int k) const {
    const int next = k + 1 < transfer_count() ? transfers[k + 1] : stop_count();
    return next - transfers[k];
}

int StopPlan::bay_of(int i) const {
    auto it = std::upper_bound(transfers.begin(), transfers.end(), i);
    return static_cast<int>(it - transfers.begin()) - 1;
}

void StopPlan::validate() const {
    const int n = stop_count();
    if (n < 1 || stops.front() != 0.0) throw std::logic_error("first stop must sit at the origin");
    for (int i = 1; i < n; ++i)
        if (!(stops[i] > stops[i - 1])) throw std::logic_error("stops must be strictly increasing");
    if (!(stops.back() < length)) throw std::logic_error("stops must lie inside [0, L)");
    if (transfers.empty() || transfers.front() != 0) throw std::logic_error("stop 0 must be a transfer stop");
    for (std::size_t k = 1; k < transfers.size(); ++k)
        if (transfers[k] <= transfers[k - 1] || transfers[k] >= n)
            throw std::logic_error("transfer indices must be strictly increasing");
    const int lcm = std::lcm(lines_cw, lines_ccw);
    for (int k = 0; k < transfer_count(); ++k)
        if ((bay_stops(k) - 1) % lcm != 0)
            throw std::logic_error("bay " + std::to_string(k) + " has " + std::to_string(bay_stops(k) - 1)
                                   + " non-transfer stops, not a multiple of " + std::to_string(lcm));
}

std::vector<double> place_stops(const ProfileFit& fit, const ProfileIntegrals& integrals) {
    const double L = fit.corridor().length();
    const auto& cum = integrals.cumulative_inverse_spacing();
    const double h = integrals.step();
    std::vector<double> stops{0.0};
    for (long long target = 1; target < integrals.stop_count(); ++target) {
        const double t = static_cast<double>(target);
        auto it = std::lower_bound(cum.begin(), cum.end(), t);
        const int k = static_cast<int>(it - cum.begin()) - 1;
        const double x = k * h + (t - cum[k]) / (cum[k + 1] - cum[k]) * h;
        if (x >= L - 1e-9) break;
        stops.push_back(x);
    }
    if (stops.size() > 1 && L - stops.back() < 0.5 * fit.spacing(L)) stops.pop_back();
    return stops;
}

std::vector<int> select_transfer_stops(const std::vector<double>& stops, const ProfileIntegrals& integrals,
                                       double length, int lines_cw, int lines_ccw) {
    const int n = static_cast<int>(stops.size());
    const int lcm = std::lcm(lines_cw, lines_ccw);
    // Index n stands for the origin reached again at x = L.
    auto pos = [&](int i) { return i < n ? stops[i] : length; };
    std::vector<int> u{0};
    while (u.back() != n) {
        const int from = u.back();
        int best = -1;
        double best_gap = std::numeric_limits<double>::infinity();
        for (int c = from + 1; c <= n; c += lcm) {
            const double avg = (integrals.bays_to(pos(c)) - integrals.bays_to(pos(from))) / (pos(c) - pos(from));
            const double gap = std::fabs((c - from) - avg);
            if (gap < best_gap) {
                best_gap = gap;
                best = c;
            }
        }
        u.push_back(best);
    }
    u.pop_back();

    if (u.size() > 1) {
        const double x_last = stops[u.back()];
        const double stops_left = integrals.stop_count() - integrals.stops_to(x_last);
        const double half_bay = (integrals.bays_to(length) - integrals.bays_to(x_last)) / (2.0 * (length - x_last));
        const int merged_free = n - u[u.size() - 2] - 1;
        if (stops_left < half_bay) {
            if (merged_free % lcm == 0)
                u.pop_back();
            else
                spdlog::debug("closing transfer stop kept to preserve bay line balance");
        }
    }
    return u;
}

StopPlan assign_lines(std::vector<double> stops, std::vector<int> transfers, double length, int lines_cw,
                      int lines_ccw) {
    StopPlan plan;
    plan.length = length;
    plan.lines_cw = lines_cw;
    plan.lines_ccw = lines_ccw;
    plan.stops = std::move(stops);
    plan.transfers = std::move(transfers);
    const int n = plan.stop_count();
    plan.is_transfer.assign(n, false);
    plan.line_cw.assign(n, -1);
    plan.line_ccw.assign(n, -1);
    for (int t : plan.transfers) plan.is_transfer[t] = true;
    for (int k = 0; k < plan.transfer_count(); ++k) {
        const int first = plan.transfers[k];
        for (int p = 0; p + 1 < plan.bay_stops(k); ++p) {
            plan.line_cw[first + 1 + p] = p % lines_cw;
            plan.line_ccw[first + 1 + p] = p % lines_ccw;
        }
    }
    return plan;
}

StopPlan generate_stop_plan(const Corridor& corridor, const DesignProfiles& profiles, int lines_cw, int lines_ccw) {
    profiles.validate(corridor.size(), std::numeric_limits<int>::max());
    const ProfileFit fit(corridor, profiles.spacing, profiles.bay_size);
    const ProfileIntegrals integrals(fit);
    auto stops = place_stops(fit, integrals);
    auto transfers = select_transfer_stops(stops, integrals, corridor.length(), lines_cw, lines_ccw);
    StopPlan plan = assign_lines(std::move(stops), std::move(transfers), corridor.length(), lines_cw, lines_ccw);
    plan.validate();
    return plan;
}

namespace {
// Stop at or before x (circularly).
int stop_before(const StopPlan& plan, double x) {
    auto it = std::upper_bound(plan.stops.begin(), plan.stops.end(), x);
    return static_cast<int>(it - plan.stops.begin()) - 1;
}

double gap_after(const StopPlan& plan, int i) {
    const int n = plan.stop_count();
    return i + 1 < n ? plan.stops[i + 1] - plan.stops[i] : plan.length - plan.stops[i];
}
} // namespace

DesignProfiles plan_to_profiles(const StopPlan& plan, const Corridor& corridor) {
    DesignProfiles p;
    p.spacing.resize(corridor.size());
    p.bay_size.resize(corridor.size());
    for (int j = 0; j < corridor.size(); ++j) {
        const int i = stop_before(plan, corridor.point(j));
        p.spacing[j] = gap_after(plan, i);
        p.bay_size[j] = plan.bay_stops(plan.bay_of(i));
    }
    return p;
}

std::vector<ProfileComparisonRow> compare_profiles(const Corridor& corridor, const DesignProfiles& profiles,
                                                   const StopPlan& plan) {
    const ProfileFit fit(corridor, profiles.spacing, profiles.bay_size);
    const DesignProfiles realized = plan_to_profiles(plan, corridor);
    std::vector<ProfileComparisonRow> rows(corridor.size());
    for (int j = 0; j < corridor.size(); ++j) {
        const double x = corridor.point(j);
        rows[j] = {x,
                   profiles.spacing[j],
                   fit.spacing(x),
                   realized.spacing[j],
                   profiles.bay_size[j],
                   fit.bay_size(x),
                   realized.bay_size[j]};
    }
    return rows;
}

} // namespace skipstop
