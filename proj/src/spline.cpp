#include "skipstop/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>
#include <spdlog/spdlog.h>

namespace skipstop {

struct PeriodicSpline::Impl {
    std::vector<double> x, y;
    gsl_spline* spline = nullptr;
    double period = 0.0;

    ~Impl() {
        if (spline) gsl_spline_free(spline);
    }
};

PeriodicSpline::PeriodicSpline(const Corridor& corridor, std::span<const double> values, double floor)
    : impl_(std::make_unique<Impl>()) {
    const int n = corridor.size();
    if (static_cast<int>(values.size()) != n) throw std::invalid_argument("spline needs one value per grid cell");
    auto& d = *impl_;
    d.period = corridor.length();
    d.x.resize(n + 1);
    d.y.resize(n + 1);
    for (int j = 0; j < n; ++j) {
        d.x[j] = corridor.point(j);
        d.y[j] = values[j];
    }
    d.x[n] = d.x[0] + d.period;
    d.y[n] = d.y[0];

    gsl_set_error_handler_off();
    d.spline = gsl_spline_alloc(gsl_interp_cspline_periodic, n + 1);
    if (!d.spline || gsl_spline_init(d.spline, d.x.data(), d.y.data(), n + 1) != GSL_SUCCESS)
        throw std::runtime_error("periodic spline construction failed");

    linear_.assign(n, false);
    constexpr int kProbe = 50;
    for (int i = 0; i < n; ++i) {
        const double h = (d.x[i + 1] - d.x[i]) / kProbe;
        for (int k = 0; k <= kProbe; ++k) {
            if (gsl_spline_eval(d.spline, d.x[i] + k * h, nullptr) <= floor) {
                linear_[i] = true;
                ++linear_count_;
                break;
            }
        }
    }
    if (linear_count_ > 0) spdlog::info("spline fell back to linear interpolation on {} span(s)", linear_count_);
}

PeriodicSpline::~PeriodicSpline() = default;
PeriodicSpline::PeriodicSpline(PeriodicSpline&&) noexcept = default;
PeriodicSpline& PeriodicSpline::operator=(PeriodicSpline&&) noexcept = default;

double PeriodicSpline::operator()(double x) const {
    const auto& d = *impl_;
    double u = std::fmod(x - d.x.front(), d.period);
    if (u < 0.0) u += d.period;
    u += d.x.front();
    const int n = static_cast<int>(d.x.size()) - 1;
    auto it = std::upper_bound(d.x.begin(), d.x.end(), u);
    const int i = std::clamp(static_cast<int>(it - d.x.begin()) - 1, 0, n - 1);
    if (linear_[i]) {
        const double w = (u - d.x[i]) / (d.x[i + 1] - d.x[i]);
        return (1.0 - w) * d.y[i] + w * d.y[i + 1];
    }
    return gsl_spline_eval(d.spline, std::min(u, d.x.back()), nullptr);
}

namespace {
std::vector<double> as_double(std::span<const int> v) { return {v.begin(), v.end()}; }
} // namespace

ProfileFit::ProfileFit(const Corridor& corridor, std::span<const double> spacing, std::span<const int> bay_size)
    : corridor_(corridor),
      spacing_(corridor, spacing, 0.0),
      bay_(corridor, as_double(bay_size), -std::numeric_limits<double>::infinity()) {}

double ProfileFit::bay_size(double x) const { return std::max(1.0, bay_(x)); }

} // namespace skipstop
