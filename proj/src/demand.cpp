#include "skipstop/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace skipstop {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// CDF of the triangular density centred on c with half-width h.
double triangle_cdf(double t, double c, double h) {
    if (t <= c - h) return 0.0;
    if (t >= c + h) return 1.0;
    if (t <= c) {
        const double u = t - (c - h);
        return u * u / (2.0 * h * h);
    }
    const double u = (c + h) - t;
    return 1.0 - u * u / (2.0 * h * h);
}

double triangle_pdf(double t, double c, double h) {
    const double u = std::fabs(t - c);
    return u >= h ? 0.0 : (h - u) / (h * h);
}

// Overlap length of [a0, a1] and [b0, b1].
double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Fraction of a CW cell pair (origin offset e from origin cell, OD offset d)
// whose trips pass the centre of the crossing cell.
double crossing_share(int e, int d) {
    if (d == 0) return e == 0 ? 0.5 : 0.0;
    if (e == 0 || e == d) return 0.5;
    return (e > 0 && e < d) ? 1.0 : 0.0;
}

} // namespace

double TripLengthPdf::lower() const { return mean_km - std::numbers::sqrt3 * std_km; }
double TripLengthPdf::upper() const { return mean_km + std::numbers::sqrt3 * std_km; }

// ---------------------------------------------------------------------------

DemandField::DemandField(Corridor corridor, std::vector<double> lambda)
    : corridor_(corridor), lambda_(std::move(lambda)) {
    const auto n = static_cast<std::size_t>(corridor_.size());
    if (lambda_.size() != n * n)
        throw std::invalid_argument("demand matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    for (double v : lambda_)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("demand matrix entries must be finite and non-negative");

    auto agg = compute_aggregates(lambda_, corridor_);
    p_cw_ = std::move(agg.p_cw);
    p_ccw_ = std::move(agg.p_ccw);
    q_cw_ = std::move(agg.q_cw);
    q_ccw_ = std::move(agg.q_ccw);
    c_cw_ = std::move(agg.c_cw);
    c_ccw_ = std::move(agg.c_ccw);
    for (std::size_t j = 0; j < n; ++j) {
        total_cw_ += p_cw_[j] * corridor_.step();
        total_ccw_ += p_ccw_[j] * corridor_.step();
    }
}

double DemandField::max_flow(Direction d) const {
    const auto& c = flow(d);
    return *std::max_element(c.begin(), c.end());
}

bool DemandField::is_symmetric(double rel_tol) const {
    const int n = size();
    double scale = 0.0;
    for (double v : lambda_) scale = std::max(scale, v);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            if (std::fabs(lambda(j, k) - lambda(k, j)) > rel_tol * scale) return false;
    return true;
}

// ---------------------------------------------------------------------------

double cw_share(int offset, int n) {
    const int half = n / 2;
    if (offset == 0 || offset == half) return 0.5;
    return offset < half ? 1.0 : 0.0;
}

std::vector<double> origin_cell_density(const OriginPdf& pdf, const Corridor& corridor) {
    const int n = corridor.size();
    const double dx = corridor.step();
    const double L = corridor.length();
    std::vector<double> p(n);
    if (std::holds_alternative<UniformOrigins>(pdf)) {
        std::fill(p.begin(), p.end(), 1.0 / L);
        return p;
    }
    const double sigma = std::get<TruncatedNormalOrigins>(pdf).std_km;
    if (!(sigma > 0.0)) throw std::invalid_argument("origin std must be positive");
    const double mean = 0.5 * L;
    const double mass = normal_cdf((L - mean) / sigma) - normal_cdf(-mean / sigma);
    for (int j = 0; j < n; ++j) {
        const double a = (j * dx - mean) / sigma;
        const double b = ((j + 1) * dx - mean) / sigma;
        p[j] = (normal_cdf(b) - normal_cdf(a)) / (mass * dx);
    }
    return p;
}

std::vector<double> trip_length_cell_density(const TripLengthPdf& pdf, const Corridor& corridor) {
    const int n = corridor.size();
    const double dx = corridor.step();
    const double L = corridor.length();
    const double lo = pdf.lower();
    const double hi = pdf.upper();
    const double width = hi - lo;
    std::vector<double> theta(n, 0.0);
    for (int d = 0; d < n; ++d) {
        // Offset y - x over a cell pair is triangular around d * dx.
        const double c = d * dx;
        double value = 0.0;
        for (int k = -1; k <= 2; ++k) {
            const double shift = k * L;
            if (width > 1e-12) {
                value += triangle_cdf(shift + hi, c, dx) - triangle_cdf(shift + lo, c, dx);
                value += triangle_cdf(shift - lo, c, dx) - triangle_cdf(shift - hi, c, dx);
            } else {
                value += triangle_pdf(shift + lo, c, dx) + triangle_pdf(shift - lo, c, dx);
            }
        }
        theta[d] = width > 1e-12 ? value / width : value;
    }
    return theta;
}

std::vector<double> demand_matrix(const DemandSpec& spec, const Corridor& corridor) {
    const int n = corridor.size();
    if (spec.raw_matrix) {
        if (spec.raw_matrix->size() != static_cast<std::size_t>(n) * n)
            throw std::invalid_argument("raw demand matrix does not match the corridor grid");
        for (double v : *spec.raw_matrix)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("raw demand matrix has a negative or non-finite entry");
        return *spec.raw_matrix;
    }
    if (!(spec.trips_per_direction >= 0.0))
        throw std::invalid_argument("directional demand must be non-negative");
    const auto& tl = spec.trip_length;
    if (!(tl.std_km >= 0.0)) throw std::invalid_argument("trip length std must be non-negative");
    if (!(tl.lower() > 0.0))
        throw std::invalid_argument("trip lengths must be positive: mean - sqrt(3) std <= 0");
    if (tl.upper() > 0.5 * corridor.length() * (1.0 + 1e-12))
        throw std::invalid_argument("trip lengths must not exceed half the loop length");

    const auto p = origin_cell_density(spec.origins, corridor);
    const auto theta = trip_length_cell_density(tl, corridor);
    std::vector<double> lambda(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            lambda[static_cast<std::size_t>(j) * n + k] =
                spec.trips_per_direction * p[j] * theta[corridor.wrap_index(static_cast<long long>(k) - j)];
    return lambda;
}

DemandField build_demand_field(const DemandSpec& spec, const Corridor& corridor) {
    return DemandField(corridor, demand_matrix(spec, corridor));
}

std::vector<double> load_demand_matrix_csv(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open demand matrix '" + path + "'");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n) * n);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double v;
        int cols = 0;
        while (ss >> v) {
            values.push_back(v);
            ++cols;
        }
        if (!ss.eof())
            throw std::runtime_error(path + ":" + std::to_string(row + 1) + ": non-numeric entry");
        if (cols == 0) continue;
        if (cols != n)
            throw std::runtime_error(path + ":" + std::to_string(row + 1) + ": expected " + std::to_string(n) +
                                     " columns, got " + std::to_string(cols));
        ++row;
    }
    if (row != n)
        throw std::runtime_error(path + ": expected " + std::to_string(n) + " rows, got " + std::to_string(row));
    return values;
}

// ---------------------------------------------------------------------------

DemandAggregates compute_aggregates(std::span<const double> lambda, const Corridor& corridor) {
    const int n = corridor.size();
    const int half = n / 2;
    const double dx = corridor.step();
    DemandAggregates a;
    a.p_cw.assign(n, 0.0);
    a.p_ccw.assign(n, 0.0);
    a.q_cw.assign(n, 0.0);
    a.q_ccw.assign(n, 0.0);
    a.c_cw.assign(n, 0.0);
    a.c_ccw.assign(n, 0.0);
    auto at = [&](int j, int k) { return lambda[static_cast<std::size_t>(j) * n + k]; };

    // Per origin j: suffix sums over forward (CW) and backward (CCW) offsets.
    // tail[j][e] = sum_{d > e, d <= half} share(d) lambda(j, j +/- d).
    std::vector<double> tail_cw(static_cast<std::size_t>(n) * (half + 2), 0.0);
    std::vector<double> tail_ccw(tail_cw.size(), 0.0);

#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        double* tcw = tail_cw.data() + static_cast<std::size_t>(j) * (half + 2);
        double* tccw = tail_ccw.data() + static_cast<std::size_t>(j) * (half + 2);
        // index e + 1 stores the sum over d > e, so e = -1 is the full sum.
        for (int d = half; d >= 0; --d) {
            const double w = cw_share(d, n);
            tcw[d] = tcw[d + 1] + w * at(j, corridor.wrap_index(j + d));
            tccw[d] = tccw[d + 1] + w * at(j, corridor.wrap_index(j - d));
        }
        a.p_cw[j] = tcw[0] * dx;
        a.p_ccw[j] = tccw[0] * dx;
    }

#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        double qcw = 0.0, qccw = 0.0;
        for (int d = 0; d <= half; ++d) {
            const double w = cw_share(d, n);
            qcw += w * at(corridor.wrap_index(k - d), k);
            qccw += w * at(corridor.wrap_index(k + d), k);
        }
        a.q_cw[k] = qcw * dx;
        a.q_ccw[k] = qccw * dx;
    }

    const double cell = dx * dx;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double ccw_flow = 0.0, cw_flow = 0.0;
        for (int e = 0; e <= half; ++e) {
            // CW: origin e cells upstream of i.
            const int jc = corridor.wrap_index(i - e);
            const double* tcw = tail_cw.data() + static_cast<std::size_t>(jc) * (half + 2);
            if (e == 0)
                cw_flow += 0.5 * tcw[0];
            else
                cw_flow += tcw[e + 1] + 0.5 * cw_share(e, n) * at(jc, i);
            // CCW: origin e cells downstream (larger x) of i.
            const int jw = corridor.wrap_index(i + e);
            const double* tccw = tail_ccw.data() + static_cast<std::size_t>(jw) * (half + 2);
            if (e == 0)
                ccw_flow += 0.5 * tccw[0];
            else
                ccw_flow += tccw[e + 1] + 0.5 * cw_share(e, n) * at(jw, i);
        }
        a.c_cw[i] = cw_flow * cell;
        a.c_ccw[i] = ccw_flow * cell;
    }
    return a;
}

namespace reference {

DemandAggregates compute_aggregates(std::span<const double> lambda, const Corridor& corridor) {
    const int n = corridor.size();
    const double dx = corridor.step();
    DemandAggregates a;
    a.p_cw.assign(n, 0.0);
    a.p_ccw.assign(n, 0.0);
    a.q_cw.assign(n, 0.0);
    a.q_ccw.assign(n, 0.0);
    a.c_cw.assign(n, 0.0);
    a.c_ccw.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const double mass = lambda[static_cast<std::size_t>(j) * n + k];
            const int d_cw = corridor.wrap_index(static_cast<long long>(k) - j);
            const int d_ccw = corridor.wrap_index(static_cast<long long>(j) - k);
            const double w_cw = cw_share(d_cw, n);
            const double w_ccw = cw_share(d_ccw, n);
            a.p_cw[j] += w_cw * mass * dx;
            a.q_cw[k] += w_cw * mass * dx;
            a.p_ccw[j] += w_ccw * mass * dx;
            a.q_ccw[k] += w_ccw * mass * dx;
            for (int i = 0; i < n; ++i) {
                const int e_cw = corridor.wrap_index(static_cast<long long>(i) - j);
                const int e_ccw = corridor.wrap_index(static_cast<long long>(j) - i);
                a.c_cw[i] += w_cw * mass * dx * dx * crossing_share(e_cw, d_cw);
                a.c_ccw[i] += w_ccw * mass * dx * dx * crossing_share(e_ccw, d_ccw);
            }
        }
    }
    return a;
}

} // namespace reference

// ---------------------------------------------------------------------------

double contained_trips(const DemandField& field, double lo, double hi, Direction d) {
    if (!(hi > lo)) return 0.0;
    const Corridor& c = field.corridor();
    const double dx = c.step();
    const auto first = static_cast<long long>(std::floor(lo / dx));
    const auto last = static_cast<long long>(std::floor(hi / dx));
    double total = 0.0;
    for (long long a = first; a <= last; ++a) {
        const double la = overlap(a * dx, (a + 1) * dx, lo, hi);
        if (la <= 0.0) continue;
        const int ja = c.wrap_index(a);
        // Same cell: only the triangle on one side of the diagonal.
        total += field.lambda(ja, ja) * la * la * 0.5;
        for (long long b = a + 1; b <= last; ++b) {
            const double lb = overlap(b * dx, (b + 1) * dx, lo, hi);
            if (lb <= 0.0) continue;
            const int jb = c.wrap_index(b);
            const double value = d == Direction::cw ? field.lambda(ja, jb) : field.lambda(jb, ja);
            total += value * la * lb;
        }
    }
    return total;
}

PointBacktrack backtrack_at(const DemandField& field, int j, double spacing, int bay_size, int lines_cw,
                            int lines_ccw) {
    if (!(spacing > 0.0)) throw std::invalid_argument("stop spacing must be positive");
    if (bay_size < 1) throw std::invalid_argument("bay size must be at least 1");
    PointBacktrack out;
    if (bay_size == 1 || (lines_cw == 1 && lines_ccw == 1)) return out;
    const double width = bay_size * spacing;
    if (width > 0.5 * field.corridor().length() * (1.0 + 1e-12))
        throw std::invalid_argument("skip-stop bay of " + std::to_string(width) + " km exceeds half the loop");
    const double x = field.corridor().point(j);
    const double lo = x - 0.5 * width;
    const double hi = x + 0.5 * width;
    const double t = bay_size;
    const double shape = (t - 1.0) * (t - 1.0) / (t * t);
    if (lines_cw > 1) {
        const double mean_density = contained_trips(field, lo, hi, Direction::cw) / width;
        out.cw = (lines_cw - 1.0) / lines_cw * shape * mean_density;
    }
    if (lines_ccw > 1) {
        const double mean_density = contained_trips(field, lo, hi, Direction::ccw) / width;
        out.ccw = (lines_ccw - 1.0) / lines_ccw * shape * mean_density;
    }
    return out;
}

BacktrackDensities backtrack_densities(const DemandField& field, std::span<const double> spacing,
                                       std::span<const int> bay_size, int lines_cw, int lines_ccw) {
    const int n = field.size();
    if (static_cast<int>(spacing.size()) != n || static_cast<int>(bay_size.size()) != n)
        throw std::invalid_argument("profiles must have one value per grid cell");
    BacktrackDensities b{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (int j = 0; j < n; ++j) {
        const auto p = backtrack_at(field, j, spacing[j], bay_size[j], lines_cw, lines_ccw);
        b.cw[j] = p.cw;
        b.ccw[j] = p.ccw;
    }
    return b;
}

} // namespace skipstop
