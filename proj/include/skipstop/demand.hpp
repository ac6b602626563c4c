#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skipstop/corridor.hpp"

namespace skipstop {

enum class Direction { cw, ccw };

inline const char* to_string(Direction d) { return d == Direction::cw ? "cw" : "ccw"; }

struct UniformOrigins {};

/// Normal origin density centred on L/2, truncated to [0, L] and renormalised.
struct TruncatedNormalOrigins {
    double std_km;
};

using OriginPdf = std::variant<UniformOrigins, TruncatedNormalOrigins>;

/// Trip length uniform on [mean - sqrt(3) std, mean + sqrt(3) std].
struct TripLengthPdf {
    double mean_km = 8.0;
    double std_km = 2.0;

    double lower() const;
    double upper() const;
};

/// Factorised demand lambda(x, y) = p(x) theta(l(x, y)) Lambda, or an explicit
/// n x n matrix (row = origin cell, trips/km^2/h) when raw_matrix is set.
struct DemandSpec {
    double trips_per_direction = 1500.0;
    OriginPdf origins = UniformOrigins{};
    TripLengthPdf trip_length;
    std::optional<std::vector<double>> raw_matrix;
};

/// Gridded OD density plus every aggregate derived from it. Immutable after
/// construction and safe to share across threads.
class DemandField {
public:
    DemandField(Corridor corridor, std::vector<double> lambda);

    const Corridor& corridor() const { return corridor_; }
    int size() const { return corridor_.size(); }
    double step() const { return corridor_.step(); }

    double lambda(int origin, int destination) const {
        return lambda_[static_cast<std::size_t>(origin) * corridor_.size() + destination];
    }
    std::span<const double> lambda_row(int origin) const {
        return {lambda_.data() + static_cast<std::size_t>(origin) * corridor_.size(),
                static_cast<std::size_t>(corridor_.size())};
    }
    const std::vector<double>& lambda_matrix() const { return lambda_; }

    // Origin / destination densities (trips/km/h).
    const std::vector<double>& origins(Direction d) const { return d == Direction::cw ? p_cw_ : p_ccw_; }
    const std::vector<double>& destinations(Direction d) const { return d == Direction::cw ? q_cw_ : q_ccw_; }
    // On-board flow at each cell centre (trips/h).
    const std::vector<double>& flow(Direction d) const { return d == Direction::cw ? c_cw_ : c_ccw_; }
    // Total directional demand (trips/h).
    double total(Direction d) const { return d == Direction::cw ? total_cw_ : total_ccw_; }

    /// P + Q summed over both directions at cell j.
    double trip_ends(int j) const { return p_cw_[j] + q_cw_[j] + p_ccw_[j] + q_ccw_[j]; }
    double max_flow(Direction d) const;

    /// True when lambda(j, k) == lambda(k, j) to a relative tolerance.
    bool is_symmetric(double rel_tol = 1e-9) const;

private:
    Corridor corridor_;
    std::vector<double> lambda_;
    std::vector<double> p_cw_, p_ccw_, q_cw_, q_ccw_, c_cw_, c_ccw_;
    double total_cw_ = 0.0;
    double total_ccw_ = 0.0;
};

/// Share of an OD cell pair with forward offset d (cells) that travels CW.
/// Cells on the diagonal and the antipodal cell straddle the direction
/// boundary and are split evenly.
double cw_share(int offset, int n);

/// Cell-averaged origin density (1/km) for each cell.
std::vector<double> origin_cell_density(const OriginPdf& pdf, const Corridor& corridor);

/// Cell-pair average of theta(l(x, y)) (1/km) indexed by forward offset
/// d = (k - j) mod n.
std::vector<double> trip_length_cell_density(const TripLengthPdf& pdf, const Corridor& corridor);

/// Validates the spec and fills lambda on the grid.
std::vector<double> demand_matrix(const DemandSpec& spec, const Corridor& corridor);

DemandField build_demand_field(const DemandSpec& spec, const Corridor& corridor);

/// Reads an n x n lambda grid from CSV (comma or whitespace separated).
std::vector<double> load_demand_matrix_csv(const std::string& path, int n);

struct DemandAggregates {
    std::vector<double> p_cw, p_ccw, q_cw, q_ccw, c_cw, c_ccw;
};

/// O(n^2) aggregates; flows via per-origin suffix sums, OpenMP over cells.
DemandAggregates compute_aggregates(std::span<const double> lambda, const Corridor& corridor);

namespace reference {
/// Direct triple sum over (origin, destination, crossing point). Serial.
DemandAggregates compute_aggregates(std::span<const double> lambda, const Corridor& corridor);
} // namespace reference

// --- backtracking -----------------------------------------------------------

/// Integral of lambda over contained trips of the window [lo, hi] (trips/h).
/// CW trips satisfy lo <= origin <= destination <= hi, CCW the mirror image.
/// lambda is piecewise constant per cell and partial cells are weighted by
/// their exact overlap area.
double contained_trips(const DemandField& field, double lo, double hi, Direction d);

struct PointBacktrack {
    double cw = 0.0;
    double ccw = 0.0;
};

/// Backtracking-trip densities (trips/km/h) at cell j for a bay of
/// bay_size stops spaced `spacing` km apart. Throws when the bay is longer
/// than half the loop.
PointBacktrack backtrack_at(const DemandField& field, int j, double spacing, int bay_size,
                            int lines_cw, int lines_ccw);

struct BacktrackDensities {
    std::vector<double> cw;
    std::vector<double> ccw;
};

BacktrackDensities backtrack_densities(const DemandField& field, std::span<const double> spacing,
                                       std::span<const int> bay_size, int lines_cw, int lines_ccw);

} // namespace skipstop
