#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "skipstop/cost_model.hpp"

using namespace skipstop;

namespace {

DemandField uniform_field(double mean = 8.0, double sd = 2.0, double per_direction = 1500.0) {
    DemandSpec s;
    s.trips_per_direction = per_direction;
    s.trip_length = {mean, sd};
    return build_demand_field(s, Corridor(40.0, 80));
}

DemandField peaked_field(double origin_std, double mean, double sd) {
    DemandSpec s;
    s.origins = TruncatedNormalOrigins{origin_std};
    s.trip_length = {mean, sd};
    return build_demand_field(s, Corridor(40.0, 80));
}

BacktrackDensities zero_backtrack(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

DesignScalars scalars(int m_cw, int m_ccw, double h_cw, double h_ccw) {
    DesignScalars s;
    s.lines_cw = m_cw;
    s.lines_ccw = m_ccw;
    s.headway_cw = h_cw;
    s.headway_ccw = h_ccw;
    return s;
}

} // namespace

TEST_SUITE("cost_model") {

TEST_CASE("commercial speed hand examples") {
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    CHECK(pace(0.5, 1, 1, p) == doctest::Approx(0.04 + 2.0 / 120.0));
    CHECK(commercial_speed(0.5, 1, 1, p) == doctest::Approx(17.647).epsilon(1e-4));
    CHECK(commercial_speed(0.4, 3, 2, p) == doctest::Approx(18.557).epsilon(1e-4));
    ParamSet fast = p;
    fast.dwell_h = 1e-12;
    CHECK(commercial_speed(0.3, 4, 3, fast) == doctest::Approx(25.0).epsilon(1e-8));
}

TEST_CASE("headway floor adds one dwell for shared lanes") {
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    CHECK(headway_floor(1, p) == doctest::Approx(1.0 / 60.0));
    CHECK(headway_floor(3, p) == doctest::Approx(1.0 / 60.0 + 30.0 / 3600.0));
}

TEST_CASE("access cost closed form and linearity") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    std::vector<double> s(80, 0.5);
    CHECK(access_cost(f, s, p) == doctest::Approx(375.0).epsilon(1e-9));
    for (auto& v : s) v *= 2.0;
    CHECK(access_cost(f, s, p) == doctest::Approx(750.0).epsilon(1e-9));
    const DemandField empty = oracle::constant_field(80, 40.0, 0.0);
    CHECK(access_cost(empty, s, p) == 0.0);
}

TEST_CASE("all-stop wait is half a headway per trip") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const std::vector<int> t(80, 1);
    const auto sc = scalars(1, 1, 0.1, 0.2);
    CHECK(wait_cost(f, sc, t, zero_backtrack(80), p) == doctest::Approx(0.05 * 1500 + 0.1 * 1500).epsilon(1e-9));
}

TEST_CASE("single-stop bays with two lines still wait half a headway") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const std::vector<int> t(80, 1);
    const auto sc = scalars(2, 1, 0.1, 0.1);
    CHECK(wait_cost(f, sc, t, zero_backtrack(80), p) == doctest::Approx(0.05 * 3000).epsilon(1e-9));
}

TEST_CASE("backtracking wait term vanishes for balanced scalars") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const std::vector<int> t(80, 3);
    const auto sc = scalars(2, 2, 0.1, 0.1);
    BacktrackDensities bt{std::vector<double>(80, 5.0), std::vector<double>(80, 1.0)};
    CHECK(wait_cost(f, sc, t, bt, p) == doctest::Approx(wait_cost(f, sc, t, zero_backtrack(80), p)).epsilon(1e-12));
}

TEST_CASE("trip type wait table") {
    const double min = 1.0 / 60.0;
    const auto w = trip_type_waits(scalars(2, 3, 4 * min, 2 * min));
    CHECK(w.cw[0] == doctest::Approx(2 * min));
    CHECK(w.cw[1] == doctest::Approx(4 * min));
    CHECK(w.cw[2] == doctest::Approx(4 * min));
    CHECK(w.cw[3] == doctest::Approx((8 + 6) / 2.0 * min));
    CHECK(w.cw[4] == doctest::Approx(8 * min));
    const auto one = trip_type_waits(scalars(1, 1, 0.1, 0.1));
    CHECK(one.cw[0] == doctest::Approx(0.05));
    CHECK(one.cw[1] == doctest::Approx(0.05));
    CHECK(one.cw[2] == doctest::Approx(0.05));
    CHECK(one.cw[3] == doctest::Approx(0.1));
    CHECK(one.cw[4] == doctest::Approx(0.1));
}

TEST_CASE("in-vehicle cost for uniform flow") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto pr = DesignProfiles::uniform(80, 0.5, 1);
    const double v = invehicle_cost(f, scalars(1, 1, 0.1, 0.1), pr, zero_backtrack(80), p);
    CHECK(v == doctest::Approx(2.0 * 300.0 * 40.0 / 17.647).epsilon(0.01));
}

TEST_CASE("backtracking weight scales only the backtracking ride") {
    const auto f = uniform_field();
    ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto pr = DesignProfiles::uniform(80, 0.5, 3);
    const auto sc = scalars(2, 2, 0.1, 0.1);
    const BacktrackDensities bt{std::vector<double>(80, 4.0), std::vector<double>(80, 4.0)};
    const double base = invehicle_cost(f, sc, pr, zero_backtrack(80), p);
    const double w1 = invehicle_cost(f, sc, pr, bt, p);
    p.backtrack_weight = 3.0;
    const double w3 = invehicle_cost(f, sc, pr, bt, p);
    CHECK(w3 - base == doctest::Approx(3.0 * (w1 - base)).epsilon(1e-9));
}

TEST_CASE("transfer penalty special cases") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    CHECK(transfer_penalty(f, scalars(1, 1, 0.1, 0.1), std::vector<int>(80, 5), p) == 0.0);
    CHECK(transfer_penalty(f, scalars(3, 2, 0.1, 0.1), std::vector<int>(80, 1), p)
          == doctest::Approx(0.0).epsilon(1e-9));
    const double t30 = transfer_penalty(f, scalars(2, 2, 0.1, 0.1), std::vector<int>(80, 30), p);
    CHECK(t30 == doctest::Approx((1500.0 - 3000.0 * 59.0 / 1800.0) / 60.0).epsilon(1e-6));
    const double far = transfer_penalty(f, scalars(2, 2, 0.1, 0.1), std::vector<int>(80, 100000), p);
    CHECK(far == doctest::Approx(25.0).epsilon(1e-3));
}

TEST_CASE("agency cost arithmetic") {
    const Corridor c(40.0, 80);
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto pr = DesignProfiles::uniform(80, 0.5, 1);
    const auto a = agency_costs(scalars(1, 1, 0.1, 0.1), pr, p, c);
    CHECK(a.vehicle_km == doctest::Approx(23.6).epsilon(1e-9));
    CHECK(a.stop_infra == doctest::Approx(2.8).epsilon(1e-9));
    CHECK(a.line_infra == doctest::Approx(2.0 * 10.0 * 40.0 / 20.0).epsilon(1e-9));
    const double pace_h = 0.04 + 1.0 / 60.0;
    CHECK(a.vehicle_hours == doctest::Approx(62.66 / 20.0 * 2.0 * 40.0 * pace_h / 0.1).epsilon(1e-9));
    const auto slow = agency_costs(scalars(1, 1, 1e6, 1e6), pr, p, c);
    CHECK(slow.vehicle_km < 1e-5);
    CHECK(slow.vehicle_hours < 1e-4);
    CHECK(slow.line_infra == a.line_infra);
}

TEST_CASE("all-stop generalized cost assembles from closed forms") {
    const auto f = uniform_field();
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto pr = DesignProfiles::uniform(80, 0.5, 1);
    const auto sc = scalars(1, 1, 0.1, 0.1);
    const auto gc = generalized_cost(f, sc, pr, p);
    const double pace_h = 0.04 + 1.0 / 60.0;
    double flow = 0.0;
    for (int j = 0; j < 80; ++j) flow += (f.flow(Direction::cw)[j] + f.flow(Direction::ccw)[j]) * 0.5;
    const double expected = 375.0 + 150.0 + flow * pace_h + 0.0 + 23.6 + 62.66 / 20.0 * 80.0 * pace_h / 0.1 + 40.0 + 2.8;
    CHECK(gc.transfer == 0.0);
    CHECK(gc.total == doctest::Approx(expected).epsilon(1e-9));
    CHECK(gc.total == doctest::Approx(gc.user() + gc.agency()).epsilon(1e-12));
}

TEST_CASE("generalized cost grows with the backtracking weight") {
    const auto f = peaked_field(4.0, 2.0, 1.0);
    ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto pr = DesignProfiles::uniform(80, 0.4, 4);
    const auto sc = scalars(2, 2, 0.08, 0.08);
    const double g1 = generalized_cost(f, sc, pr, p).total;
    p.backtrack_weight = 3.0;
    const double g3 = generalized_cost(f, sc, pr, p).total;
    CHECK(g3 > g1);
    const auto flat = DesignProfiles::uniform(80, 0.4, 1);
    p.backtrack_weight = 1.0;
    const double f1 = generalized_cost(f, sc, flat, p).total;
    p.backtrack_weight = 3.0;
    CHECK(generalized_cost(f, sc, flat, p).total == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("split cost equals the component sum") {
    std::mt19937_64 rng(11);
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = oracle::random_field(rng, 40, 40.0, 2.0);
        const auto d = oracle::random_design(rng, f, p, 6);
        const auto bt = backtrack_densities(f, d.profiles.spacing, d.profiles.bay_size, d.scalars.lines_cw,
                                            d.scalars.lines_ccw);
        const double direct = generalized_cost(f, d.scalars, d.profiles, bt, p).total;
        CHECK(split_cost(f, d.scalars, d.profiles, bt, p) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("pointwise cost is affine in s and 1/s and convex") {
    const auto f = peaked_field(4.0, 8.0, 2.0);
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto sc = scalars(2, 3, 0.07, 0.09);
    const auto d = PointDemand::at(f, 30);
    const PointBacktrack b{3.0, 1.5};
    for (int t : {1, 2, 5}) {
        auto g = [&](double s) { return pointwise_cost(sc, s, t, d, b, p); };
        // Fit a s + c / s + k through three points and predict a fourth.
        const double s1 = 0.2, s2 = 0.5, s3 = 1.1, s4 = 2.3;
        const double g1 = g(s1), g2 = g(s2), g3 = g(s3);
        const double r12 = (g1 - g2), r13 = (g1 - g3);
        const double det = (s1 - s2) * (1 / s1 - 1 / s3) - (s1 - s3) * (1 / s1 - 1 / s2);
        const double a = (r12 * (1 / s1 - 1 / s3) - r13 * (1 / s1 - 1 / s2)) / det;
        const double c = ((s1 - s2) * r13 - (s1 - s3) * r12) / det;
        const double k = g1 - a * s1 - c / s1;
        CHECK(g(s4) == doctest::Approx(a * s4 + c / s4 + k).epsilon(1e-10));
        CHECK(a >= 0.0);
        CHECK(c >= 0.0);
        const double h = 0.01;
        for (double s = 0.05; s < 3.0; s += 0.05) CHECK(g(s + h) - 2 * g(s) + g(s - h) >= -1e-9);
    }
}

TEST_CASE("split cost carries no transfer charge at single-stop bays") {
    const auto f = peaked_field(6.0, 8.0, 2.0);
    ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    const auto sc = scalars(3, 2, 0.1, 0.1);
    const auto pr = DesignProfiles::uniform(80, 0.5, 1);
    const auto bt = zero_backtrack(80);
    const double a = split_cost(f, sc, pr, bt, p);
    p.transfer_penalty_h = 1.0;
    CHECK(split_cost(f, sc, pr, bt, p) == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("generalized cost is convex in the headways") {
    std::mt19937_64 rng(5);
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = oracle::random_field(rng, 40, 40.0, 2.0);
        auto d = oracle::random_design(rng, f, p, 5);
        const auto bt = backtrack_densities(f, d.profiles.spacing, d.profiles.bay_size, d.scalars.lines_cw,
                                            d.scalars.lines_ccw);
        auto gc = [&](double hc, double hw) {
            auto sc = d.scalars;
            sc.headway_cw = hc;
            sc.headway_ccw = hw;
            return generalized_cost(f, sc, d.profiles, bt, p).total;
        };
        const double step = 0.004;
        for (double hc = 0.03; hc < 0.3; hc += 0.03)
            for (double hw = 0.03; hw < 0.3; hw += 0.03) {
                const double mid = gc(hc, hw);
                CHECK(gc(hc + step, hw) - 2 * mid + gc(hc - step, hw) >= -1e-9 * mid);
                CHECK(gc(hc, hw + step) - 2 * mid + gc(hc, hw - step) >= -1e-9 * mid);
                CHECK(gc(hc + step, hw + step) - 2 * mid + gc(hc - step, hw - step) >= -1e-9 * mid);
                CHECK(gc(hc + step, hw - step) - 2 * mid + gc(hc - step, hw + step) >= -1e-9 * mid);
            }
    }
}

TEST_CASE("wait cost matches the trip-type double sum") {
    std::mt19937_64 rng(2024);
    ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    int checked = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const auto f = oracle::random_field(rng, 40, 40.0, 2.0);
        const auto d = oracle::random_design(rng, f, p, 6);
        const auto bt = backtrack_densities(f, d.profiles.spacing, d.profiles.bay_size, d.scalars.lines_cw,
                                            d.scalars.lines_ccw);
        const double model = wait_cost(f, d.scalars, d.profiles.bay_size, bt, p);
        const double table = oracle::table_wait(f, d.scalars, d.profiles.bay_size, bt);
        CHECK(model == doctest::Approx(table).epsilon(0.01));
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("single-integral transfer penalty is conservative") {
    std::mt19937_64 rng(77);
    const ParamSet p = ParamSet::preset(Mode::bus, 20.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = oracle::random_field(rng, 40, 40.0, 2.0);
        const auto d = oracle::random_design(rng, f, p, 8);
        const double approx = transfer_penalty(f, d.scalars, d.profiles.bay_size, p);
        const double exact = oracle::transfer_double_integral(f, d.scalars, d.profiles.bay_size, p);
        CHECK(approx >= exact * (1.0 - 1e-9) - 1e-12);
    }
}

TEST_CASE("invalid profiles are rejected") {
    auto pr = DesignProfiles::uniform(10, 0.5, 2);
    CHECK_NOTHROW(pr.validate(10));
    CHECK_THROWS(pr.validate(11));
    pr.spacing[3] = 0.0;
    CHECK_THROWS(pr.validate(10));
    pr = DesignProfiles::uniform(10, 0.5, 31);
    CHECK_THROWS(pr.validate(10));
}

} // TEST_SUITE
