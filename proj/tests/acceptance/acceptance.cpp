#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "skipstop/experiment.hpp"
#include "skipstop/report.hpp"

using namespace skipstop;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGapMean = 0.015;
constexpr double kGapMax = 0.035;
constexpr double kGcErrMean = 0.005;
constexpr double kGcErrMax = 0.020;
constexpr double kTransferErrMax = 0.10;
constexpr double kSavingsLow = 0.05;
constexpr double kSavingsHigh = 0.12;
constexpr double kMonotoneSlack = 1e-4;
constexpr double kBacktrackWeightSpread = 0.02;
constexpr double kWaitTableTol = 0.01;
constexpr double kFlowTol = 0.01;

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "[x] ") + what);
    }
};

std::ofstream report;

void emit(const std::string& line) {
    fmt::print("{}\n", line);
    std::fflush(stdout);
    if (report) report << line << '\n' << std::flush;
}

void print(int id, const std::string& title, const Verdict& v) {
    emit(fmt::format("criterion {}: {} {}", id, v.pass ? "PASS" : "FAIL", title));
    for (const auto& n : v.notes) emit("    " + n);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string pct(double v) { return fmt::format("{:.3f}%", 100.0 * v); }

ScenarioConfig make(Mode mode, double so, double el, double sl, double mu, double d) {
    ScenarioConfig c;
    c.mode = mode;
    c.origin_std_km = so;
    c.trip_mean_km = el;
    c.trip_std_km = sl;
    c.value_of_time = mu;
    c.demand_density = d;
    return c;
}

ScenarioConfig slice_case(Mode mode, double so, double el, double sl, double mu, double d) {
    auto c = make(mode, so, el, sl, mu, d);
    c.run_bound = false;
    c.run_exact = false;
    return c;
}

// Savings for a case that has a multi-line design to compare against; NaN otherwise.
double usable_savings(const CaseResult& r) {
    if (r.status != CaseStatus::ok || !r.multi_line_feasible) return std::nan("");
    return r.savings;
}

// Checks a sequence of savings (missing entries are NaN) for the requested direction.
bool monotone(const std::vector<double>& s, bool increasing, std::string& out) {
    bool ok = true;
    double last = std::nan("");
    for (double v : s) {
        out += std::isnan(v) ? " --" : fmt::format(" {:.2f}", 100.0 * v);
        if (std::isnan(v)) continue;
        if (!std::isnan(last)) ok &= increasing ? v >= last - kMonotoneSlack : v <= last + kMonotoneSlack;
        last = v;
    }
    return ok;
}

const CaseResult& find(const std::vector<CaseResult>& rs, const std::function<bool(const ScenarioConfig&)>& pick) {
    for (const auto& r : rs)
        if (pick(r.config)) return r;
    throw std::runtime_error("case missing from the result set");
}

Verdict gap_criterion(const std::vector<CaseResult>& rs, double slowest) {
    Verdict v;
    double sum = 0.0, worst = 0.0;
    int bounded = 0, indicative = 0, feasible = 0;
    std::string worst_id;
    for (const auto& r : rs) {
        if (r.status != CaseStatus::ok) continue;
        ++feasible;
        if (!std::isfinite(r.gap)) continue;
        ++bounded;
        sum += r.gap;
        if (r.gap_indicative) ++indicative;
        if (r.gap > worst) {
            worst = r.gap;
            worst_id = r.config.id();
        }
    }
    const double mean = bounded ? sum / bounded : INFINITY;
    v.check(bounded == feasible && bounded > 0, fmt::format("{} of {} feasible cases bounded", bounded, feasible));
    v.check(mean <= kGapMean, fmt::format("mean gap {} (limit {})", pct(mean), pct(kGapMean)));
    v.check(worst <= kGapMax, fmt::format("max gap {} at {} (limit {})", pct(worst), worst_id, pct(kGapMax)));
    v.notes.push_back(fmt::format("{} cases where the dropped backtracking term is negative", indicative));
    v.notes.push_back(fmt::format("slowest case {:.2f} s", slowest));
    return v;
}

Verdict accuracy_criterion(const std::vector<CaseResult>& rs) {
    Verdict v;
    std::map<std::string, std::vector<double>> rel;
    std::map<std::string, int> absolute;
    std::map<std::string, std::string> worst_id;
    for (const auto& r : rs) {
        for (const auto& e : r.errors) {
            if (e.absolute) {
                ++absolute[e.component];
                continue;
            }
            auto& list = rel[e.component];
            if (list.empty() || e.error > *std::max_element(list.begin(), list.end())) worst_id[e.component] = r.config.id();
            list.push_back(e.error);
        }
    }
    auto mean_of = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += e;
        return x.empty() ? 0.0 : s / x.size();
    };
    auto max_of = [](const std::vector<double>& x) { return x.empty() ? 0.0 : *std::max_element(x.begin(), x.end()); };
    const auto& gc = rel["GC"];
    v.check(!gc.empty(), fmt::format("{} cases evaluated exactly", gc.size()));
    v.check(mean_of(gc) <= kGcErrMean, fmt::format("GC error mean {} (limit {})", pct(mean_of(gc)), pct(kGcErrMean)));
    v.check(max_of(gc) <= kGcErrMax,
            fmt::format("GC error max {} at {} (limit {})", pct(max_of(gc)), worst_id["GC"], pct(kGcErrMax)));
    for (const char* k : {"AC_K", "AC_I"})
        v.check(max_of(rel[k]) == 0.0, fmt::format("{} error max {:.3g}", k, max_of(rel[k])));
    const auto& ut = rel["UT_t"];
    const int over = static_cast<int>(std::count_if(ut.begin(), ut.end(), [](double e) { return e > kTransferErrMax; }));
    v.check(max_of(ut) <= kTransferErrMax,
            fmt::format("UT_t error max {} at {} (limit {}), {} of {} cases over, mean {}", pct(max_of(ut)),
                        worst_id["UT_t"], pct(kTransferErrMax), over, ut.size(), pct(mean_of(ut))));
    for (const auto& [k, list] : rel)
        v.notes.push_back(fmt::format("{:<12} mean {:>9} max {:>9}{}", k, pct(mean_of(list)), pct(max_of(list)),
                                      absolute[k] ? fmt::format(" ({} absolute rows)", absolute[k]) : ""));
    return v;
}

Verdict savings_criterion(const std::vector<CaseResult>& sweep, const std::vector<CaseResult>& rail20,
                          const CaseResult& low_bus) {
    Verdict v;
    double best = -INFINITY;
    std::string best_id;
    for (const auto* set : {&sweep, &rail20})
        for (const auto& r : *set)
            if (r.status == CaseStatus::ok && std::isfinite(r.savings) && r.savings > best) {
                best = r.savings;
                best_id = r.config.id();
            }
    v.check(best >= kSavingsLow && best <= kSavingsHigh,
            fmt::format("max savings {} at {} (band {} to {})", pct(best), best_id, pct(kSavingsLow), pct(kSavingsHigh)));
    int positive = 0;
    std::string bad;
    for (const auto& r : rail20) {
        if (r.status == CaseStatus::ok && r.savings > 0.0) ++positive;
        else bad += " " + r.config.id();
    }
    v.check(positive == static_cast<int>(rail20.size()),
            fmt::format("{} of {} rail cells at value of time 20 save{}", positive, rail20.size(),
                        bad.empty() ? "" : ", not:" + bad));
    v.check(low_bus.status == CaseStatus::ok && low_bus.savings <= 0.0,
            fmt::format("low-demand bus cell {} savings {}", low_bus.config.id(), pct(low_bus.savings)));
    return v;
}

Verdict trend_criterion() {
    Verdict v;
    const std::vector<double> bus_d{37.5, 75.0, 150.0}, rail_d{250.0, 500.0, 1000.0};

    auto grid_slice = [&](const std::string& name, Mode mode, double so, const std::vector<double>& densities) {
        std::vector<ScenarioConfig> cases;
        for (double el : {8.0, 12.0})
            for (double sl : {2.0, 4.0})
                for (double d : densities) cases.push_back(slice_case(mode, so, el, sl, 20.0, d));
        const auto rs = run_sweep(cases);
        auto at = [&](double el, double sl, std::size_t k) {
            return usable_savings(find(rs, [&](const ScenarioConfig& c) {
                return c.trip_mean_km == el && c.trip_std_km == sl && c.demand_density == densities[k];
            }));
        };
        for (double el : {8.0, 12.0})
            for (double sl : {2.0, 4.0}) {
                std::vector<double> s;
                for (std::size_t k = 0; k < densities.size(); ++k) s.push_back(at(el, sl, k));
                std::string vals;
                const bool ok = monotone(s, true, vals);
                v.check(ok, fmt::format("{} E_l {:g} sd {:g}: savings % over density{}", name, el, sl, vals));
            }
        for (double sl : {2.0, 4.0})
            for (std::size_t k = 0; k < densities.size(); ++k) {
                std::string vals;
                const bool ok = monotone({at(8.0, sl, k), at(12.0, sl, k)}, true, vals);
                v.check(ok, fmt::format("{} sd {:g} density {:g}: savings % over E_l 8, 12{}", name, sl,
                                        densities[k], vals));
            }
    };
    grid_slice("bus, origin sd 8", Mode::bus, 8.0, bus_d);
    grid_slice("rail, origin sd 4", Mode::rail, 4.0, rail_d);

    auto sensitivity = [&](const std::string& name, const std::vector<double>& values,
                           const std::function<void(ScenarioConfig&, double)>& set) {
        for (double d : rail_d) {
            std::vector<ScenarioConfig> cases;
            for (double x : values) {
                auto c = slice_case(Mode::rail, 8.0, 12.0, 4.0, 20.0, d);
                set(c, x);
                cases.push_back(c);
            }
            std::vector<double> s;
            for (const auto& r : run_sweep(cases)) s.push_back(usable_savings(r));
            std::string vals;
            const bool ok = monotone(s, false, vals);
            v.check(ok, fmt::format("rail density {:g}: savings % over {}{}", d, name, vals));
        }
    };
    sensitivity("transfer penalty 1..2 min", {1.0, 1.25, 1.5, 1.75, 2.0},
                [](ScenarioConfig& c, double x) { c.transfer_penalty_min = x; });
    sensitivity("walk speed 2..8 km/h", {2.0, 4.0, 6.0, 8.0}, [](ScenarioConfig& c, double x) { c.walk_speed = x; });

    std::vector<ScenarioConfig> wb;
    for (double w : {1.0, 2.0, 3.0}) {
        auto c = slice_case(Mode::bus, 4.0, 8.0, 2.0, 20.0, 75.0);
        c.backtrack_weight = w;
        wb.push_back(c);
    }
    const auto wr = run_sweep(wb);
    const double s1 = usable_savings(wr[0]), s3 = usable_savings(wr[2]);
    v.check(std::fabs(s3 - s1) <= kBacktrackWeightSpread,
            fmt::format("bus backtrack weight 1 vs 3: savings {} vs {} (spread limit {})", pct(s1), pct(s3),
                        pct(kBacktrackWeightSpread)));
    return v;
}

Verdict property_criterion() {
    Verdict v;
    std::mt19937_64 rng(20240601);

    {
        const auto p = ParamSet::preset(Mode::bus, 20.0);
        double worst = 0.0;
        for (int trial = 0; trial < 24; ++trial) {
            const auto f = oracle::random_field(rng, 40, 40.0, 2.0);
            const auto d = oracle::random_design(rng, f, p, 6);
            const auto bt = backtrack_densities(f, d.profiles.spacing, d.profiles.bay_size, d.scalars.lines_cw,
                                                d.scalars.lines_ccw);
            const double model = wait_cost(f, d.scalars, d.profiles.bay_size, bt, p);
            const double table = oracle::table_wait(f, d.scalars, d.profiles.bay_size, bt);
            worst = std::max(worst, std::fabs(model - table) / table);
        }
        v.check(worst <= kWaitTableTol, fmt::format("wait cost vs trip-type double sum: worst {}", pct(worst)));
    }

    {
        auto c = make(Mode::bus, 4.0, 8.0, 2.0, 20.0, 75.0);
        const auto f = build_scenario_field(c);
        const auto p = c.params();
        DesignScalars sc;
        sc.lines_cw = 2;
        sc.lines_ccw = 3;
        sc.headway_cw = 0.06;
        sc.headway_ccw = 0.08;
        double worst = 0.0;
        for (int j : {5, 40, 66})
            for (int t : {1, 2, 4})
                for (double b : {0.0, 3.0}) {
                    const auto d = PointDemand::at(f, j);
                    const PointBacktrack bt{b, 0.5 * b};
                    const auto s = spacing_candidate(sc, t, d, bt, p);
                    const double brute = oracle::grid_argmin(
                        [&](double x) { return pointwise_cost(sc, x, t, d, bt, p); }, 1e-4, 3.0, 1e-4);
                    worst = std::max(worst, s ? std::fabs(*s - brute) : INFINITY);
                }
        v.check(worst <= 1e-4, fmt::format("spacing rule vs brute-force argmin: worst {:.2g} km (grid 1e-4)", worst));
    }

    {
        const auto c = make(Mode::rail, 4.0, 12.0, 4.0, 20.0, 1000.0);
        const auto f = build_scenario_field(c);
        const auto p = c.params();
        DesignScalars sc;
        sc.lines_cw = 3;
        sc.lines_ccw = 2;
        sc.headway_cw = 0.04;
        sc.headway_ccw = 0.05;
        const auto r = stage1(f, sc, p, SolverSettings{});
        double worst = 0.0;
        for (Direction dir : {Direction::cw, Direction::ccw}) {
            const auto h = headway_candidate(dir, sc.lines(dir), r.profiles, r.backtrack, f, p);
            const double brute = oracle::grid_argmin(
                [&](double x) {
                    auto s = sc;
                    (dir == Direction::cw ? s.headway_cw : s.headway_ccw) = x;
                    return generalized_cost(f, s, r.profiles, r.backtrack, p).total;
                },
                0.005, 0.3, 1e-5);
            worst = std::max(worst, h ? std::fabs(*h - brute) : INFINITY);
        }
        v.check(worst <= 1e-5, fmt::format("headway rule vs brute-force argmin: worst {:.2g} h (grid 1e-5)", worst));
    }

    {
        double worst = 0.0;
        for (double el : {8.0, 12.0})
            for (double sl : {2.0, 4.0}) {
                const auto c = make(Mode::bus, kUniformOrigins, el, sl, 20.0, 37.5);
                const auto f = build_scenario_field(c);
                const double expected = f.total(Direction::cw) * el / 40.0;
                for (Direction dir : {Direction::cw, Direction::ccw})
                    for (double x : f.flow(dir)) worst = std::max(worst, std::fabs(x - expected) / expected);
            }
        v.check(worst <= kFlowTol, fmt::format("through flow vs demand x mean length / loop: worst {}", pct(worst)));
    }

    {
        int violations = 0, checked = 0;
        for (const auto& c : {make(Mode::bus, kUniformOrigins, 12.0, 4.0, 10.0, 150.0),
                              make(Mode::bus, kUniformOrigins, 8.0, 2.0, 5.0, 75.0),
                              make(Mode::rail, kUniformOrigins, 8.0, 2.0, 5.0, 500.0),
                              make(Mode::rail, kUniformOrigins, 12.0, 4.0, 10.0, 1000.0)}) {
            const auto f = build_scenario_field(c);
            const auto p = c.params();
            const auto lb = lb_solve(f, p, c.bound);
            for (int trial = 0; trial < 50; ++trial) {
                const auto d = oracle::random_design(rng, f, p, 10);
                ++checked;
                if (!lb.feasible || lb.value > generalized_cost(f, d.scalars, d.profiles, p).total) ++violations;
            }
        }
        v.check(violations == 0, fmt::format("lower bound below {} random feasible designs: {} violations", checked,
                                             violations));
    }

    {
        const Corridor corridor(40.0, 80);
        std::uniform_int_distribution<int> lines(1, 4), bay(1, 12);
        int bad = 0, bays = 0;
        for (int trial = 0; trial < 40; ++trial) {
            DesignProfiles pr;
            pr.spacing = oracle::random_smooth(rng, 80, 0.3 + 0.02 * trial, 0.5);
            for (double t : oracle::random_smooth(rng, 80, bay(rng), 0.6))
                pr.bay_size.push_back(std::max(1, static_cast<int>(std::lround(t))));
            const int m_cw = lines(rng), m_ccw = lines(rng);
            const auto plan = generate_stop_plan(corridor, pr, m_cw, m_ccw);
            const int lcm = std::lcm(m_cw, m_ccw);
            for (int k = 0; k < plan.transfer_count(); ++k, ++bays)
                if ((plan.bay_stops(k) - 1) % lcm != 0) ++bad;
        }
        v.check(bad == 0, fmt::format("bay stop counts are 1 + multiple of lcm(m): {} of {} bays violate", bad, bays));
    }

    {
        const Corridor corridor(40.0, 80);
        std::string counts;
        bool ok = true;
        for (double s : {0.25, 0.4, 0.5, 0.8, 1.0, 2.0, 4.0}) {
            const auto plan = generate_stop_plan(corridor, DesignProfiles::uniform(80, s, 1), 1, 1);
            const int expected = static_cast<int>(std::lround(40.0 / s));
            ok &= plan.stop_count() == expected;
            counts += fmt::format(" {}/{}", plan.stop_count(), expected);
        }
        v.check(ok, "uniform spacing gives L/s stops:" + counts);
    }
    return v;
}

Verdict determinism_criterion(const fs::path& a, const fs::path& b) {
    Verdict v;
    int files = 0, differ = 0;
    std::string first;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        const auto other = b / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
            ++differ;
            if (first.empty()) first = e.path().filename().string();
        }
    }
    int b_files = 0;
    for (const auto& e : fs::directory_iterator(b))
        if (e.path().extension() == ".csv") ++b_files;
    v.check(files > 0 && files == b_files, fmt::format("{} and {} CSV files written", files, b_files));
    v.check(differ == 0, fmt::format("{} files differ{}", differ, first.empty() ? "" : " (first: " + first + ")"));
    return v;
}

} // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "skipstop_acceptance";
    bool strict = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--work") == 0 && i + 1 < argc) work = argv[++i];
        else if (std::strcmp(argv[i], "--strict") == 0) strict = true;
        else {
            fmt::print(stderr, "usage: {} [--work DIR] [--strict]\n", argv[0]);
            return 2;
        }
    }
    spdlog::set_level(spdlog::level::err);

    try {
        fs::remove_all(work);
        const fs::path run1 = work / "sweep_a", run2 = work / "sweep_b";
        fs::create_directories(run1);
        fs::create_directories(run2);
        report.open(work / "acceptance_report.txt");

        const auto cases = SweepGrid{}.expand();
        const auto t0 = std::chrono::steady_clock::now();
        const auto sweep = run_sweep(cases);
        const double sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit_reports(sweep, run1);
        double slowest = 0.0;
        for (const auto& r : sweep) slowest = std::max(slowest, r.preprocess_seconds + r.solve_seconds);
        emit(fmt::format("sweep: {} cases in {:.1f} s", cases.size(), sweep_seconds));

        std::vector<Verdict> verdicts;
        std::vector<std::string> titles{"optimality gap against the lower bound",
                                        "continuous model against exact plan evaluation",
                                        "savings magnitude",
                                        "monotone savings trends",
                                        "property suite",
                                        "determinism of sweep outputs"};

        verdicts.push_back(gap_criterion(sweep, slowest));
        print(1, titles[0], verdicts.back());
        verdicts.push_back(accuracy_criterion(sweep));
        print(2, titles[1], verdicts.back());

        std::vector<ScenarioConfig> rail20;
        for (double so : {8.0, 4.0})
            for (double el : {8.0, 12.0})
                for (double sl : {2.0, 4.0})
                    for (double d : {250.0, 500.0, 1000.0}) rail20.push_back(slice_case(Mode::rail, so, el, sl, 20.0, d));
        const auto rail20_results = run_sweep(rail20);
        const auto low_bus = run_case(slice_case(Mode::bus, 8.0, 8.0, 2.0, 20.0, 37.5));
        verdicts.push_back(savings_criterion(sweep, rail20_results, low_bus));
        print(3, titles[2], verdicts.back());

        verdicts.push_back(trend_criterion());
        print(4, titles[3], verdicts.back());

        verdicts.push_back(property_criterion());
        print(5, titles[4], verdicts.back());

        emit_reports(run_sweep(cases), run2);
        verdicts.push_back(determinism_criterion(run1, run2));
        print(6, titles[5], verdicts.back());

        const int failed = static_cast<int>(std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
            return !v.pass;
        }));
        emit(fmt::format("acceptance: {} of {} criteria pass", verdicts.size() - failed, verdicts.size()));
        return strict && failed > 0 ? 1 : 0;
    } catch (const std::exception& e) {
        fmt::print(stderr, "acceptance harness error: {}\n", e.what());
        return 3;
    }
}
