#include <benchmark/benchmark.h>
#include <omp.h>

#include "skipstop/experiment.hpp"

using namespace skipstop;

namespace {

ScenarioConfig busy_rail() {
    ScenarioConfig c;
    c.mode = Mode::rail;
    c.origin_std_km = 4.0;
    c.trip_mean_km = 12.0;
    c.trip_std_km = 4.0;
    c.value_of_time = 20.0;
    c.demand_density = 1000.0;
    return c;
}

DesignScalars two_by_three() {
    DesignScalars s;
    s.lines_cw = 2;
    s.lines_ccw = 3;
    s.headway_cw = 0.05;
    s.headway_ccw = 0.05;
    return s;
}

// Argument 0 runs the serial reference, otherwise the OpenMP kernel with that many threads.
void set_threads(const benchmark::State& state) {
    if (state.range(0) > 0) omp_set_num_threads(static_cast<int>(state.range(0)));
}

void BM_Aggregates(benchmark::State& state) {
    const auto f = build_scenario_field(busy_rail());
    set_threads(state);
    for (auto _ : state) {
        if (state.range(0) == 0) benchmark::DoNotOptimize(reference::compute_aggregates(f.lambda_matrix(), f.corridor()));
        else benchmark::DoNotOptimize(compute_aggregates(f.lambda_matrix(), f.corridor()));
    }
}

void BM_StageOne(benchmark::State& state) {
    const auto c = busy_rail();
    const auto f = build_scenario_field(c);
    const auto p = c.params();
    set_threads(state);
    for (auto _ : state) {
        if (state.range(0) == 0) benchmark::DoNotOptimize(reference::stage1(f, two_by_three(), p, c.solver));
        else benchmark::DoNotOptimize(stage1(f, two_by_three(), p, c.solver));
    }
}

void BM_LowerBound(benchmark::State& state) {
    const auto c = busy_rail();
    const auto f = build_scenario_field(c);
    const auto p = c.params();
    set_threads(state);
    for (auto _ : state) {
        if (state.range(0) == 0) benchmark::DoNotOptimize(reference::lb_solve(f, p, c.bound));
        else benchmark::DoNotOptimize(lb_solve(f, p, c.bound));
    }
}

void thread_args(benchmark::internal::Benchmark* b) {
    b->Arg(0);
    for (int t = 1; t <= omp_get_num_procs(); t *= 2) b->Arg(t);
    b->ArgName("threads")->Unit(benchmark::kMillisecond);
}

} // namespace

BENCHMARK(BM_Aggregates)->Apply(thread_args);
BENCHMARK(BM_StageOne)->Apply(thread_args);
BENCHMARK(BM_LowerBound)->Apply(thread_args);

BENCHMARK_MAIN();
