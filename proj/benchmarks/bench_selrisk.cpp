#include <benchmark/benchmark.h>

#include <vector>

#include "selrisk/fdr_curve.hpp"
#include "selrisk/fixed_point.hpp"
#include "selrisk/framework.hpp"
#include "selrisk/normal.hpp"
#include "selrisk/permtest.hpp"
#include "selrisk/rng.hpp"

using namespace selrisk;

namespace {

std::vector<double> random_pvalues(std::size_t m, std::uint64_t seed) {
    CounterRng rng(derive_stream(seed, 0xb1));
    std::vector<double> p(m);
    for (auto& v : p) v = rng.next_uniform() * (rng.next_u64() % 4 ? 1.0 : 0.05);
    return p;
}

void BM_normal_quantile(benchmark::State& state) {
    CounterRng rng(derive_stream(1, 0xb2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(normal_quantile(rng.next_uniform()));
    }
}
BENCHMARK(BM_normal_quantile);

void BM_bh_step_up(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    const PValueVector p(random_pvalues(m, 2));
    const RiskLevel q(0.1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bh_step_up(p, q));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_bh_step_up)->Range(64, 65536)->Complexity(benchmark::oNLogN);

void BM_by_iterate(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    const auto p = random_pvalues(m, 3);
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = normal_quantile(p[i]);
    const ZScoreVector z(x);
    const RiskLevel q(0.1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(by_iterate(z, q));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_by_iterate)->Range(64, 16384)->Complexity();

void BM_run_extra_selection_threshold(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    StrategyPair pair = threshold_identity_pair(PValueVector(random_pvalues(m, 4)),
                                                RiskLevel(0.1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_extra_selection(pair, SelectionMask::full(m)));
    }
}
BENCHMARK(BM_run_extra_selection_threshold)->Range(64, 4096);

void BM_improved_curve_gaussian(benchmark::State& state) {
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) grid[i] = -2.5 + 4.0 * i / 100.0;
    const std::vector<CurveAnchor> anchors = {
        {-1.5, 0.5}, {-1.0, 0.3}, {-0.5, 0.2}, {0.0, 0.1}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(improved_curve_gaussian(anchors, TaskCount(1000), grid));
    }
}
BENCHMARK(BM_improved_curve_gaussian);

void BM_accelerated_perm_bh(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    const RiskLevel q(0.2);
    const BudgetSchedule schedule(q, 0.2, 0.3, TaskCount(m));
    for (auto _ : state) {
        state.PauseTiming();
        std::vector<PermutationTask> tasks;
        tasks.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            CounterRng rng(derive_stream(5, 0xb3, i));
            std::vector<double> a(5), b(5);
            for (auto& v : a) v = rng.next_normal() + (i % 5 == 0 ? 3.0 : 0.0);
            for (auto& v : b) v = rng.next_normal();
            tasks.push_back(make_two_sample_task(std::move(a), std::move(b),
                                                 two_sample_meandiff));
        }
        state.ResumeTiming();
        benchmark::DoNotOptimize(
            run_accelerated_bh(tasks, two_sample_meandiff, q, schedule, 99));
    }
}
BENCHMARK(BM_accelerated_perm_bh)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
