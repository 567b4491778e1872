#include <benchmark/benchmark.h>

#include "tailtest/calibration.hpp"
#include "tailtest/distributions.hpp"
#include "tailtest/mixture.hpp"
#include "tailtest/procedures.hpp"
#include "tailtest/statistics.hpp"
#include "tailtest/studies.hpp"

using namespace tailtest;

namespace {

OrderedSample exp_sample(std::size_t n, std::uint64_t seed = 7) {
  RngStream rng(seed);
  return sample(ExponentialParams{}, n, rng);
}

}  // namespace

// One statistic evaluation; arg 0 picks the kind, arg 1 the sample size.
static void BM_Statistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  const StatisticSpec specs[] = {StatisticSpec::ss(5),   StatisticSpec::srs(5, 5), StatisticSpec::ms(1),
                                 StatisticSpec::mrs(1, 5), StatisticSpec::dixon(1), StatisticSpec::dk(5)};
  const StatisticSpec spec = specs[state.range(0)];
  const auto s = exp_sample(n);
  for (auto _ : state) benchmark::DoNotOptimize(compute_statistic(spec, s));
  state.SetLabel(spec.label());
}
BENCHMARK(BM_Statistic)->ArgsProduct({{0, 1, 2, 3, 4, 5}, {50, 1000}});

static void BM_NullTableBuild(benchmark::State& state) {
  const auto replicates = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_null_table(StatisticSpec::mrs(1, 10), 50, replicates, 1, 1));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(replicates));
}
BENCHMARK(BM_NullTableBuild)->Arg(5'000)->Arg(50'000)->Unit(benchmark::kMillisecond);

static void BM_PValueLookup(benchmark::State& state) {
  const auto table = build_null_table(StatisticSpec::ss(3), 30, 50'000, 1, 1);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p_value(table, x));
    x = x < 0.5 ? x + 1e-4 : 0.1;
  }
}
BENCHMARK(BM_PValueLookup);

static void BM_EmFit(benchmark::State& state) {
  RngStream rng(11);
  const auto s = generate_scenario(ScenarioSpec::clustered(static_cast<std::size_t>(state.range(0)), 5, 5.0), rng).sample;
  for (auto _ : state) benchmark::DoNotOptimize(fit_mixture(s));
}
BENCHMARK(BM_EmFit)->Arg(30)->Arg(50)->Arg(500)->Unit(benchmark::kMicrosecond);

static void BM_InwardTest(benchmark::State& state) {
  TableStore tables;
  const auto s = exp_sample(50);
  inward_test(s, StatisticKind::max_robust_sum, 10, 0.1, tables);  // warm the table cache
  for (auto _ : state) benchmark::DoNotOptimize(inward_test(s, StatisticKind::max_robust_sum, 10, 0.1, tables));
}
BENCHMARK(BM_InwardTest)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
