#include <benchmark/benchmark.h>

#include "condquant/dynamic.hpp"
#include "condquant/random.hpp"

using namespace condquant;

namespace {

RiskSpec example_spec() { return {1.0 / 3.0, LossFunction::quadratic(), LossFunction::exp_integral(1.0, 1.0)}; }

Distribution random_distribution(std::size_t n) {
  InstanceGenerator gen(1, n);
  const SpacePtr space = gen.space(n, n);
  const RandomVariable x = gen.variable(n, 5.0);
  return conditional_distribution(x, Partition::trivial(space), 0);
}

void BM_StaticQuantile(benchmark::State& state) {
  const Distribution d = random_distribution(static_cast<std::size_t>(state.range(0)));
  const RiskSpec spec = example_spec();
  for (auto _ : state) benchmark::DoNotOptimize(static_generalized_quantile(d, spec));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StaticQuantile)->RangeMultiplier(4)->Range(2, 512)->Complexity();

void BM_StaticShortfallEntropic(benchmark::State& state) {
  const Distribution d = random_distribution(static_cast<std::size_t>(state.range(0)));
  const ScoreFunction v = ScoreFunction::entropic(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(static_shortfall(d, v));
}
BENCHMARK(BM_StaticShortfallEntropic)->RangeMultiplier(4)->Range(2, 512);

void BM_ConditionalQuantile(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  InstanceGenerator gen(2, n);
  const SpacePtr space = gen.space(n, n);
  const Partition g = gen.partition(space);
  const RandomVariable x = gen.variable(n, 5.0);
  const RiskSpec spec = RiskSpec::power(0.4, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(conditional_generalized_quantile(x, g, spec));
}
BENCHMARK(BM_ConditionalQuantile)->RangeMultiplier(4)->Range(4, 1024);

void BM_DynamicEvaluate(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  InstanceGenerator gen(3, n);
  const SpacePtr space = gen.space(n, n);
  const DynamicRiskMeasure drm(gen.filtration(space), ConditionalRiskMeasure::quantile(RiskSpec::expectile(0.8)));
  const RandomVariable x = gen.variable(n, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(drm.evaluate(x));
}
BENCHMARK(BM_DynamicEvaluate)->RangeMultiplier(4)->Range(4, 256);

void BM_TowerSuite(benchmark::State& state) {
  const auto m = ConditionalRiskMeasure::quantile(RiskSpec::expectile(0.8));
  SuiteOptions o;
  o.trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_tower_property(m, o));
}
BENCHMARK(BM_TowerSuite)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
