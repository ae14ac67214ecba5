#include <circmode/circmode.hpp>

#include <benchmark/benchmark.h>

using namespace circmode;

namespace {

AngleSample sample(const char* model, std::size_t n)
{
  RngStream rng(7, n);
  return zoo_model(model).model.sample(n, rng);
}

void BM_CountModes(benchmark::State& state)
{
  const KdeSpec spec(sample("M6", static_cast<std::size_t>(state.range(0))), 0.2);
  for (auto _ : state)
    benchmark::DoNotOptimize(count_modes(spec).count);
}
BENCHMARK(BM_CountModes)->Arg(100)->Arg(1000)->Arg(10000);

void BM_LogCv(benchmark::State& state)
{
  const AngleSample s = sample("M6", static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(log_cv_pseudo_likelihood(s, 0.3));
}
BENCHMARK(BM_LogCv)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CriticalBandwidth(benchmark::State& state)
{
  const AngleSample s = sample("M11", static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(critical_bandwidth(s, 1).h_k);
}
BENCHMARK(BM_CriticalBandwidth)->Arg(100)->Arg(500)->Arg(1000);

void BM_DkStatistic(benchmark::State& state)
{
  const AngleSample s = sample("M6", static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(dk_statistic(s, 1).d);
}
BENCHMARK(BM_DkStatistic)->Arg(100)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DeltaStatistic(benchmark::State& state)
{
  const AngleSample s = sample("M6", static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(delta_statistic(s, 1).delta);
}
BENCHMARK(BM_DeltaStatistic)->Arg(100)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RunTest(benchmark::State& state)
{
  const AngleSample s = sample("M1", 100);
  TestOptions o;
  o.B = static_cast<std::size_t>(state.range(0));
  o.seed = 3;
  o.workers = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_test(s, o).p_value);
}
BENCHMARK(BM_RunTest)->Arg(50)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
