#include "nilflow/flows.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

namespace {

std::vector<double> grid(int count) {
  std::vector<double> a;
  for (int k = 0; k < count; ++k) a.push_back(0.25 * k);
  return a;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto a = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nilflow::tmin_sweep_serial(a, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.size()));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto a = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nilflow::tmin_sweep(a, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.size()));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
