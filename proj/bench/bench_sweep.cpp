// SPDX-License-Identifier: Apache-2.0
//
// Serial reference sweep vs the OpenMP sweep on the same small config.
#include <benchmark/benchmark.h>

#include "mimo_ae/evaluation.hpp"

namespace {

mimo_ae::SweepConfig bench_config(bool with_ae) {
  mimo_ae::SweepConfig c;
  c.snr_db = {0, 10, 20};
  c.n_blocks = 8;
  c.ae.hyper.max_epochs = 100;
  c.scenarios = {mimo_ae::Scenario::full_bw(), mimo_ae::Scenario::array_reduced(4),
                 mimo_ae::Scenario::admm(4)};
  if (with_ae) c.scenarios.push_back(mimo_ae::Scenario::ae(8));
  return c;
}

void BM_SweepSerial(benchmark::State& st) {
  const auto cfg = bench_config(st.range(0) != 0);
  for (auto _ : st) benchmark::DoNotOptimize(mimo_ae::sweep_serial(cfg));
}

void BM_SweepOpenMP(benchmark::State& st) {
  auto cfg = bench_config(st.range(0) != 0);
  cfg.threads = static_cast<int>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(mimo_ae::sweep(cfg));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOpenMP)
    ->ArgsProduct({{0, 1}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
