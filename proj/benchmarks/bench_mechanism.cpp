// Copyright 2026 The dpreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "dpreg/mechanism.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/stats.hpp"
#include "dpreg/tuning.hpp"

namespace {

void BM_LaplaceSample(benchmark::State& state) {
  dpreg::RngStream rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.next_laplace(1.0);
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_LaplaceSample);

void BM_SufficientStats(benchmark::State& state) {
  dpreg::RngStream rng(2, 0);
  const auto data = dpreg::generate_auxiliary(
      static_cast<std::size_t>(state.range(0)), 10, 1.0, 1.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpreg::sufficient_stats(data));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SufficientStats)->RangeMultiplier(4)->Range(256, 65536)
    ->Complexity(benchmark::oN);

void BM_PerturbStats(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  dpreg::RngStream rng(3, 0);
  const auto data = dpreg::generate_auxiliary(200, d, 1.0, 1.0, rng);
  const dpreg::Bounds bounds(1.0, 1.0);
  const auto clean =
      dpreg::sufficient_stats(dpreg::project_dataset(data, bounds));
  const dpreg::PrivacyBudget budget(2.0, 0.35, 0.60, 0.05);
  dpreg::RngStream noise(3, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dpreg::perturb_stats(clean, bounds, budget, noise));
  }
}
BENCHMARK(BM_PerturbStats)->Arg(5)->Arg(10)->Arg(25)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
