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

#include "dpreg/evaluation.hpp"
#include "dpreg/regression.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/tuning.hpp"

namespace {

void BM_PosteriorFixed(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  dpreg::RngStream rng(4, 0);
  const auto data = dpreg::generate_auxiliary(500, d, 1.0, 1.0, rng);
  const auto stats = dpreg::sufficient_stats(data);
  const dpreg::FixedPrecisionPrior prior{1.0, 1.0, {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpreg::posterior_fixed(stats, prior));
  }
}
BENCHMARK(BM_PosteriorFixed)->Arg(5)->Arg(10)->Arg(25)->Arg(64);

void BM_PosteriorFixedRepair(benchmark::State& state) {
  // Noisy statistics take the eigenvalue-clamp path.
  const int d = static_cast<int>(state.range(0));
  dpreg::RngStream rng(5, 0);
  const auto data = dpreg::generate_auxiliary(500, d, 1.0, 1.0, rng);
  const dpreg::Bounds bounds(1.0, 1.0);
  dpreg::RngStream noise(5, 1);
  const auto stats = dpreg::perturb_stats(
      dpreg::sufficient_stats(dpreg::project_dataset(data, bounds)), bounds,
      dpreg::PrivacyBudget(0.1, 0.35, 0.60, 0.05), noise);
  const dpreg::FixedPrecisionPrior prior{1.0, 1.0, {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpreg::posterior_fixed(stats, prior));
  }
}
BENCHMARK(BM_PosteriorFixedRepair)->Arg(10)->Arg(64);

void BM_GibbsPosterior(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  dpreg::RngStream rng(6, 0);
  const auto data = dpreg::generate_auxiliary(500, d, 1.0, 1.0, rng);
  const auto stats = dpreg::sufficient_stats(data);
  const dpreg::GibbsConfig cfg{1000, 200};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    dpreg::RngStream chain(6, ++stream);
    benchmark::DoNotOptimize(
        dpreg::gibbs_posterior(stats, dpreg::GammaHyperPrior{}, cfg, chain));
  }
}
BENCHMARK(BM_GibbsPosterior)->Arg(5)->Arg(10)->Arg(25);

void BM_SpearmanRho(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  dpreg::RngStream rng(7, 0);
  Eigen::VectorXd a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i) = rng.next_normal();
    b(i) = rng.next_normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpreg::spearman_rho(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpearmanRho)->RangeMultiplier(4)->Range(256, 65536)
    ->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
