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

#ifndef DPREG_TUNING_HPP_
#define DPREG_TUNING_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dpreg/dataset.hpp"
#include "dpreg/mechanism.hpp"
#include "dpreg/projection.hpp"
#include "dpreg/regression.hpp"
#include "dpreg/rng.hpp"

namespace dpreg {

/// Parameters for tuning on auxiliary synthetic data. Tuning never touches
/// real private data: its inputs are counts and hyperparameters only.
struct TuningConfig {
  std::size_t n_aux = 500;
  int d = 10;
  double epsilon = 2.0;
  std::size_t n_datasets = 5;
  std::size_t n_noise = 5;
  double lambda = 1.0;
  double lambda0 = 1.0;
};

/// Draws one dataset from the auxiliary generative model:
/// beta ~ N(0, lambda0^-1 I), x_i ~ N(0, I_d),
/// y_i | x_i ~ N(x_i^T beta, lambda^-1). The sampled beta is not recorded:
/// tuning must not peek at it.
Dataset generate_auxiliary(std::size_t n, int d, double lambda, double lambda0,
                           RngStream& rng);

/// Search grid for the budget split: triples from {0.05, 0.10, ..., 0.90}
/// summing to one. The posterior mean is linear in the xy statistic, so
/// splits starving it below 0.15 are never competitive and are pruned from
/// the search; the pruned grid has exactly 136 members. Deterministic
/// lexicographic order.
std::vector<std::array<double, 3>> budget_split_grid();

/// The 400 threshold-multiplier pairs {0.1, 0.2, ..., 2.0}^2.
std::vector<ThresholdMultipliers> threshold_multiplier_grid();

struct ThresholdSearchOptions {
  // Evaluate every stride-th omega on each axis (1 = the full 20x20 grid).
  std::size_t grid_stride = 1;
};

struct ThresholdSearchResult {
  ThresholdMultipliers best{1.0, 1.0};
  std::vector<double> grid;  // evaluated omega values, both axes
  Eigen::MatrixXd scores;    // mean Spearman rho per (omega_x, omega_y)
};

/// Grid search for the projection thresholds under a fixed budget split.
/// Per pair: bounds from the auxiliary data's dispersion, project, perturb,
/// fixed-precision fit (lambda = lambda0 = 1), score by in-sample Spearman
/// rho against the original targets, average over
/// n_datasets x n_noise replicates. Ties break to smaller omega_x, then
/// smaller omega_y.
ThresholdSearchResult tune_thresholds(const TuningConfig& cfg,
                                      const std::array<double, 3>& split,
                                      std::uint64_t root_seed,
                                      const ThresholdSearchOptions& opts = {});

struct SplitSearchOptions {
  // Replicates and omega-grid stride for the per-split threshold search.
  std::size_t inner_datasets = 5;
  std::size_t inner_noise = 5;
  std::size_t inner_stride = 1;
  // Score each split with the hierarchical (Gibbs) fit; switch off to use
  // the fixed-precision fit everywhere for speed.
  bool gibbs_scoring = true;
  GammaHyperPrior hyper;
  GibbsConfig gibbs;
};

struct SplitScore {
  std::array<double, 3> split;
  ThresholdMultipliers thresholds{1.0, 1.0};  // best pair for this split
  double score = 0.0;
};

struct SplitSearchResult {
  std::array<double, 3> best{};
  ThresholdMultipliers best_thresholds{1.0, 1.0};
  std::vector<SplitScore> scores;  // grid order
};

/// Exhaustive search over the budget-split grid. For each split the
/// threshold grid is re-run at the reduced inner replicate counts, then the
/// split is scored at its own best thresholds over
/// n_datasets x n_noise replicates. Auxiliary datasets and unit noise are
/// shared across splits (common random numbers), so the comparison is
/// paired. Ties break to larger p2, then larger p1.
SplitSearchResult tune_budget_split(const TuningConfig& cfg,
                                    std::uint64_t root_seed,
                                    const SplitSearchOptions& opts = {});

}  // namespace dpreg

#endif  // DPREG_TUNING_HPP_
