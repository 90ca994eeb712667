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

#ifndef DPREG_EVALUATION_HPP_
#define DPREG_EVALUATION_HPP_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dpreg/dataset.hpp"
#include "dpreg/mechanism.hpp"
#include "dpreg/projection.hpp"
#include "dpreg/regression.hpp"
#include "dpreg/rng.hpp"

namespace dpreg {

/// Spearman's rank correlation with average ranks for ties. Constant
/// vectors are an error, never silently rho = 0.
double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class MethodVariant {
  nonprivate_lr,
  private_lr_noproj,
  robust_private_lr,
  input_perturbation_gaussian_mean,
};

std::string variant_name(MethodVariant v);
MethodVariant variant_from_name(const std::string& name);

/// One line in a comparison: the pipeline tag plus the flag selecting
/// which of the two non-private lines `nonprivate_lr` draws (baseline on
/// the non-private points only, or pooled with the private data as clean).
struct VariantConfig {
  MethodVariant tag = MethodVariant::robust_private_lr;
  bool pool_private_as_clean = false;

  std::string label() const;
};

/// Shared pipeline parameters for the regression variants.
struct PipelineConfig {
  PrivacyBudget budget{2.0, 0.35, 0.60, 0.05};
  ThresholdMultipliers multipliers{1.0, 1.0};
  // When set, overrides the data-derived thresholds (avoids the sigma leak).
  std::optional<Bounds> fixed_bounds;
  FixedPrecisionPrior prior;
  bool gibbs_fit = false;
  GammaHyperPrior hyper;
  GibbsConfig gibbs;
};

/// Per-column affine map of the private data onto [-b, b]: the
/// standard-practice comparator that projection replaces. Constant columns
/// map to 0.
Dataset minmax_rescale(const Dataset& d, const Bounds& bounds);

/// Runs one method variant end to end and returns test predictions.
///   robust_private_lr: project private -> stats -> perturb -> combine with
///     exact non-private stats -> posterior -> predict.
///   private_lr_noproj: minmax-rescale private into the same bounds, then
///     the same release pipeline.
///   nonprivate_lr: exact statistics, non-private points only or pooled
///     with the private data per `pool_private_as_clean`.
/// An empty private set degrades every private variant to the non-private
/// baseline: there is nothing to release.
Eigen::VectorXd run_variant(const Dataset& nonprivate, const Dataset& priv,
                            const Eigen::MatrixXd& test_inputs,
                            const VariantConfig& variant,
                            const PipelineConfig& pipeline, RngStream& rng);

/// Synthetic source: fresh draw from the auxiliary generative model each
/// repeat (one beta per dataset).
struct SyntheticSource {
  int d = 10;
  std::size_t n_private = 800;
  std::size_t n_nonprivate = 10;
  std::size_t n_test = 100;
  double lambda = 1.0;
  double lambda0 = 1.0;
};

/// Fixed-dataset source: a fresh seeded split each repeat, with train-fitted
/// preprocessing applied to the test portion when `preprocess` is set.
struct DatasetSource {
  Dataset data;
  std::size_t n_test = 100;
  std::size_t n_nonprivate = 30;
  std::optional<std::size_t> n_private;  // cap; default: all remaining rows
  bool preprocess = true;
};

using DataSource = std::variant<SyntheticSource, DatasetSource>;

struct VariantSummary {
  std::string label;
  std::vector<double> rhos;  // one per repeat
  double mean = 0.0;
  std::optional<double> stddev;  // absent when repeats == 1
};

struct ExperimentResult {
  std::vector<VariantSummary> variants;
  std::size_t repeats = 0;
};

struct CvConfig {
  std::size_t repeats = 50;
  std::vector<VariantConfig> variants;
  PipelineConfig pipeline;
  std::uint64_t root_seed = 0;
};

/// Monte Carlo cross-validation: per repeat a fresh split (or fresh
/// synthetic draw), every variant run on it, Spearman rho on the test
/// portion. A failing repeat aborts with its index.
ExperimentResult monte_carlo_cv(const DataSource& source, const CvConfig& cfg);

enum class ConvergenceMechanism {
  gaussian_mean_suffstat,
  gaussian_mean_input_perturbation,
  linreg_suffstat,
};

std::string convergence_mechanism_name(ConvergenceMechanism m);
ConvergenceMechanism convergence_mechanism_from_name(const std::string& name);

/// Convergence-rate experiment: for each n one fixed synthetic dataset,
/// `seeds_per_n` noise realisations, quantiles of ||mu_DP - mu_NP||_1 and
/// the least-squares slope of log median error against log n.
struct ConvergenceConfig {
  ConvergenceMechanism mechanism = ConvergenceMechanism::gaussian_mean_suffstat;
  std::vector<std::size_t> n_grid = {1000, 10000, 100000, 1000000};
  std::size_t seeds_per_n = 200;
  int d = 1;
  double epsilon = 1.0;
  double l1_bound = 1.0;
  // Off-centre data makes the estimand non-trivial; the input-perturbation
  // baseline's non-vanishing bias only shows away from the clip centre.
  double data_mean = 1.0;
  // Linear-regression mechanism settings.
  Bounds lr_bounds{1.0, 1.0};
  PrivacyBudget lr_budget{1.0, 0.45, 0.45, 0.10};
  FixedPrecisionPrior prior;
  std::uint64_t root_seed = 0;
};

struct ConvergenceRow {
  std::size_t n;
  double q05, q25, q50, q75, q95;
  double mean;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;      // of log(median) vs log(n)
  double intercept = 0.0;
};

ConvergenceResult convergence_experiment(const ConvergenceConfig& cfg);

/// Cartesian sweep over (d, n_private, n_nonprivate, epsilon); each cell is
/// one monte_carlo_cv run. The first nonprivate_lr baseline variant (if
/// present) anchors the per-repeat relative improvement of the others.
struct SweepAxes {
  std::vector<int> d = {10};
  std::vector<std::size_t> n_private = {800};
  std::vector<std::size_t> n_nonprivate = {10};
  std::vector<double> epsilon = {2.0};
};

struct SweepCell {
  int d;
  std::size_t n_private;
  std::size_t n_nonprivate;
  double epsilon;
  ExperimentResult result;
  // label -> mean over repeats of (rho_variant - rho_baseline); empty when
  // no baseline variant is present.
  std::vector<std::pair<std::string, double>> improvement;
};

std::vector<SweepCell> sweep(const SweepAxes& axes, const CvConfig& base,
                             const SyntheticSource& proto);

}  // namespace dpreg

#endif  // DPREG_EVALUATION_HPP_
