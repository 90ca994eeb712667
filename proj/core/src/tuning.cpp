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

#include "dpreg/tuning.hpp"

#include <cmath>
#include <stdexcept>

#include "dpreg/evaluation.hpp"
#include "dpreg/stats.hpp"

namespace dpreg {

Dataset generate_auxiliary(std::size_t n, int d, double lambda, double lambda0,
                           RngStream& rng) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("generate_auxiliary: n and d must be >= 1");
  }
  if (!(lambda > 0.0) || !(lambda0 > 0.0)) {
    throw std::invalid_argument(
        "generate_auxiliary: precisions must be positive");
  }
  const double beta_sd = 1.0 / std::sqrt(lambda0);
  const double noise_sd = 1.0 / std::sqrt(lambda);
  Eigen::VectorXd beta(d);
  for (int j = 0; j < d; ++j) beta(j) = beta_sd * rng.next_normal();
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(n), d);
  out.targets.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.inputs.rows(); ++i) {
    for (int j = 0; j < d; ++j) out.inputs(i, j) = rng.next_normal();
    out.targets(i) = out.inputs.row(i).dot(beta) + noise_sd * rng.next_normal();
  }
  return out;
}

std::vector<std::array<double, 3>> budget_split_grid() {
  std::vector<std::array<double, 3>> grid;
  grid.reserve(136);
  for (int a = 1; a <= 18; ++a) {
    for (int b = 3; b <= 18; ++b) {  // xy share floored at 0.15
      const int c = 20 - a - b;
      if (c < 1 || c > 18) continue;
      grid.push_back({static_cast<double>(a) / 20.0,
                      static_cast<double>(b) / 20.0,
                      static_cast<double>(c) / 20.0});
    }
  }
  return grid;
}

std::vector<ThresholdMultipliers> threshold_multiplier_grid() {
  std::vector<ThresholdMultipliers> grid;
  grid.reserve(400);
  for (int a = 1; a <= 20; ++a) {
    for (int b = 1; b <= 20; ++b) {
      grid.emplace_back(static_cast<double>(a) / 10.0,
                        static_cast<double>(b) / 10.0);
    }
  }
  return grid;
}

namespace {

std::vector<double> strided_omegas(std::size_t stride) {
  if (stride < 1) throw std::invalid_argument("omega grid stride must be >= 1");
  std::vector<double> omegas;
  for (std::size_t k = 1; k <= 20; k += stride) {
    omegas.push_back(static_cast<double>(k) / 10.0);
  }
  return omegas;
}

struct ProjectedStats {
  Bounds bounds{1.0, 1.0};
  SufficientStats stats;
};

// Projection and exact statistics for one auxiliary dataset at one
// multiplier pair; reused across noise replicates and budget splits.
ProjectedStats projected_stats(const Dataset& aux,
                               const ThresholdMultipliers& w) {
  ProjectedStats out{thresholds_from_std(aux, w), SufficientStats{}};
  out.stats = sufficient_stats(project_dataset(aux, out.bounds));
  return out;
}

double fixed_fit_score(const Dataset& aux, const ProjectedStats& ps,
                       const PrivacyBudget& budget,
                       const FixedPrecisionPrior& prior, RngStream rng) {
  const SufficientStats noisy =
      perturb_stats(ps.stats, ps.bounds, budget, rng);
  const GaussianPosterior post = posterior_fixed(noisy, prior);
  return spearman_rho(predict_points(aux.inputs, post), aux.targets);
}

}  // namespace

ThresholdSearchResult tune_thresholds(const TuningConfig& cfg,
                                      const std::array<double, 3>& split,
                                      std::uint64_t root_seed,
                                      const ThresholdSearchOptions& opts) {
  const PrivacyBudget budget(cfg.epsilon, split[0], split[1], split[2]);
  const FixedPrecisionPrior prior{cfg.lambda, cfg.lambda0, {}};
  const std::vector<double> omegas = strided_omegas(opts.grid_stride);

  std::vector<Dataset> aux;
  aux.reserve(cfg.n_datasets);
  for (std::size_t i = 0; i < cfg.n_datasets; ++i) {
    RngStream rng = derive_rng(root_seed, "tune.thresholds.data", {i});
    aux.push_back(
        generate_auxiliary(cfg.n_aux, cfg.d, cfg.lambda, cfg.lambda0, rng));
  }

  ThresholdSearchResult result;
  result.grid = omegas;
  result.scores.resize(static_cast<Eigen::Index>(omegas.size()),
                       static_cast<Eigen::Index>(omegas.size()));
  double best_score = -2.0;
  for (std::size_t a = 0; a < omegas.size(); ++a) {
    for (std::size_t b = 0; b < omegas.size(); ++b) {
      const ThresholdMultipliers w(omegas[a], omegas[b]);
      double total = 0.0;
      for (std::size_t i = 0; i < aux.size(); ++i) {
        const ProjectedStats ps = projected_stats(aux[i], w);
        for (std::size_t j = 0; j < cfg.n_noise; ++j) {
          // Noise streams are shared across grid cells: the same unit
          // draws, rescaled per cell, pair the comparison.
          total += fixed_fit_score(
              aux[i], ps, budget, prior,
              derive_rng(root_seed, "tune.thresholds.noise", {i, j}));
        }
      }
      const double score =
          total / static_cast<double>(aux.size() * cfg.n_noise);
      result.scores(static_cast<Eigen::Index>(a),
                    static_cast<Eigen::Index>(b)) = score;
      // Strictly-greater keeps the first maximal cell, which is the
      // smallest omega_x then smallest omega_y tie rule.
      if (score > best_score) {
        best_score = score;
        result.best = w;
      }
    }
  }
  return result;
}

SplitSearchResult tune_budget_split(const TuningConfig& cfg,
                                    std::uint64_t root_seed,
                                    const SplitSearchOptions& opts) {
  const auto grid = budget_split_grid();
  const std::vector<double> omegas = strided_omegas(opts.inner_stride);
  const FixedPrecisionPrior prior{cfg.lambda, cfg.lambda0, {}};

  const std::size_t n_data = std::max(cfg.n_datasets, opts.inner_datasets);
  std::vector<Dataset> aux;
  aux.reserve(n_data);
  for (std::size_t i = 0; i < n_data; ++i) {
    RngStream rng = derive_rng(root_seed, "tune.split.data", {i});
    aux.push_back(
        generate_auxiliary(cfg.n_aux, cfg.d, cfg.lambda, cfg.lambda0, rng));
  }

  // Projected statistics per (dataset, omega cell) do not depend on the
  // split; compute them once.
  std::vector<std::vector<ProjectedStats>> cell_stats(opts.inner_datasets);
  for (std::size_t i = 0; i < opts.inner_datasets; ++i) {
    cell_stats[i].reserve(omegas.size() * omegas.size());
    for (double wx : omegas) {
      for (double wy : omegas) {
        cell_stats[i].push_back(
            projected_stats(aux[i], ThresholdMultipliers(wx, wy)));
      }
    }
  }

  SplitSearchResult result;
  result.scores.reserve(grid.size());
  double best_score = -2.0;
  for (const auto& split : grid) {
    const PrivacyBudget budget(cfg.epsilon, split[0], split[1], split[2]);

    // Stage 1: thresholds for this split, reduced replicates, fixed fits.
    double cell_best = -2.0;
    ThresholdMultipliers cell_w(1.0, 1.0);
    std::size_t cell = 0;
    for (std::size_t a = 0; a < omegas.size(); ++a) {
      for (std::size_t b = 0; b < omegas.size(); ++b, ++cell) {
        double total = 0.0;
        for (std::size_t i = 0; i < opts.inner_datasets; ++i) {
          for (std::size_t j = 0; j < opts.inner_noise; ++j) {
            total += fixed_fit_score(
                aux[i], cell_stats[i][cell], budget, prior,
                derive_rng(root_seed, "tune.split.noise", {i, j}));
          }
        }
        const double score = total / static_cast<double>(opts.inner_datasets *
                                                         opts.inner_noise);
        if (score > cell_best) {
          cell_best = score;
          cell_w = ThresholdMultipliers(omegas[a], omegas[b]);
        }
      }
    }

    // Stage 2: score the split at its best thresholds.
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.n_datasets; ++i) {
      const ProjectedStats ps = projected_stats(aux[i], cell_w);
      for (std::size_t j = 0; j < cfg.n_noise; ++j) {
        RngStream noise_rng =
            derive_rng(root_seed, "tune.split.score_noise", {i, j});
        const SufficientStats noisy =
            perturb_stats(ps.stats, ps.bounds, budget, noise_rng);
        Eigen::VectorXd pred;
        if (opts.gibbs_scoring) {
          RngStream chain = derive_rng(root_seed, "tune.split.gibbs", {i, j});
          const PosteriorSamples samples =
              gibbs_posterior(noisy, opts.hyper, opts.gibbs, chain);
          pred = predict_averaged_points(aux[i].inputs, samples);
        } else {
          pred = predict_points(aux[i].inputs, posterior_fixed(noisy, prior));
        }
        total += spearman_rho(pred, aux[i].targets);
      }
    }
    const double score =
        total / static_cast<double>(cfg.n_datasets * cfg.n_noise);
    result.scores.push_back(SplitScore{split, cell_w, score});

    const bool first = result.scores.size() == 1;
    const bool better =
        first || score > best_score ||
        (score == best_score &&
         (split[1] > result.best[1] ||
          (split[1] == result.best[1] && split[0] > result.best[0])));
    if (better) {
      best_score = score;
      result.best = split;
      result.best_thresholds = cell_w;
    }
  }
  return result;
}

}  // namespace dpreg
