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

#include "dpreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpreg/tuning.hpp"

namespace dpreg {
namespace {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v(idx[static_cast<std::size_t>(j + 1)]) ==
                            v(idx[static_cast<std::size_t>(i)])) {
      ++j;
    }
    // Tied block [i, j] gets the mean of its rank span (1-based).
    const double r = static_cast<double>(i + j) / 2.0 + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      ranks(idx[static_cast<std::size_t>(k)]) = r;
    }
    i = j + 1;
  }
  return ranks;
}

double sample_quantile(std::vector<double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

Dataset slice(const Dataset& d, std::size_t begin, std::size_t count) {
  Dataset out;
  out.inputs = d.inputs.middleRows(static_cast<Eigen::Index>(begin),
                                   static_cast<Eigen::Index>(count));
  out.targets = d.targets.segment(static_cast<Eigen::Index>(begin),
                                  static_cast<Eigen::Index>(count));
  return out;
}

struct RepeatData {
  Dataset nonprivate;
  Dataset priv;
  Dataset test;
};

RepeatData materialise_repeat(const DataSource& source, std::uint64_t root_seed,
                              std::size_t repeat) {
  if (std::holds_alternative<SyntheticSource>(source)) {
    const auto& s = std::get<SyntheticSource>(source);
    RngStream rng = derive_rng(root_seed, "cv.synthetic", {repeat});
    const std::size_t total = s.n_test + s.n_nonprivate + s.n_private;
    const Dataset all =
        generate_auxiliary(total, s.d, s.lambda, s.lambda0, rng);
    RepeatData out;
    out.test = slice(all, 0, s.n_test);
    out.nonprivate = slice(all, s.n_test, s.n_nonprivate);
    out.priv = slice(all, s.n_test + s.n_nonprivate, s.n_private);
    return out;
  }
  const auto& src = std::get<DatasetSource>(source);
  SplitSpec spec;
  spec.n_test = src.n_test;
  spec.n_nonprivate = src.n_nonprivate;
  spec.seed = derive_stream("cv.split", {root_seed, repeat});
  SplitResult split = split_dataset(src.data, spec);
  if (src.n_private && *src.n_private < split.private_part.size()) {
    split.private_part = slice(split.private_part, 0, *src.n_private);
  }
  RepeatData out;
  if (src.preprocess) {
    // Statistics come from the training portion only.
    Eigen::MatrixXd train_inputs(split.nonprivate.inputs.rows() +
                                     split.private_part.inputs.rows(),
                                 src.data.inputs.cols());
    train_inputs << split.nonprivate.inputs, split.private_part.inputs;
    Eigen::VectorXd train_targets(split.nonprivate.targets.size() +
                                  split.private_part.targets.size());
    train_targets << split.nonprivate.targets, split.private_part.targets;
    const FeatureScaler scaler = FeatureScaler::fit(train_inputs);
    const double target_mean = train_targets.mean();
    auto apply = [&](const Dataset& part) {
      Dataset r;
      r.inputs = scaler.apply(part.inputs);
      r.targets = part.targets.array() - target_mean;
      return r;
    };
    out.nonprivate = apply(split.nonprivate);
    out.priv = apply(split.private_part);
    out.test = apply(split.test);
  } else {
    out.nonprivate = std::move(split.nonprivate);
    out.priv = std::move(split.private_part);
    out.test = std::move(split.test);
  }
  return out;
}

}  // namespace

double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("spearman_rho: length mismatch");
  }
  if (a.size() < 2) {
    throw std::invalid_argument("spearman_rho: need at least 2 values");
  }
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const Eigen::VectorXd ca = ra.array() - ra.mean();
  const Eigen::VectorXd cb = rb.array() - rb.mean();
  const double va = ca.squaredNorm();
  const double vb = cb.squaredNorm();
  if (va == 0.0 || vb == 0.0) {
    throw std::invalid_argument("spearman_rho: constant vector");
  }
  return ca.dot(cb) / std::sqrt(va * vb);
}

std::string variant_name(MethodVariant v) {
  switch (v) {
    case MethodVariant::nonprivate_lr:
      return "nonprivate_lr";
    case MethodVariant::private_lr_noproj:
      return "private_lr_noproj";
    case MethodVariant::robust_private_lr:
      return "robust_private_lr";
    case MethodVariant::input_perturbation_gaussian_mean:
      return "input_perturbation_gaussian_mean";
  }
  throw std::logic_error("variant_name: unreachable");
}

MethodVariant variant_from_name(const std::string& name) {
  if (name == "nonprivate_lr") return MethodVariant::nonprivate_lr;
  if (name == "private_lr_noproj") return MethodVariant::private_lr_noproj;
  if (name == "robust_private_lr") return MethodVariant::robust_private_lr;
  if (name == "input_perturbation_gaussian_mean") {
    return MethodVariant::input_perturbation_gaussian_mean;
  }
  throw std::invalid_argument("unknown method variant: " + name);
}

std::string VariantConfig::label() const {
  if (tag == MethodVariant::nonprivate_lr && pool_private_as_clean) {
    return "nonprivate_lr_pooled";
  }
  return variant_name(tag);
}

Dataset minmax_rescale(const Dataset& d, const Bounds& bounds) {
  Dataset out = d;
  for (Eigen::Index j = 0; j < out.inputs.cols(); ++j) {
    const double lo = out.inputs.col(j).minCoeff();
    const double hi = out.inputs.col(j).maxCoeff();
    if (hi == lo) {
      out.inputs.col(j).setZero();
    } else {
      out.inputs.col(j) =
          ((out.inputs.col(j).array() - lo) / (hi - lo) * 2.0 - 1.0) *
          bounds.b_x;
    }
  }
  if (out.targets.size() > 0) {
    const double lo = out.targets.minCoeff();
    const double hi = out.targets.maxCoeff();
    if (hi == lo) {
      out.targets.setZero();
    } else {
      out.targets =
          ((out.targets.array() - lo) / (hi - lo) * 2.0 - 1.0) * bounds.b_y;
    }
  }
  return out;
}

namespace {

GaussianPosterior fit_posterior(const SufficientStats& stats,
                                const PipelineConfig& pipeline,
                                RngStream& rng) {
  if (!pipeline.gibbs_fit) {
    return posterior_fixed(stats, pipeline.prior);
  }
  const PosteriorSamples samples =
      gibbs_posterior(stats, pipeline.hyper, pipeline.gibbs, rng);
  GaussianPosterior post;
  post.mean = samples.betas.colwise().mean().transpose();
  post.precision = Eigen::MatrixXd::Identity(stats.dim(), stats.dim());
  post.repaired = false;
  return post;
}

}  // namespace

Eigen::VectorXd run_variant(const Dataset& nonprivate, const Dataset& priv,
                            const Eigen::MatrixXd& test_inputs,
                            const VariantConfig& variant,
                            const PipelineConfig& pipeline, RngStream& rng) {
  const int d = static_cast<int>(test_inputs.cols());
  const SufficientStats clean_nonprivate =
      nonprivate.size() > 0 ? sufficient_stats(nonprivate)
                            : SufficientStats::zero(d);

  SufficientStats model_stats = clean_nonprivate;
  switch (variant.tag) {
    case MethodVariant::nonprivate_lr: {
      if (variant.pool_private_as_clean && priv.size() > 0) {
        model_stats = combine_stats(model_stats, sufficient_stats(priv));
      }
      break;
    }
    case MethodVariant::robust_private_lr:
    case MethodVariant::private_lr_noproj: {
      if (priv.size() == 0) break;  // nothing to release
      const Bounds bounds =
          pipeline.fixed_bounds
              ? *pipeline.fixed_bounds
              : thresholds_from_std(priv, pipeline.multipliers);
      const Dataset bounded = variant.tag == MethodVariant::robust_private_lr
                                  ? project_dataset(priv, bounds)
                                  : minmax_rescale(priv, bounds);
      const SufficientStats released = perturb_stats(
          sufficient_stats(bounded), bounds, pipeline.budget, rng);
      model_stats = combine_stats(model_stats, released);
      break;
    }
    case MethodVariant::input_perturbation_gaussian_mean:
      throw std::invalid_argument(
          "run_variant: input_perturbation_gaussian_mean is a mean-estimation "
          "baseline; use convergence_experiment");
  }

  const GaussianPosterior post = fit_posterior(model_stats, pipeline, rng);
  return predict_points(test_inputs, post);
}

ExperimentResult monte_carlo_cv(const DataSource& source, const CvConfig& cfg) {
  if (cfg.repeats < 1) {
    throw std::invalid_argument("monte_carlo_cv: repeats must be >= 1");
  }
  if (cfg.variants.empty()) {
    throw std::invalid_argument("monte_carlo_cv: no variants given");
  }
  ExperimentResult result;
  result.repeats = cfg.repeats;
  result.variants.resize(cfg.variants.size());
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    result.variants[v].label = cfg.variants[v].label();
    result.variants[v].rhos.reserve(cfg.repeats);
  }
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    try {
      const RepeatData data = materialise_repeat(source, cfg.root_seed, r);
      for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
        // Same release stream for every variant within a repeat: paired
        // noise makes the comparisons common-random-number tight.
        RngStream rng = derive_rng(cfg.root_seed, "cv.release", {r});
        const Eigen::VectorXd pred =
            run_variant(data.nonprivate, data.priv, data.test.inputs,
                        cfg.variants[v], cfg.pipeline, rng);
        result.variants[v].rhos.push_back(spearman_rho(pred, data.test.targets));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("monte_carlo_cv: repeat " + std::to_string(r) +
                               " failed: " + e.what());
    }
  }
  for (auto& summary : result.variants) {
    const double mean =
        std::accumulate(summary.rhos.begin(), summary.rhos.end(), 0.0) /
        static_cast<double>(summary.rhos.size());
    summary.mean = mean;
    if (summary.rhos.size() > 1) {
      double ss = 0.0;
      for (double rho : summary.rhos) ss += (rho - mean) * (rho - mean);
      summary.stddev =
          std::sqrt(ss / static_cast<double>(summary.rhos.size() - 1));
    }
  }
  return result;
}

std::string convergence_mechanism_name(ConvergenceMechanism m) {
  switch (m) {
    case ConvergenceMechanism::gaussian_mean_suffstat:
      return "gaussian_mean_suffstat";
    case ConvergenceMechanism::gaussian_mean_input_perturbation:
      return "gaussian_mean_input_perturbation";
    case ConvergenceMechanism::linreg_suffstat:
      return "linreg_suffstat";
  }
  throw std::logic_error("convergence_mechanism_name: unreachable");
}

ConvergenceMechanism convergence_mechanism_from_name(const std::string& name) {
  if (name == "gaussian_mean_suffstat") {
    return ConvergenceMechanism::gaussian_mean_suffstat;
  }
  if (name == "gaussian_mean_input_perturbation") {
    return ConvergenceMechanism::gaussian_mean_input_perturbation;
  }
  if (name == "linreg_suffstat") return ConvergenceMechanism::linreg_suffstat;
  throw std::invalid_argument("unknown convergence mechanism: " + name);
}

ConvergenceResult convergence_experiment(const ConvergenceConfig& cfg) {
  if (cfg.n_grid.size() < 3) {
    throw std::invalid_argument(
        "convergence_experiment: need at least 3 grid points");
  }
  if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
    throw std::invalid_argument(
        "convergence_experiment: n_grid must be ascending");
  }
  if (static_cast<double>(cfg.n_grid.back()) <
      100.0 * static_cast<double>(cfg.n_grid.front())) {
    throw std::invalid_argument(
        "convergence_experiment: n_grid must span at least 2 decades");
  }

  ConvergenceResult result;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const std::size_t n = cfg.n_grid[ni];
    std::vector<double> errors;
    errors.reserve(cfg.seeds_per_n);

    if (cfg.mechanism == ConvergenceMechanism::linreg_suffstat) {
      RngStream data_rng = derive_rng(cfg.root_seed, "conv.data", {ni});
      const Dataset raw =
          generate_auxiliary(n, cfg.d, 1.0, 1.0, data_rng);
      const Dataset projected = project_dataset(raw, cfg.lr_bounds);
      const SufficientStats clean = sufficient_stats(projected);
      const GaussianPosterior reference = posterior_fixed(clean, cfg.prior);
      for (std::size_t s = 0; s < cfg.seeds_per_n; ++s) {
        RngStream rng = derive_rng(cfg.root_seed, "conv.noise", {ni, s});
        const SufficientStats noisy =
            perturb_stats(clean, cfg.lr_bounds, cfg.lr_budget, rng);
        const GaussianPosterior post = posterior_fixed(noisy, cfg.prior);
        errors.push_back((post.mean - reference.mean).cwiseAbs().sum());
      }
    } else {
      RngStream data_rng = derive_rng(cfg.root_seed, "conv.data", {ni});
      Eigen::MatrixXd data(static_cast<Eigen::Index>(n), cfg.d);
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (int j = 0; j < cfg.d; ++j) {
          data(i, j) = cfg.data_mean + data_rng.next_normal();
        }
      }
      GaussianMeanPrior prior;
      prior.mu0 = Eigen::VectorXd::Zero(cfg.d);
      const Eigen::VectorXd reference =
          gaussian_mean_nonprivate(data, cfg.l1_bound, prior);
      for (std::size_t s = 0; s < cfg.seeds_per_n; ++s) {
        RngStream rng = derive_rng(cfg.root_seed, "conv.noise", {ni, s});
        const Eigen::VectorXd estimate =
            cfg.mechanism == ConvergenceMechanism::gaussian_mean_suffstat
                ? gaussian_mean_dp(data, cfg.l1_bound, prior, cfg.epsilon, rng)
                : gaussian_mean_input_perturbation(data, cfg.l1_bound, prior,
                                                   cfg.epsilon, rng);
        errors.push_back((estimate - reference).cwiseAbs().sum());
      }
    }

    std::sort(errors.begin(), errors.end());
    ConvergenceRow row;
    row.n = n;
    row.q05 = sample_quantile(errors, 0.05);
    row.q25 = sample_quantile(errors, 0.25);
    row.q50 = sample_quantile(errors, 0.50);
    row.q75 = sample_quantile(errors, 0.75);
    row.q95 = sample_quantile(errors, 0.95);
    row.mean = std::accumulate(errors.begin(), errors.end(), 0.0) /
               static_cast<double>(errors.size());
    result.rows.push_back(row);
  }

  // Least-squares slope of log median error against log n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(result.rows.size());
  for (const auto& row : result.rows) {
    const double x = std::log(static_cast<double>(row.n));
    const double y = std::log(row.q50);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  result.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  result.intercept = (sy - result.slope * sx) / m;
  return result;
}

std::vector<SweepCell> sweep(const SweepAxes& axes, const CvConfig& base,
                             const SyntheticSource& proto) {
  if (axes.d.empty() || axes.n_private.empty() || axes.n_nonprivate.empty() ||
      axes.epsilon.empty()) {
    throw std::invalid_argument("sweep: all axes must be nonempty");
  }
  std::vector<SweepCell> cells;
  for (int d : axes.d) {
    for (std::size_t n_priv : axes.n_private) {
      for (std::size_t n_np : axes.n_nonprivate) {
        for (double eps : axes.epsilon) {
          SyntheticSource source = proto;
          source.d = d;
          source.n_private = n_priv;
          source.n_nonprivate = n_np;
          CvConfig cfg = base;
          cfg.pipeline.budget =
              PrivacyBudget(eps, base.pipeline.budget.p1,
                            base.pipeline.budget.p2, base.pipeline.budget.p3);
          SweepCell cell;
          cell.d = d;
          cell.n_private = n_priv;
          cell.n_nonprivate = n_np;
          cell.epsilon = eps;
          cell.result = monte_carlo_cv(DataSource(source), cfg);
          // Per-repeat improvement over the plain non-private baseline.
          const VariantSummary* baseline = nullptr;
          for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
            if (cfg.variants[v].tag == MethodVariant::nonprivate_lr &&
                !cfg.variants[v].pool_private_as_clean) {
              baseline = &cell.result.variants[v];
              break;
            }
          }
          if (baseline != nullptr) {
            for (const auto& summary : cell.result.variants) {
              if (&summary == baseline) continue;
              double acc = 0.0;
              for (std::size_t r = 0; r < summary.rhos.size(); ++r) {
                acc += summary.rhos[r] - baseline->rhos[r];
              }
              cell.improvement.emplace_back(
                  summary.label,
                  acc / static_cast<double>(summary.rhos.size()));
            }
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

}  // namespace dpreg
