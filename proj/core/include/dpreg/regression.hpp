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

#ifndef DPREG_REGRESSION_HPP_
#define DPREG_REGRESSION_HPP_

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "dpreg/rng.hpp"
#include "dpreg/stats.hpp"

namespace dpreg {

/// Fixed-precision Bayesian linear regression prior:
/// y | x ~ N(x^T beta, lambda^-1), beta ~ N(beta0, lambda0^-1 I).
/// An empty beta0 means the zero vector.
struct FixedPrecisionPrior {
  double lambda = 1.0;
  double lambda0 = 1.0;
  Eigen::VectorXd beta0;
};

/// Gamma hyperpriors for the hierarchical model:
/// lambda ~ Gamma(a, b), lambda0 ~ Gamma(a0, b0). Gamma(2,2) has mean 1.
struct GammaHyperPrior {
  double a = 2.0;
  double b = 2.0;
  double a0 = 2.0;
  double b0 = 2.0;
};

/// Gaussian posterior over the weights. `repaired` records whether the
/// PSD repair clamped any eigenvalue of the precision (possible only for
/// noisy statistics, whose xx perturbation can make it indefinite).
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  bool repaired = false;
};

/// Closed-form posterior: precision = lambda0 I + lambda xx, mean solves
/// precision * mean = lambda xy + lambda0 beta0 through a symmetric
/// factorisation (no explicit inverse). Noisy statistics go through PSD
/// repair first: eigenvalues below tau = 1e-6 * max(1, trace/d) are clamped
/// up to tau, which keeps the posterior a valid Gaussian.
GaussianPosterior posterior_fixed(const SufficientStats& s,
                                  const FixedPrecisionPrior& prior);

/// x^T mean.
double predict_point(const Eigen::VectorXd& x, const GaussianPosterior& p);

/// Row-wise predictions for a matrix of query points.
Eigen::VectorXd predict_points(const Eigen::MatrixXd& X,
                               const GaussianPosterior& p);

/// Bag of posterior draws from the hierarchical model.
struct PosteriorSamples {
  Eigen::MatrixXd betas;     // m x d
  Eigen::VectorXd lambdas;   // m
  Eigen::VectorXd lambda0s;  // m

  std::size_t count() const { return static_cast<std::size_t>(betas.rows()); }
};

struct GibbsConfig {
  std::size_t m = 5000;
  std::size_t burn_in = 1000;
};

/// Conditionally-conjugate Gibbs sampler over (beta, lambda, lambda0) for
/// the sufficient-statistic likelihood. Conditionals:
///   beta   | lambda, lambda0 ~ N(mu*, Lambda*^-1), the fixed-precision
///                              posterior at the current precisions
///   lambda | beta ~ Gamma(a + n/2, b + max(qf, floor)/2),
///                   qf = beta^T xx beta - 2 beta^T xy + yy
///   lambda0| beta ~ Gamma(a0 + d/2, b0 + beta^T beta / 2)
/// Noisy yy can drive qf negative, hence the floor
/// 1e-8 * max(1, |yy|). Discards `burn_in` sweeps, keeps `m`.
PosteriorSamples gibbs_posterior(const SufficientStats& s,
                                 const GammaHyperPrior& hyper,
                                 const GibbsConfig& config, RngStream& rng);

/// (1/m) sum_k x^T beta_k. Exactly x^T betabar, computed that way.
double predict_averaged(const Eigen::VectorXd& x,
                        const PosteriorSamples& samples);

Eigen::VectorXd predict_averaged_points(const Eigen::MatrixXd& X,
                                        const PosteriorSamples& samples);

/// JSON (mean, upper-triangle precision, repair flag) and CSV (one draw
/// per row) serialisation.
std::string posterior_to_json(const GaussianPosterior& p);
GaussianPosterior posterior_from_json(const std::string& text);
std::string samples_to_csv(const PosteriorSamples& samples);

}  // namespace dpreg

#endif  // DPREG_REGRESSION_HPP_
