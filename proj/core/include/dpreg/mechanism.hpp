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

#ifndef DPREG_MECHANISM_HPP_
#define DPREG_MECHANISM_HPP_

#include <array>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "dpreg/projection.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/stats.hpp"

namespace dpreg {

/// Total epsilon plus its split across the three statistics. Bounded DP
/// throughout: neighbouring datasets have equal size, so n is public.
struct PrivacyBudget {
  double epsilon;
  double p1;  // share for xx
  double p2;  // share for xy
  double p3;  // share for yy

  PrivacyBudget(double eps, double share_xx, double share_xy, double share_yy);
  std::array<double, 3> split() const { return {p1, p2, p3}; }
};

/// Laplace scales for the three statistic releases:
///   b_xx = d(d+1) B_x^2 / (p1 eps)
///   b_xy = 2 d B_x B_y / (p2 eps)
///   b_yy = B_y^2 / (p3 eps)
/// The element sensitivity of xx is 2 B_x^2 with the per-element budget
/// spread over the d(d+1)/2 free entries by basic composition.
struct NoiseScales {
  double b_xx;
  double b_xy;
  double b_yy;
};

NoiseScales noise_scales(int d, const Bounds& bounds,
                         const PrivacyBudget& budget);

/// Laplace(0, scale) draw; thin wrapper kept as a free function so release
/// code reads like the calibration it implements.
double laplace_sample(double scale, RngStream& rng);

/// The statistics release: adds independent Laplace noise to the
/// d(d+1)/2 upper-triangle entries of xx (mirrored), the d entries of xy
/// and to yy, with scales from `noise_scales`. The caller certifies the
/// statistics were computed from data projected to `bounds`; statistics
/// that no in-bounds data could produce (e.g. |xy_j| > n Bx By) are a hard
/// error, never silently clipped, because the calibration below them would
/// not buy the claimed privacy. Draw order is fixed (xx upper triangle
/// row-major, then xy, then yy), so the release is a deterministic
/// function of (stats, bounds, budget, stream).
///
/// Perturbing an already-noisy value is an error: it would double-spend
/// the budget.
SufficientStats perturb_stats(const SufficientStats& s, const Bounds& bounds,
                              const PrivacyBudget& budget, RngStream& rng);

/// Isotropic Gaussian-mean model: x_i ~ N(mu, lambda^-1 I),
/// mu ~ N(mu0, lambda0^-1 I), with precisions fixed.
struct GaussianMeanPrior {
  Eigen::VectorXd mu0;
  double lambda0 = 1.0;
  double lambda = 1.0;
};

/// Scales any row with ||row||_1 > bound back onto the L1 ball.
Eigen::MatrixXd project_l1_rows(const Eigen::MatrixXd& data, double bound);

/// Non-private posterior mean (Linfty of the estimator's domain enforced by
/// L1 projection): (lambda0 + n lambda)^-1 (lambda n xbar + lambda0 mu0).
Eigen::VectorXd gaussian_mean_nonprivate(const Eigen::MatrixXd& data,
                                         double l1_bound,
                                         const GaussianMeanPrior& prior);

/// Sufficient-statistic release: perturbs n*xbar with per-coordinate
/// Laplace(0, 2*bound*d/eps) noise, then forms the posterior mean.
/// n = 0 returns the prior mean (there is nothing to protect; n is public).
Eigen::VectorXd gaussian_mean_dp(const Eigen::MatrixXd& data, double l1_bound,
                                 const GaussianMeanPrior& prior,
                                 double epsilon, RngStream& rng);

/// Naive input perturbation baseline: adds Laplace(0, 2*bound*d/eps) noise
/// to every entry of every data point and feeds the result to the same
/// posterior-mean estimator. The estimator's domain is the L1 ball, so the
/// noisy points pass through the same projection the clean ones do; the
/// projection of heavily-noised points is what keeps this baseline from
/// converging to the non-private estimate.
Eigen::VectorXd gaussian_mean_input_perturbation(const Eigen::MatrixXd& data,
                                                 double l1_bound,
                                                 const GaussianMeanPrior& prior,
                                                 double epsilon,
                                                 RngStream& rng);

/// Empirical DP smoke test, not a proof: samples two scalar release
/// distributions, histograms them over shared bins and returns the worst
/// |log ratio| over bins where both histograms hold at least
/// `min_bin_count` samples. Samples outside the pooled
/// [clamp_quantile, 1-clamp_quantile] range are clamped into the edge
/// bins so the tail mass is still compared. Errors if no bin qualifies.
struct DpRatioCheckConfig {
  int bins = 40;
  std::size_t n_samples = 1000000;
  std::size_t min_bin_count = 50;
  double clamp_quantile = 0.001;
};

double dp_ratio_check(const std::function<double(RngStream&)>& release_a,
                      const std::function<double(RngStream&)>& release_b,
                      const DpRatioCheckConfig& config, RngStream& rng);

/// Budget receipt attached to every released statistics file: epsilon,
/// split, bounds, d, n and a one-way commitment to the seed.
std::string release_receipt_json(const PrivacyBudget& budget,
                                 const Bounds& bounds, int d, std::size_t n,
                                 std::uint64_t seed);

}  // namespace dpreg

#endif  // DPREG_MECHANISM_HPP_
