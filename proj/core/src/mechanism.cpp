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

#include "dpreg/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace dpreg {

PrivacyBudget::PrivacyBudget(double eps, double share_xx, double share_xy,
                             double share_yy)
    : epsilon(eps), p1(share_xx), p2(share_xy), p3(share_yy) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
  }
  if (!(p1 > 0.0) || !(p2 > 0.0) || !(p3 > 0.0)) {
    throw std::invalid_argument("PrivacyBudget: all shares must be positive");
  }
  if (std::abs(p1 + p2 + p3 - 1.0) > 1e-12) {
    throw std::invalid_argument("PrivacyBudget: shares must sum to 1");
  }
}

NoiseScales noise_scales(int d, const Bounds& bounds,
                         const PrivacyBudget& budget) {
  if (d < 1) throw std::invalid_argument("noise_scales: d must be >= 1");
  const double dd = static_cast<double>(d);
  return NoiseScales{
      dd * (dd + 1.0) * bounds.b_x * bounds.b_x / (budget.p1 * budget.epsilon),
      2.0 * dd * bounds.b_x * bounds.b_y / (budget.p2 * budget.epsilon),
      bounds.b_y * bounds.b_y / (budget.p3 * budget.epsilon)};
}

double laplace_sample(double scale, RngStream& rng) {
  return rng.next_laplace(scale);
}

namespace {

// Necessary conditions on sums computed from data inside the certified
// bounds: diag(xx) in [0, n Bx^2], |xx_ij| <= n Bx^2, |xy_j| <= n Bx By,
// yy in [0, n By^2]. A violation means the bound certification is false
// and the noise calibration below it would not buy the claimed privacy.
void check_stats_within_bounds(const SufficientStats& s, const Bounds& b) {
  const double n = static_cast<double>(s.n);
  const double slack = 1e-9 * n + 1e-12;
  const double xx_cap = n * b.b_x * b.b_x + slack;
  const double xy_cap = n * b.b_x * b.b_y + slack;
  const double yy_cap = n * b.b_y * b.b_y + slack;
  bool ok = s.yy >= -slack && s.yy <= yy_cap;
  for (int i = 0; ok && i < s.dim(); ++i) {
    ok = s.xx(i, i) >= -slack && std::abs(s.xy(i)) <= xy_cap;
    for (int j = i; ok && j < s.dim(); ++j) {
      ok = std::abs(s.xx(i, j)) <= xx_cap;
    }
  }
  if (!ok) {
    throw std::invalid_argument(
        "perturb_stats: statistics exceed what data inside the certified "
        "bounds can produce; refusing to release under a void calibration");
  }
}

}  // namespace

SufficientStats perturb_stats(const SufficientStats& s, const Bounds& bounds,
                              const PrivacyBudget& budget, RngStream& rng) {
  if (s.noisy) {
    throw std::invalid_argument(
        "perturb_stats: statistics are already noisy; perturbing again would "
        "double-spend the privacy budget");
  }
  check_stats_within_bounds(s, bounds);
  const int d = s.dim();
  const NoiseScales scales = noise_scales(d, bounds, budget);
  SufficientStats out = s;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const double noise = rng.next_laplace(scales.b_xx);
      out.xx(a, b) += noise;
      if (b != a) out.xx(b, a) = out.xx(a, b);
    }
  }
  for (int a = 0; a < d; ++a) {
    out.xy(a) += rng.next_laplace(scales.b_xy);
  }
  out.yy += rng.next_laplace(scales.b_yy);
  out.noisy = true;
  return out;
}

Eigen::MatrixXd project_l1_rows(const Eigen::MatrixXd& data, double bound) {
  if (!(bound > 0.0)) {
    throw std::invalid_argument("project_l1_rows: bound must be positive");
  }
  Eigen::MatrixXd out = data;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).cwiseAbs().sum();
    if (norm > bound) out.row(i) *= bound / norm;
  }
  return out;
}

namespace {

Eigen::VectorXd posterior_mean_from_sum(const Eigen::VectorXd& sum,
                                        std::size_t n,
                                        const GaussianMeanPrior& prior) {
  const double denom =
      prior.lambda0 + static_cast<double>(n) * prior.lambda;
  return (prior.lambda * sum + prior.lambda0 * prior.mu0) / denom;
}

void check_prior(const Eigen::MatrixXd& data, const GaussianMeanPrior& prior) {
  if (!(prior.lambda > 0.0) || !(prior.lambda0 > 0.0)) {
    throw std::invalid_argument("gaussian mean: precisions must be positive");
  }
  if (data.rows() > 0 && prior.mu0.size() != data.cols()) {
    throw std::invalid_argument("gaussian mean: prior dimension mismatch");
  }
}

}  // namespace

Eigen::VectorXd gaussian_mean_nonprivate(const Eigen::MatrixXd& data,
                                         double l1_bound,
                                         const GaussianMeanPrior& prior) {
  check_prior(data, prior);
  if (data.rows() == 0) return prior.mu0;
  const Eigen::MatrixXd proj = project_l1_rows(data, l1_bound);
  return posterior_mean_from_sum(proj.colwise().sum().transpose(),
                                 static_cast<std::size_t>(data.rows()), prior);
}

Eigen::VectorXd gaussian_mean_dp(const Eigen::MatrixXd& data, double l1_bound,
                                 const GaussianMeanPrior& prior,
                                 double epsilon, RngStream& rng) {
  check_prior(data, prior);
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("gaussian_mean_dp: epsilon must be positive");
  }
  if (data.rows() == 0) return prior.mu0;
  const Eigen::MatrixXd proj = project_l1_rows(data, l1_bound);
  const int d = static_cast<int>(data.cols());
  const double scale = 2.0 * l1_bound * static_cast<double>(d) / epsilon;
  Eigen::VectorXd sum = proj.colwise().sum().transpose();
  for (int j = 0; j < d; ++j) sum(j) += rng.next_laplace(scale);
  return posterior_mean_from_sum(sum, static_cast<std::size_t>(data.rows()),
                                 prior);
}

Eigen::VectorXd gaussian_mean_input_perturbation(const Eigen::MatrixXd& data,
                                                 double l1_bound,
                                                 const GaussianMeanPrior& prior,
                                                 double epsilon,
                                                 RngStream& rng) {
  check_prior(data, prior);
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument(
        "gaussian_mean_input_perturbation: epsilon must be positive");
  }
  if (data.rows() == 0) return prior.mu0;
  Eigen::MatrixXd noisy = project_l1_rows(data, l1_bound);
  const int d = static_cast<int>(data.cols());
  const double scale = 2.0 * l1_bound * static_cast<double>(d) / epsilon;
  for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
    for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
      noisy(i, j) += rng.next_laplace(scale);
    }
  }
  // The released points feed the same estimator, whose domain is the L1
  // ball; they pass through the projection again.
  return gaussian_mean_nonprivate(noisy, l1_bound, prior);
}

double dp_ratio_check(const std::function<double(RngStream&)>& release_a,
                      const std::function<double(RngStream&)>& release_b,
                      const DpRatioCheckConfig& config, RngStream& rng) {
  if (config.bins < 2 || config.n_samples < 2) {
    throw std::invalid_argument("dp_ratio_check: bins and n_samples too small");
  }
  std::vector<double> a(config.n_samples);
  std::vector<double> b(config.n_samples);
  for (std::size_t i = 0; i < config.n_samples; ++i) a[i] = release_a(rng);
  for (std::size_t i = 0; i < config.n_samples; ++i) b[i] = release_b(rng);

  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  const double q = std::clamp(config.clamp_quantile, 0.0, 0.2);
  const std::size_t lo_idx =
      static_cast<std::size_t>(q * static_cast<double>(pooled.size() - 1));
  const std::size_t hi_idx = pooled.size() - 1 - lo_idx;
  const double lo = pooled[lo_idx];
  const double hi = pooled[hi_idx];
  if (!(hi > lo)) {
    throw std::invalid_argument("dp_ratio_check: degenerate sample range");
  }

  const double width = (hi - lo) / config.bins;
  std::vector<std::size_t> ha(static_cast<std::size_t>(config.bins), 0);
  std::vector<std::size_t> hb(static_cast<std::size_t>(config.bins), 0);
  auto bin_of = [&](double v) {
    int k = static_cast<int>((v - lo) / width);
    return static_cast<std::size_t>(std::clamp(k, 0, config.bins - 1));
  };
  for (double v : a) ++ha[bin_of(v)];
  for (double v : b) ++hb[bin_of(v)];

  double worst = -1.0;
  for (std::size_t k = 0; k < ha.size(); ++k) {
    if (ha[k] < config.min_bin_count || hb[k] < config.min_bin_count) continue;
    const double r = std::abs(std::log(static_cast<double>(ha[k]) /
                                       static_cast<double>(hb[k])));
    worst = std::max(worst, r);
  }
  if (worst < 0.0) {
    throw std::runtime_error(
        "dp_ratio_check: no bin holds enough samples in both histograms");
  }
  return worst;
}

std::string release_receipt_json(const PrivacyBudget& budget,
                                 const Bounds& bounds, int d, std::size_t n,
                                 std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["epsilon"] = budget.epsilon;
  j["split"] = {budget.p1, budget.p2, budget.p3};
  j["bounds"] = {{"b_x", bounds.b_x}, {"b_y", bounds.b_y}};
  j["d"] = d;
  j["n"] = n;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(seed_commitment(seed)));
  j["seed_commitment"] = buf;
  return j.dump();
}

}  // namespace dpreg
