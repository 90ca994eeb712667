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

#include "dpreg/regression.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace dpreg {
namespace {

void check_prior(const SufficientStats& s, const FixedPrecisionPrior& prior) {
  if (!(prior.lambda > 0.0) || !(prior.lambda0 > 0.0)) {
    throw std::invalid_argument(
        "posterior_fixed: precision parameters must be positive");
  }
  if (prior.beta0.size() != 0 && prior.beta0.size() != s.dim()) {
    throw std::invalid_argument("posterior_fixed: beta0 dimension mismatch");
  }
}

double repair_tau(double trace, int d) {
  return 1e-6 * std::max(1.0, trace / static_cast<double>(d));
}

}  // namespace

GaussianPosterior posterior_fixed(const SufficientStats& s,
                                  const FixedPrecisionPrior& prior) {
  check_prior(s, prior);
  const int d = s.dim();
  Eigen::VectorXd rhs = prior.lambda * s.xy;
  if (prior.beta0.size() != 0) rhs += prior.lambda0 * prior.beta0;

  GaussianPosterior post;
  post.precision = prior.lambda0 * Eigen::MatrixXd::Identity(d, d) +
                   prior.lambda * s.xx;
  post.repaired = false;

  if (s.noisy) {
    // The xx perturbation can push eigenvalues negative; clamp them.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.precision);
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("posterior_fixed: eigendecomposition failed");
    }
    const double tau = repair_tau(post.precision.trace(), d);
    Eigen::VectorXd vals = eig.eigenvalues();
    bool clamped = false;
    for (int i = 0; i < d; ++i) {
      if (vals(i) < tau) {
        vals(i) = tau;
        clamped = true;
      }
    }
    if (clamped) {
      post.precision =
          eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
      // Symmetrise away the roundoff from the triple product.
      post.precision = ((post.precision + post.precision.transpose()) / 2.0).eval();
      post.repaired = true;
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> solver(post.precision);
  if (solver.info() != Eigen::Success || !solver.isPositive()) {
    throw std::runtime_error(
        "posterior_fixed: repaired precision is still not positive definite");
  }
  post.mean = solver.solve(rhs);
  if (!post.mean.allFinite()) {
    throw std::runtime_error("posterior_fixed: non-finite posterior mean");
  }
  return post;
}

double predict_point(const Eigen::VectorXd& x, const GaussianPosterior& p) {
  if (x.size() != p.mean.size()) {
    throw std::invalid_argument("predict_point: dimension mismatch");
  }
  return x.dot(p.mean);
}

Eigen::VectorXd predict_points(const Eigen::MatrixXd& X,
                               const GaussianPosterior& p) {
  if (X.cols() != p.mean.size()) {
    throw std::invalid_argument("predict_points: dimension mismatch");
  }
  return X * p.mean;
}

PosteriorSamples gibbs_posterior(const SufficientStats& s,
                                 const GammaHyperPrior& hyper,
                                 const GibbsConfig& config, RngStream& rng) {
  if (!(hyper.a > 0) || !(hyper.b > 0) || !(hyper.a0 > 0) || !(hyper.b0 > 0)) {
    throw std::invalid_argument("gibbs_posterior: hyperparameters must be > 0");
  }
  if (config.m < 1) {
    throw std::invalid_argument("gibbs_posterior: m must be >= 1");
  }
  const int d = s.dim();
  if (d < 1) throw std::invalid_argument("gibbs_posterior: d must be >= 1");

  // Lambda* = lambda0 I + lambda xx shares xx's eigenbasis, so one
  // decomposition serves every sweep; the PSD repair clamp happens on the
  // shifted eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.xx);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("gibbs_posterior: eigendecomposition failed");
  }
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::VectorXd xx_eigs = eig.eigenvalues();
  const Eigen::VectorXd xy_rot = V.transpose() * s.xy;

  const double qf_floor = 1e-8 * std::max(1.0, std::abs(s.yy));
  const double n_half = static_cast<double>(s.n) / 2.0;

  PosteriorSamples out;
  out.betas.resize(static_cast<Eigen::Index>(config.m), d);
  out.lambdas.resize(static_cast<Eigen::Index>(config.m));
  out.lambda0s.resize(static_cast<Eigen::Index>(config.m));

  double lambda = hyper.a / hyper.b;
  double lambda0 = hyper.a0 / hyper.b0;
  Eigen::VectorXd beta(d);
  Eigen::VectorXd z(d);

  const std::size_t total = config.burn_in + config.m;
  for (std::size_t it = 0; it < total; ++it) {
    // beta | lambda, lambda0
    Eigen::VectorXd prec_eigs = (lambda * xx_eigs).array() + lambda0;
    const double tau = repair_tau(prec_eigs.sum(), d);
    for (int i = 0; i < d; ++i) {
      if (prec_eigs(i) < tau) prec_eigs(i) = tau;
    }
    for (int i = 0; i < d; ++i) z(i) = rng.next_normal();
    const Eigen::VectorXd mean_rot =
        (lambda * xy_rot.array() / prec_eigs.array()).matrix();
    beta = V * (mean_rot + (z.array() / prec_eigs.array().sqrt()).matrix());

    // lambda | beta
    const double qf = beta.dot(s.xx * beta) - 2.0 * beta.dot(s.xy) + s.yy;
    lambda = rng.next_gamma(hyper.a + n_half,
                            hyper.b + 0.5 * std::max(qf, qf_floor));

    // lambda0 | beta
    lambda0 = rng.next_gamma(hyper.a0 + static_cast<double>(d) / 2.0,
                             hyper.b0 + 0.5 * beta.squaredNorm());

    if (!std::isfinite(lambda) || !std::isfinite(lambda0) ||
        !beta.allFinite()) {
      throw std::runtime_error("gibbs_posterior: non-finite state at sweep " +
                               std::to_string(it));
    }
    if (it >= config.burn_in) {
      const Eigen::Index k = static_cast<Eigen::Index>(it - config.burn_in);
      out.betas.row(k) = beta.transpose();
      out.lambdas(k) = lambda;
      out.lambda0s(k) = lambda0;
    }
  }
  return out;
}

double predict_averaged(const Eigen::VectorXd& x,
                        const PosteriorSamples& samples) {
  if (samples.count() == 0) {
    throw std::invalid_argument("predict_averaged: empty sample bag");
  }
  if (x.size() != samples.betas.cols()) {
    throw std::invalid_argument("predict_averaged: dimension mismatch");
  }
  return x.dot(samples.betas.colwise().mean());
}

Eigen::VectorXd predict_averaged_points(const Eigen::MatrixXd& X,
                                        const PosteriorSamples& samples) {
  if (samples.count() == 0) {
    throw std::invalid_argument("predict_averaged_points: empty sample bag");
  }
  if (X.cols() != samples.betas.cols()) {
    throw std::invalid_argument("predict_averaged_points: dimension mismatch");
  }
  return X * samples.betas.colwise().mean().transpose();
}

std::string posterior_to_json(const GaussianPosterior& p) {
  const int d = static_cast<int>(p.mean.size());
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(d) * (d + 1) / 2);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) upper.push_back(p.precision(a, b));
  }
  nlohmann::ordered_json j;
  j["d"] = d;
  j["mean"] = std::vector<double>(p.mean.data(), p.mean.data() + d);
  j["precision_upper"] = upper;
  j["repaired"] = p.repaired;
  return j.dump();
}

GaussianPosterior posterior_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int d = j.at("d").get<int>();
  GaussianPosterior p;
  const auto mean = j.at("mean").get<std::vector<double>>();
  if (mean.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("posterior_from_json: bad mean length");
  }
  p.mean.resize(d);
  for (int i = 0; i < d; ++i) p.mean(i) = mean[static_cast<std::size_t>(i)];
  const auto upper = j.at("precision_upper").get<std::vector<double>>();
  if (upper.size() != static_cast<std::size_t>(d) * (d + 1) / 2) {
    throw std::invalid_argument(
        "posterior_from_json: bad precision_upper length");
  }
  p.precision.resize(d, d);
  std::size_t k = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      p.precision(a, b) = upper[k];
      p.precision(b, a) = upper[k];
      ++k;
    }
  }
  p.repaired = j.at("repaired").get<bool>();
  return p;
}

std::string samples_to_csv(const PosteriorSamples& samples) {
  std::ostringstream out;
  const Eigen::Index d = samples.betas.cols();
  for (Eigen::Index j = 0; j < d; ++j) out << "beta" << j + 1 << ",";
  out << "lambda,lambda0\n";
  char buf[40];
  for (Eigen::Index i = 0; i < samples.betas.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", samples.betas(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", samples.lambdas(i));
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", samples.lambda0s(i));
    out << buf << "\n";
  }
  return out.str();
}

}  // namespace dpreg
