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

#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "dpreg/mechanism.hpp"
#include "dpreg/regression.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/tuning.hpp"
#include "test_util.hpp"

using dpreg::FixedPrecisionPrior;
using dpreg::GammaHyperPrior;
using dpreg::GaussianPosterior;
using dpreg::GibbsConfig;
using dpreg::posterior_fixed;
using dpreg::PosteriorSamples;
using dpreg::RngStream;
using dpreg::SufficientStats;

TEST_CASE("n=0 statistics recover the prior") {
  const SufficientStats s = SufficientStats::zero(3);
  FixedPrecisionPrior prior{1.0, 2.5, {}};
  const GaussianPosterior p = posterior_fixed(s, prior);
  CHECK(p.mean.isZero(0.0));
  CHECK(p.precision == (2.5 * Eigen::MatrixXd::Identity(3, 3)).eval());

  prior.beta0 = Eigen::VectorXd::Constant(3, 0.7);
  const GaussianPosterior q = posterior_fixed(s, prior);
  CHECK((q.mean - prior.beta0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("hand-evaluated 1-d posterior") {
  SufficientStats s = SufficientStats::zero(1);
  s.xx(0, 0) = 1.0;
  s.xy(0) = 1.0;
  s.yy = 1.0;
  s.n = 1;
  const GaussianPosterior p = posterior_fixed(s, FixedPrecisionPrior{1, 1, {}});
  CHECK(p.precision(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(p.mean(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("posterior mean matches an explicit-inverse oracle") {
  RngStream rng(61, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng.next_below(10));
    const dpreg::Dataset data =
        dpreg::generate_auxiliary(80, d, 1.0, 1.0, rng);
    const SufficientStats s = dpreg::sufficient_stats(data);
    const FixedPrecisionPrior prior{0.9, 1.4, {}};
    const GaussianPosterior p = posterior_fixed(s, prior);
    const Eigen::MatrixXd precision =
        prior.lambda0 * Eigen::MatrixXd::Identity(d, d) + prior.lambda * s.xx;
    const Eigen::VectorXd oracle = precision.inverse() * (prior.lambda * s.xy);
    CHECK((p.mean - oracle).norm() / std::max(1.0, oracle.norm()) < 1e-8);
  }
}

TEST_CASE("predict_point basics and naive-loop oracle") {
  GaussianPosterior p;
  p.mean.resize(4);
  p.mean << 0.3, -1.2, 2.0, 0.05;
  p.precision = Eigen::MatrixXd::Identity(4, 4);

  CHECK(dpreg::predict_point(Eigen::VectorXd::Zero(4), p) == 0.0);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(4);
  e2(2) = 1.0;
  CHECK(dpreg::predict_point(e2, p) == p.mean(2));

  RngStream rng(62, 0);
  Eigen::VectorXd x(4);
  for (int i = 0; i < 4; ++i) x(i) = rng.next_normal();
  double naive = 0.0;
  for (int i = 0; i < 4; ++i) naive += x(i) * p.mean(i);
  CHECK(dpreg::predict_point(x, p) == doctest::Approx(naive).epsilon(1e-12));

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(dpreg::predict_point(wrong, p), std::invalid_argument);
}

TEST_CASE("statistic additivity carries through to the posterior") {
  RngStream rng(63, 0);
  const dpreg::Dataset d1 = dpreg::generate_auxiliary(40, 4, 1.0, 1.0, rng);
  const dpreg::Dataset d2 = dpreg::generate_auxiliary(25, 4, 1.0, 1.0, rng);
  dpreg::Dataset both;
  both.inputs.resize(65, 4);
  both.inputs << d1.inputs, d2.inputs;
  both.targets.resize(65);
  both.targets << d1.targets, d2.targets;
  const FixedPrecisionPrior prior{1.0, 1.0, {}};
  const GaussianPosterior combined = posterior_fixed(
      dpreg::combine_stats(dpreg::sufficient_stats(d1),
                           dpreg::sufficient_stats(d2)),
      prior);
  const GaussianPosterior whole =
      posterior_fixed(dpreg::sufficient_stats(both), prior);
  CHECK((combined.mean - whole.mean).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("large lambda0 shrinks the mean toward beta0") {
  RngStream rng(64, 0);
  const dpreg::Dataset data = dpreg::generate_auxiliary(50, 3, 1.0, 1.0, rng);
  const SufficientStats s = dpreg::sufficient_stats(data);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Constant(3, 0.3);
  const GaussianPosterior loose =
      posterior_fixed(s, FixedPrecisionPrior{1.0, 1.0, beta0});
  const GaussianPosterior tight =
      posterior_fixed(s, FixedPrecisionPrior{1.0, 1e6, beta0});
  CHECK((tight.mean - beta0).norm() < (loose.mean - beta0).norm());
}

TEST_CASE("private posterior converges to non-private at huge epsilon") {
  RngStream rng(65, 0);
  const dpreg::Dataset raw = dpreg::generate_auxiliary(100, 4, 1.0, 1.0, rng);
  const dpreg::Bounds bounds(1.0, 1.0);
  const dpreg::Dataset projected = dpreg::project_dataset(raw, bounds);
  const SufficientStats clean = dpreg::sufficient_stats(projected);
  const FixedPrecisionPrior prior{1.0, 1.0, {}};
  const GaussianPosterior reference = posterior_fixed(clean, prior);
  RngStream noise(65, 1);
  const SufficientStats noisy = dpreg::perturb_stats(
      clean, bounds, dpreg::PrivacyBudget(1e12, 0.35, 0.60, 0.05), noise);
  const GaussianPosterior dp = posterior_fixed(noisy, prior);
  CHECK((dp.mean - reference.mean).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("PSD repair keeps heavily noised precisions usable") {
  RngStream rng(66, 0);
  const dpreg::Dataset raw = dpreg::generate_auxiliary(10, 5, 1.0, 1.0, rng);
  const dpreg::Bounds bounds(1.0, 1.0);
  const SufficientStats clean =
      dpreg::sufficient_stats(dpreg::project_dataset(raw, bounds));
  // Tiny epsilon: the xx noise dwarfs the data, the raw precision will be
  // indefinite in most draws.
  bool repaired_seen = false;
  for (std::uint64_t k = 0; k < 20; ++k) {
    RngStream noise(66, k);
    const SufficientStats noisy = dpreg::perturb_stats(
        clean, bounds, dpreg::PrivacyBudget(0.01, 0.35, 0.60, 0.05), noise);
    const GaussianPosterior p =
        posterior_fixed(noisy, FixedPrecisionPrior{1.0, 1.0, {}});
    CHECK(p.mean.allFinite());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.precision);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    repaired_seen = repaired_seen || p.repaired;
  }
  CHECK(repaired_seen);
}

TEST_CASE("gibbs: n=0 recovers the Gamma(2,2) prior means") {
  const SufficientStats s = SufficientStats::zero(2);
  RngStream rng(67, 0);
  const PosteriorSamples samples =
      dpreg::gibbs_posterior(s, GammaHyperPrior{}, GibbsConfig{10000, 500}, rng);
  CHECK(std::abs(samples.lambdas.mean() - 1.0) < 0.05);
  CHECK(std::abs(samples.lambda0s.mean() - 1.0) < 0.05);
}

TEST_CASE("gibbs: same stream replays the same chain") {
  RngStream data_rng(68, 0);
  const dpreg::Dataset data =
      dpreg::generate_auxiliary(50, 3, 1.0, 1.0, data_rng);
  const SufficientStats s = dpreg::sufficient_stats(data);
  RngStream c1(68, 1);
  RngStream c2(68, 1);
  const PosteriorSamples a =
      dpreg::gibbs_posterior(s, GammaHyperPrior{}, GibbsConfig{200, 50}, c1);
  const PosteriorSamples b =
      dpreg::gibbs_posterior(s, GammaHyperPrior{}, GibbsConfig{200, 50}, c2);
  CHECK(a.betas == b.betas);
  CHECK(a.lambdas == b.lambdas);
  CHECK(a.lambda0s == b.lambda0s);
}

TEST_CASE("gibbs agrees with the fixed posterior at the learned precisions") {
  RngStream data_rng(69, 0);
  const dpreg::Dataset data =
      dpreg::generate_auxiliary(2000, 3, 1.0, 1.0, data_rng);
  const SufficientStats s = dpreg::sufficient_stats(data);
  RngStream chain(69, 1);
  const PosteriorSamples samples = dpreg::gibbs_posterior(
      s, GammaHyperPrior{}, GibbsConfig{5000, 1000}, chain);
  const Eigen::VectorXd gibbs_mean = samples.betas.colwise().mean();
  const GaussianPosterior fixed = posterior_fixed(
      s,
      FixedPrecisionPrior{samples.lambdas.mean(), samples.lambda0s.mean(), {}});
  // Batch-means Monte Carlo standard error per coordinate.
  const int batches = 20;
  const Eigen::Index batch_len = samples.betas.rows() / batches;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> batch_means;
    for (int k = 0; k < batches; ++k) {
      batch_means.push_back(
          samples.betas.col(j).segment(k * batch_len, batch_len).mean());
    }
    const double se = std::sqrt(testutil::variance(batch_means) /
                                static_cast<double>(batches));
    CHECK(std::abs(gibbs_mean(j) - fixed.mean(j)) < 3.0 * se + 1e-4);
  }
}

TEST_CASE("gibbs: lambda posterior concentrates as n grows 10x") {
  GammaHyperPrior hyper;
  double spread_small = 0.0, spread_large = 0.0;
  for (const std::size_t n : {std::size_t(200), std::size_t(2000)}) {
    RngStream data_rng(70, n);
    const dpreg::Dataset data =
        dpreg::generate_auxiliary(n, 3, 1.0, 1.0, data_rng);
    RngStream chain(70, n + 1);
    const PosteriorSamples samples = dpreg::gibbs_posterior(
        dpreg::sufficient_stats(data), hyper, GibbsConfig{3000, 500}, chain);
    const double mean = samples.lambdas.mean();
    const double var =
        (samples.lambdas.array() - mean).square().sum() /
        static_cast<double>(samples.lambdas.size() - 1);
    (n == 200 ? spread_small : spread_large) = var;
  }
  CHECK(spread_large < spread_small);
}

TEST_CASE("gibbs: noisy yy driving qf negative is survivable") {
  RngStream data_rng(71, 0);
  const dpreg::Dataset data =
      dpreg::generate_auxiliary(30, 2, 1.0, 1.0, data_rng);
  SufficientStats s = dpreg::sufficient_stats(data);
  s.yy = -50.0;  // what a harsh yy noise draw can do
  s.noisy = true;
  RngStream chain(71, 1);
  const PosteriorSamples samples =
      dpreg::gibbs_posterior(s, GammaHyperPrior{}, GibbsConfig{500, 100}, chain);
  CHECK(samples.lambdas.minCoeff() > 0.0);
  CHECK(samples.betas.allFinite());
}

TEST_CASE("predict_averaged equals the per-sample average") {
  RngStream rng(72, 0);
  PosteriorSamples samples;
  samples.betas.resize(500, 4);
  for (Eigen::Index i = 0; i < samples.betas.size(); ++i) {
    samples.betas(i / 4, i % 4) = rng.next_normal();
  }
  samples.lambdas = Eigen::VectorXd::Ones(500);
  samples.lambda0s = Eigen::VectorXd::Ones(500);
  Eigen::VectorXd x(4);
  for (int i = 0; i < 4; ++i) x(i) = rng.next_normal();
  double naive = 0.0;
  for (Eigen::Index k = 0; k < samples.betas.rows(); ++k) {
    double dot = 0.0;
    for (int j = 0; j < 4; ++j) dot += x(j) * samples.betas(k, j);
    naive += dot;
  }
  naive /= static_cast<double>(samples.betas.rows());
  CHECK(dpreg::predict_averaged(x, samples) ==
        doctest::Approx(naive).epsilon(1e-12));
  CHECK(dpreg::predict_averaged(Eigen::VectorXd::Zero(4), samples) == 0.0);

  // Degenerate bag: every draw identical.
  PosteriorSamples constant;
  constant.betas = Eigen::MatrixXd::Ones(10, 4) * 0.25;
  constant.lambdas = Eigen::VectorXd::Ones(10);
  constant.lambda0s = Eigen::VectorXd::Ones(10);
  GaussianPosterior point;
  point.mean = Eigen::VectorXd::Constant(4, 0.25);
  point.precision = Eigen::MatrixXd::Identity(4, 4);
  CHECK(dpreg::predict_averaged(x, constant) ==
        doctest::Approx(dpreg::predict_point(x, point)).epsilon(1e-12));

  PosteriorSamples empty;
  empty.betas.resize(0, 4);
  empty.lambdas.resize(0);
  empty.lambda0s.resize(0);
  CHECK_THROWS_AS(dpreg::predict_averaged(x, empty), std::invalid_argument);
}

TEST_CASE("posterior JSON round-trip") {
  RngStream rng(73, 0);
  const dpreg::Dataset data = dpreg::generate_auxiliary(40, 3, 1.0, 1.0, rng);
  const GaussianPosterior p = posterior_fixed(dpreg::sufficient_stats(data),
                                              FixedPrecisionPrior{1, 1, {}});
  const GaussianPosterior back =
      dpreg::posterior_from_json(dpreg::posterior_to_json(p));
  CHECK(back.mean == p.mean);
  CHECK(back.precision == p.precision);
  CHECK(back.repaired == p.repaired);
}

TEST_CASE("samples CSV has one row per draw") {
  PosteriorSamples samples;
  samples.betas = Eigen::MatrixXd::Ones(3, 2);
  samples.lambdas = Eigen::VectorXd::Ones(3);
  samples.lambda0s = Eigen::VectorXd::Ones(3);
  const std::string csv = dpreg::samples_to_csv(samples);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
  CHECK(csv.rfind("beta1,beta2,lambda,lambda0\n", 0) == 0);
}
