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

#include "dpreg/projection.hpp"
#include "dpreg/rng.hpp"

using dpreg::Bounds;
using dpreg::clip_scalar;
using dpreg::Dataset;
using dpreg::ThresholdMultipliers;

namespace {

Dataset random_dataset(std::size_t n, int d, dpreg::RngStream& rng,
                       double scale = 1.0) {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(n), d);
  out.targets.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.inputs.rows(); ++i) {
    for (int j = 0; j < d; ++j) out.inputs(i, j) = scale * rng.next_normal();
    out.targets(i) = scale * rng.next_normal();
  }
  return out;
}

}  // namespace

TEST_CASE("clip_scalar basics") {
  CHECK(clip_scalar(0.5, 1.5) == 0.5);
  CHECK(clip_scalar(3.0, 1.5) == 1.5);
  CHECK(clip_scalar(-3.0, 1.5) == -1.5);
}

TEST_CASE("clip_scalar stays in range over random pairs") {
  dpreg::RngStream rng(17, 0);
  for (int i = 0; i < 100000; ++i) {
    const double v = 20.0 * (rng.next_uniform() - 0.5);
    const double b = rng.next_uniform() * 5.0 + 1e-6;
    const double c = clip_scalar(v, b);
    CHECK(std::abs(c) <= b);
    if (std::abs(v) <= b) CHECK(c == v);
  }
}

TEST_CASE("clip_scalar is odd and 1-Lipschitz") {
  dpreg::RngStream rng(18, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = 10.0 * (rng.next_uniform() - 0.5);
    const double w = 10.0 * (rng.next_uniform() - 0.5);
    const double b = rng.next_uniform() * 3.0 + 0.1;
    CHECK(clip_scalar(-v, b) == -clip_scalar(v, b));
    CHECK(std::abs(clip_scalar(v, b) - clip_scalar(w, b)) <=
          std::abs(v - w) + 1e-15);
  }
}

TEST_CASE("project_dataset is a no-op under dominating bounds") {
  dpreg::RngStream rng(19, 0);
  const Dataset d = random_dataset(50, 4, rng);
  const Dataset p = project_dataset(d, Bounds(1e12, 1e12));
  CHECK(p.inputs == d.inputs);
  CHECK(p.targets == d.targets);
}

TEST_CASE("project_dataset saturates fully out-of-range data") {
  Dataset d;
  d.inputs.resize(3, 2);
  d.inputs << 5, -9, 7, -8, 6, 9;
  d.targets.resize(3);
  d.targets << -4, 4, 5;
  const Dataset p = project_dataset(d, Bounds(1.0, 2.0));
  CHECK((p.inputs.array().abs() == 1.0).all());
  CHECK((p.targets.array().abs() == 2.0).all());
}

TEST_CASE("project_dataset modifies exactly the outliers") {
  dpreg::RngStream rng(20, 0);
  Dataset d = random_dataset(30, 3, rng, 0.1);
  d.inputs(4, 1) = 9.0;
  d.inputs(11, 0) = -7.5;
  d.targets(2) = 8.8;
  const Bounds b(1.0, 1.0);
  CHECK(dpreg::count_out_of_bounds(d, b) == 3);
  const Dataset p = project_dataset(d, b);
  std::size_t modified = 0;  // independent scan
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.inputs.cols(); ++j) {
      modified += p.inputs(i, j) != d.inputs(i, j);
    }
    modified += p.targets(i) != d.targets(i);
  }
  CHECK(modified == 3);
}

TEST_CASE("projection is idempotent exactly") {
  dpreg::RngStream rng(21, 0);
  const Dataset d = random_dataset(40, 5, rng, 3.0);
  const Bounds b(0.5, 0.8);
  const Dataset once = project_dataset(d, b);
  const Dataset twice = project_dataset(once, b);
  CHECK(once.inputs == twice.inputs);
  CHECK(once.targets == twice.targets);
}

TEST_CASE("enlarging bounds never modifies more entries") {
  dpreg::RngStream rng(22, 0);
  const Dataset d = random_dataset(60, 4, rng, 2.0);
  std::size_t previous = dpreg::count_out_of_bounds(d, Bounds(0.1, 0.1));
  for (double b = 0.2; b < 4.0; b += 0.2) {
    const std::size_t current = dpreg::count_out_of_bounds(d, Bounds(b, b));
    CHECK(current <= previous);
    previous = current;
  }
}

TEST_CASE("thresholds_from_std rejects degenerate data") {
  Dataset d;
  d.inputs = Eigen::MatrixXd::Constant(5, 2, 3.0);
  d.targets.resize(5);
  d.targets << 1, 2, 3, 4, 5;
  CHECK_THROWS_AS(thresholds_from_std(d, ThresholdMultipliers(1.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("thresholds_from_std multiplier-1 identity") {
  Dataset d;
  d.inputs.resize(2, 1);
  d.inputs << 0.1, 0.5;  // pooled sigma = 0.2
  d.targets.resize(2);
  d.targets << 0.0, 1.0;
  const Bounds b = thresholds_from_std(d, ThresholdMultipliers(1.0, 1.0));
  CHECK(b.b_x == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(b.b_y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("thresholds_from_std matches a two-pass oracle") {
  dpreg::RngStream rng(23, 0);
  const Dataset d = random_dataset(200, 6, rng, 1.7);
  const ThresholdMultipliers m(0.7, 1.3);
  const Bounds b = thresholds_from_std(d, m);
  // Two-pass population variance over the pooled input entries.
  double mean = 0.0;
  const double count = static_cast<double>(d.inputs.size());
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.inputs.cols(); ++j) mean += d.inputs(i, j);
  }
  mean /= count;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.inputs.cols(); ++j) {
      ss += (d.inputs(i, j) - mean) * (d.inputs(i, j) - mean);
    }
  }
  const double sigma_x = std::sqrt(ss / count);
  double mean_y = 0.0;
  for (Eigen::Index i = 0; i < d.targets.size(); ++i) mean_y += d.targets(i);
  mean_y /= static_cast<double>(d.targets.size());
  double ss_y = 0.0;
  for (Eigen::Index i = 0; i < d.targets.size(); ++i) {
    ss_y += (d.targets(i) - mean_y) * (d.targets(i) - mean_y);
  }
  const double sigma_y =
      std::sqrt(ss_y / static_cast<double>(d.targets.size()));
  CHECK(b.b_x == doctest::Approx(0.7 * sigma_x).epsilon(1e-9));
  CHECK(b.b_y == doctest::Approx(1.3 * sigma_y).epsilon(1e-9));
}

TEST_CASE("transform_dataset identity under wide bounds") {
  dpreg::RngStream rng(24, 0);
  const Dataset d = random_dataset(30, 3, rng);
  const auto id = [](double v) { return v; };
  const Dataset t = transform_dataset(d, id, id, Bounds(100.0, 100.0));
  CHECK(t.inputs == d.inputs);
  CHECK(t.targets == d.targets);
}

TEST_CASE("transform_dataset with clip maps equals project_dataset") {
  dpreg::RngStream rng(25, 0);
  const Dataset d = random_dataset(30, 3, rng, 2.0);
  const Bounds b(0.6, 0.9);
  const Dataset t = transform_dataset(
      d, [&](double v) { return clip_scalar(v, b.b_x); },
      [&](double v) { return clip_scalar(v, b.b_y); }, b);
  const Dataset p = project_dataset(d, b);
  CHECK(t.inputs == p.inputs);
  CHECK(t.targets == p.targets);
}

TEST_CASE("transform_dataset accepts tanh squashing and rejects violations") {
  dpreg::RngStream rng(26, 0);
  const Dataset d = random_dataset(100, 2, rng, 5.0);
  const Bounds b(0.7, 1.1);
  const Dataset t = transform_dataset(
      d, [&](double v) { return b.b_x * std::tanh(v); },
      [&](double v) { return b.b_y * std::tanh(v); }, b);
  CHECK((t.inputs.array().abs() < b.b_x).all());
  CHECK((t.targets.array().abs() < b.b_y).all());

  // A map breaking the declared bound must be a hard error.
  CHECK_THROWS_AS(transform_dataset(
                      d, [](double v) { return 2.0 * v; },
                      [](double v) { return v; }, Bounds(0.5, 100.0)),
                  std::invalid_argument);
}
