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

#include "dpreg/projection.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpreg {

Bounds::Bounds(double bx, double by) : b_x(bx), b_y(by) {
  if (!(bx > 0.0) || !std::isfinite(bx) || !(by > 0.0) || !std::isfinite(by)) {
    throw std::invalid_argument("Bounds: b_x and b_y must be positive finite");
  }
}

ThresholdMultipliers::ThresholdMultipliers(double wx, double wy)
    : omega_x(wx), omega_y(wy) {
  if (!(wx > 0.0) || !std::isfinite(wx) || !(wy > 0.0) || !std::isfinite(wy)) {
    throw std::invalid_argument(
        "ThresholdMultipliers: multipliers must be positive finite");
  }
}

Dataset project_dataset(const Dataset& d, const Bounds& bounds) {
  Dataset out = d;
  for (Eigen::Index i = 0; i < out.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.inputs.cols(); ++j) {
      out.inputs(i, j) = clip_scalar(out.inputs(i, j), bounds.b_x);
    }
  }
  for (Eigen::Index i = 0; i < out.targets.size(); ++i) {
    out.targets(i) = clip_scalar(out.targets(i), bounds.b_y);
  }
  return out;
}

std::size_t count_out_of_bounds(const Dataset& d, const Bounds& bounds) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.inputs.cols(); ++j) {
      count += std::abs(d.inputs(i, j)) > bounds.b_x;
    }
  }
  for (Eigen::Index i = 0; i < d.targets.size(); ++i) {
    count += std::abs(d.targets(i)) > bounds.b_y;
  }
  return count;
}

Bounds thresholds_from_std(const Dataset& d, const ThresholdMultipliers& m) {
  if (d.size() == 0) {
    throw std::invalid_argument("thresholds_from_std: empty dataset");
  }
  // sigma_x pools all input entries across every dimension.
  const double n_x = static_cast<double>(d.inputs.size());
  const double mean_x = d.inputs.mean();
  const double var_x =
      (d.inputs.array() - mean_x).square().sum() / n_x;
  const double n_y = static_cast<double>(d.targets.size());
  const double mean_y = d.targets.mean();
  const double var_y = (d.targets.array() - mean_y).square().sum() / n_y;
  const double sigma_x = std::sqrt(var_x);
  const double sigma_y = std::sqrt(var_y);
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
    throw std::invalid_argument(
        "thresholds_from_std: zero standard deviation (degenerate data)");
  }
  return Bounds(m.omega_x * sigma_x, m.omega_y * sigma_y);
}

Dataset transform_dataset(const Dataset& d,
                          const std::function<double(double)>& phi_x,
                          const std::function<double(double)>& phi_y,
                          const Bounds& bounds) {
  Dataset out = d;
  for (Eigen::Index i = 0; i < out.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.inputs.cols(); ++j) {
      const double v = phi_x(out.inputs(i, j));
      if (!(std::abs(v) <= bounds.b_x)) {
        std::ostringstream msg;
        msg << "transform_dataset: phi_x output " << v << " at (" << i << ","
            << j << ") violates bound " << bounds.b_x;
        throw std::invalid_argument(msg.str());
      }
      out.inputs(i, j) = v;
    }
  }
  for (Eigen::Index i = 0; i < out.targets.size(); ++i) {
    const double v = phi_y(out.targets(i));
    if (!(std::abs(v) <= bounds.b_y)) {
      std::ostringstream msg;
      msg << "transform_dataset: phi_y output " << v << " at row " << i
          << " violates bound " << bounds.b_y;
      throw std::invalid_argument(msg.str());
    }
    out.targets(i) = v;
  }
  return out;
}

}  // namespace dpreg
