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

#ifndef DPREG_STATS_HPP_
#define DPREG_STATS_HPP_

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "dpreg/dataset.hpp"

namespace dpreg {

/// The sufficient statistics of linear regression: the only object that
/// crosses the privacy barrier.
///
///   xx = sum_i x_i x_i^T   (d x d, exactly symmetric)
///   xy = sum_i x_i y_i     (d)
///   yy = sum_i y_i^2       (scalar)
///
/// `noisy` records whether Laplace noise has been spent on this value;
/// clean statistics are positive semidefinite, noisy ones may not be.
/// Symmetry is structural: only the upper triangle is ever computed or
/// perturbed, then mirrored.
struct SufficientStats {
  Eigen::MatrixXd xx;
  Eigen::VectorXd xy;
  double yy = 0.0;
  std::size_t n = 0;
  bool noisy = false;

  int dim() const { return static_cast<int>(xy.size()); }

  static SufficientStats zero(int d);
};

/// Exact sums over the dataset with compensated (Kahan) accumulation, so
/// chunked and whole-dataset computations agree to ~1e-10 even at n = 1e6.
/// An empty dataset yields valid all-zero statistics with n = 0.
SufficientStats sufficient_stats(const Dataset& d);

/// Elementwise sums; n adds; noisy flags OR together.
SufficientStats combine_stats(const SufficientStats& a,
                              const SufficientStats& b);

/// Wire format: flat JSON object with fields d, n, noisy, xx_upper
/// (row-major upper triangle), xy, yy.
std::string stats_to_json(const SufficientStats& s);
SufficientStats stats_from_json(const std::string& text);

}  // namespace dpreg

#endif  // DPREG_STATS_HPP_
