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

#ifndef DPREG_PROJECTION_HPP_
#define DPREG_PROJECTION_HPP_

#include <functional>

#include "dpreg/dataset.hpp"

namespace dpreg {

/// Per-coordinate input bound and target bound. The released noise scales
/// are calibrated to these, so they are validated strictly positive and
/// finite at construction.
struct Bounds {
  double b_x;
  double b_y;

  Bounds(double bx, double by);
};

/// Grid multipliers for deriving Bounds from data dispersion.
struct ThresholdMultipliers {
  double omega_x;
  double omega_y;

  ThresholdMultipliers(double wx, double wy);
};

/// max(-b, min(v, b)). Total, 1-Lipschitz, odd.
inline double clip_scalar(double v, double b) noexcept {
  return v < -b ? -b : (v > b ? b : v);
}

/// Projects every input entry into [-b_x, b_x] and every target into
/// [-b_y, b_y]. Entries already inside are returned bit-identical, which
/// makes the operation exactly idempotent.
Dataset project_dataset(const Dataset& d, const Bounds& bounds);

/// Counts entries (inputs + targets) that projection would modify.
std::size_t count_out_of_bounds(const Dataset& d, const Bounds& bounds);

/// Bounds from pooled dispersion: b_x = omega_x * std(all input entries),
/// b_y = omega_y * std(targets). Population (divide-by-n) standard
/// deviations; zero dispersion is an error.
Bounds thresholds_from_std(const Dataset& d, const ThresholdMultipliers& m);

/// Generalised projection: applies user maps phi_x / phi_y elementwise and
/// verifies every output lies inside the declared bounds. A violation is a
/// hard error because the privacy calibration depends on the bounds.
Dataset transform_dataset(const Dataset& d,
                          const std::function<double(double)>& phi_x,
                          const std::function<double(double)>& phi_y,
                          const Bounds& bounds);

}  // namespace dpreg

#endif  // DPREG_PROJECTION_HPP_
