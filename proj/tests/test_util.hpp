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

// Independent oracles for the test suites. Everything here is deliberately
// naive (explicit loops, closed forms) and stays independent of the library
// code paths it checks.

#ifndef DPREG_TESTS_TEST_UTIL_HPP_
#define DPREG_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    worst = std::max({worst, hi, lo});
  }
  return worst;
}

// Asymptotic one-sample KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) {
  return 1.62762 / std::sqrt(static_cast<double>(n));
}

inline double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale)
                 : 1.0 - 0.5 * std::exp(-x / scale);
}

// Gamma(shape = integer d, rate) CDF (Erlang closed form).
inline double erlang_cdf(double x, int shape, double rate) {
  if (x <= 0.0) return 0.0;
  const double rx = rate * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < shape; ++k) {
    term *= rx / k;
    sum += term;
  }
  return 1.0 - std::exp(-rx) * sum;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil

#endif  // DPREG_TESTS_TEST_UTIL_HPP_
