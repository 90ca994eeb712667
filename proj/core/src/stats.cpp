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

#include "dpreg/stats.hpp"

#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace dpreg {
namespace {

// Kahan compensated accumulator.
struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

SufficientStats SufficientStats::zero(int d) {
  if (d < 0) throw std::invalid_argument("SufficientStats::zero: d < 0");
  SufficientStats s;
  s.xx = Eigen::MatrixXd::Zero(d, d);
  s.xy = Eigen::VectorXd::Zero(d);
  s.yy = 0.0;
  s.n = 0;
  s.noisy = false;
  return s;
}

SufficientStats sufficient_stats(const Dataset& d) {
  const int dim = d.dim();
  const Eigen::Index n = d.inputs.rows();
  std::vector<Kahan> upper(static_cast<std::size_t>(dim) * (dim + 1) / 2);
  std::vector<Kahan> xy(static_cast<std::size_t>(dim));
  Kahan yy;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.inputs.row(i);
    const double y = d.targets(i);
    std::size_t k = 0;
    for (int a = 0; a < dim; ++a) {
      for (int b = a; b < dim; ++b) {
        upper[k++].add(x(a) * x(b));
      }
      xy[static_cast<std::size_t>(a)].add(x(a) * y);
    }
    yy.add(y * y);
  }
  SufficientStats s = SufficientStats::zero(dim);
  std::size_t k = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      s.xx(a, b) = upper[k].sum;
      s.xx(b, a) = upper[k].sum;
      ++k;
    }
    s.xy(a) = xy[static_cast<std::size_t>(a)].sum;
  }
  s.yy = yy.sum;
  s.n = static_cast<std::size_t>(n);
  return s;
}

SufficientStats combine_stats(const SufficientStats& a,
                              const SufficientStats& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("combine_stats: dimension mismatch");
  }
  SufficientStats s;
  s.xx = a.xx + b.xx;
  s.xy = a.xy + b.xy;
  s.yy = a.yy + b.yy;
  s.n = a.n + b.n;
  s.noisy = a.noisy || b.noisy;
  return s;
}

std::string stats_to_json(const SufficientStats& s) {
  const int d = s.dim();
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(d) * (d + 1) / 2);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) upper.push_back(s.xx(a, b));
  }
  nlohmann::ordered_json j;
  j["d"] = d;
  j["n"] = s.n;
  j["noisy"] = s.noisy;
  j["xx_upper"] = upper;
  j["xy"] = std::vector<double>(s.xy.data(), s.xy.data() + s.xy.size());
  j["yy"] = s.yy;
  return j.dump();
}

SufficientStats stats_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int d = j.at("d").get<int>();
  SufficientStats s = SufficientStats::zero(d);
  s.n = j.at("n").get<std::size_t>();
  s.noisy = j.at("noisy").get<bool>();
  const auto upper = j.at("xx_upper").get<std::vector<double>>();
  if (upper.size() != static_cast<std::size_t>(d) * (d + 1) / 2) {
    throw std::invalid_argument("stats_from_json: bad xx_upper length");
  }
  std::size_t k = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      s.xx(a, b) = upper[k];
      s.xx(b, a) = upper[k];
      ++k;
    }
  }
  const auto xy = j.at("xy").get<std::vector<double>>();
  if (xy.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("stats_from_json: bad xy length");
  }
  for (int a = 0; a < d; ++a) s.xy(a) = xy[static_cast<std::size_t>(a)];
  s.yy = j.at("yy").get<double>();
  return s;
}

}  // namespace dpreg
