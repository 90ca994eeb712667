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

#include "dpreg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dpreg {
namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::uint64_t x = seed;
  x ^= 0xA3EC647659359ACDULL;
  std::uint64_t s0 = splitmix64(x);
  x ^= stream;
  state_[0] = splitmix64(x);
  state_[1] = splitmix64(x);
  state_[2] = splitmix64(x);
  state_[3] = splitmix64(x) ^ s0;
  // xoshiro must not start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_uniform() {
  // (k + 1/2) * 2^-53 with k in [0, 2^53): strictly inside (0, 1) and can
  // never equal 1/2 exactly (k + 1/2 is never a power of two).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be > 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double RngStream::next_laplace(double scale) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("next_laplace: scale must be > 0");
  }
  const double t = next_uniform() - 0.5;
  const double sign = t > 0.0 ? 1.0 : -1.0;
  return sign * scale * std::log1p(-2.0 * std::abs(t));
}

double RngStream::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

double RngStream::next_gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("next_gamma: shape and rate must be > 0");
  }
  if (shape < 1.0) {
    const double u = next_uniform();
    return next_gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v / rate;
    }
  }
}

std::uint64_t derive_stream(std::string_view purpose,
                            std::initializer_list<std::uint64_t> indices) {
  // FNV-1a over the label bytes, then one splitmix64 round per index.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  for (std::uint64_t idx : indices) {
    std::uint64_t x = h ^ (idx + 0x9E3779B97F4A7C15ULL);
    h = splitmix64(x);
  }
  return h;
}

RngStream derive_rng(std::uint64_t root_seed, std::string_view purpose,
                     std::initializer_list<std::uint64_t> indices) {
  return RngStream(root_seed, derive_stream(purpose, indices));
}

std::uint64_t seed_commitment(std::uint64_t seed) {
  std::uint64_t x = seed ^ 0x5EEDC0441717E4D1ULL;
  std::uint64_t a = splitmix64(x);
  std::uint64_t b = splitmix64(x);
  return a ^ rotl(b, 32);
}

}  // namespace dpreg
