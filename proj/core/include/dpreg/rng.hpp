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

#ifndef DPREG_RNG_HPP_
#define DPREG_RNG_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace dpreg {

/// Deterministic random stream identified by a (seed, stream) pair.
///
/// The same pair produces the same draw sequence on every platform: the
/// generator is a hand-rolled xoshiro256++ seeded through splitmix64, and
/// all distributions are sampled through explicit inverse-CDF or rejection
/// schemes built on `next_uniform`, never through `std::*_distribution`
/// (whose output is implementation-defined).
///
/// A single stream must not be shared between threads; derive one stream
/// per parallel unit instead (see `derive_stream`).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Raw 64-bit output.
  std::uint64_t next_u64();

  /// Uniform variate strictly inside (0, 1); never 0, 1/2 or 1 exactly,
  /// so log/sign transforms downstream are total.
  double next_uniform();

  /// Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t next_below(std::uint64_t bound);

  /// Laplace(0, scale) via the inverse-CDF transform
  /// sign(u - 1/2) * scale * ln(1 - 2|u - 1/2|).
  double next_laplace(double scale);

  /// Standard normal via Box-Muller (two uniforms per draw).
  double next_normal();

  /// Gamma(shape, rate) via Marsaglia-Tsang squeeze, boosted for shape < 1.
  double next_gamma(double shape, double rate);

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Stable stream-id derivation: FNV-1a over the purpose label, then each
/// index mixed in with splitmix64 finalisation. Used to give every repeat,
/// grid cell and chain its own independent stream under one root seed.
std::uint64_t derive_stream(std::string_view purpose,
                            std::initializer_list<std::uint64_t> indices = {});

/// Convenience: stream derived from (root_seed, purpose, indices).
RngStream derive_rng(std::uint64_t root_seed, std::string_view purpose,
                     std::initializer_list<std::uint64_t> indices = {});

/// One-way commitment to a seed for audit receipts (the seed itself is
/// not revealed in release artifacts).
std::uint64_t seed_commitment(std::uint64_t seed);

}  // namespace dpreg

#endif  // DPREG_RNG_HPP_
