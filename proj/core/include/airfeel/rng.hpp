// Copyright 2026 The AirFEEL Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace airfeel {

/// Purpose labels for random substreams. Every consumer of randomness draws
/// from a stream keyed by (master seed, purpose, repeat, device, round), so
/// evaluation order and thread scheduling never change results.
enum class StreamPurpose : std::uint64_t {
  task = 1,      // synthetic class means
  init = 2,      // model weight initialization
  train = 3,     // per-device, per-round sample acquisition
  holdout = 4,   // validation samples, never used for training
  pool = 5,      // materialized finite training pool
  channel = 6,   // block-fading magnitudes
  noise = 7,     // aggregation noise
  resample = 8,  // importance resampling
  probe = 9,     // theory diagnostics probes
  replay = 10,   // round replays for bound checks
};

std::string_view to_string(StreamPurpose purpose);

/// Counter-based generator: output i is a SplitMix64 finalization of
/// key + (i + 1) * golden-gamma. The key is a hash of the stream coordinates.
/// Satisfies UniformRandomBitGenerator so it plugs into <random>.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t repeat = 0,
      std::uint64_t device = 0, std::uint64_t round = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream key without constructing a generator; used for stream-id bookkeeping.
std::uint64_t stream_key(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t repeat = 0,
                         std::uint64_t device = 0, std::uint64_t round = 0);

}  // namespace airfeel
