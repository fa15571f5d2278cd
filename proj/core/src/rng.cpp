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

#include "airfeel/rng.hpp"

#include <stdexcept>

namespace airfeel {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v + kGolden)); }

}  // namespace

std::string_view to_string(StreamPurpose purpose) {
  switch (purpose) {
    case StreamPurpose::task: return "task";
    case StreamPurpose::init: return "init";
    case StreamPurpose::train: return "train";
    case StreamPurpose::holdout: return "holdout";
    case StreamPurpose::pool: return "pool";
    case StreamPurpose::channel: return "channel";
    case StreamPurpose::noise: return "noise";
    case StreamPurpose::resample: return "resample";
    case StreamPurpose::probe: return "probe";
    case StreamPurpose::replay: return "replay";
  }
  return "unknown";
}

std::uint64_t stream_key(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t repeat,
                         std::uint64_t device, std::uint64_t round) {
  std::uint64_t h = mix64(master_seed ^ 0x6A09E667F3BCC908ULL);
  h = absorb(h, static_cast<std::uint64_t>(purpose));
  h = absorb(h, repeat);
  h = absorb(h, device);
  h = absorb(h, round);
  return h;
}

Rng::Rng(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t repeat, std::uint64_t device,
         std::uint64_t round)
    : key_(stream_key(master_seed, purpose, repeat, device, round)) {}

Rng::result_type Rng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::normal() { return normal_(*this); }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
}

}  // namespace airfeel
