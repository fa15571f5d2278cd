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
#include <filesystem>
#include <memory>
#include <vector>

#include "airfeel/nn.hpp"
#include "airfeel/rng.hpp"

namespace airfeel::data {

using nn::Sample;

/// Gaussian class-conditional task: a label is drawn uniformly, the
/// features are its class mean plus isotropic noise, and with probability
/// `label_noise_prob` the reported label is replaced by a different class.
struct SyntheticTaskSpec {
  std::size_t class_count = 5;
  std::size_t feature_dim = 16;
  std::vector<std::vector<double>> class_means;
  double noise_std = 0.6;
  double label_noise_prob = 0.0;

  void validate() const;
};

/// Unit-norm random class means with pairwise distance >= min_separation,
/// drawn from the `task` stream of `seed`.
SyntheticTaskSpec make_task(std::size_t class_count, std::size_t feature_dim, double noise_std,
                            double label_noise_prob, std::uint64_t seed, double min_separation = 1.0);

/// 5 classes, 16 features, noise 0.6.
SyntheticTaskSpec default_task(std::uint64_t seed);

Sample draw_synthetic(const SyntheticTaskSpec& spec, Rng& rng);

/// Where samples come from: the synthetic distribution itself, or a finite
/// pool (materialized synthetic samples or an IDX file) that every device
/// holds a copy of.
class SampleSource {
 public:
  enum class PoolMode { bootstrap, sequential };

  static SampleSource synthetic(std::shared_ptr<const SyntheticTaskSpec> spec);
  static SampleSource pool(std::shared_ptr<const std::vector<Sample>> samples, PoolMode mode = PoolMode::bootstrap);

  bool is_synthetic() const noexcept { return spec_ != nullptr; }
  const SyntheticTaskSpec* spec() const noexcept { return spec_.get(); }
  const std::vector<Sample>* samples() const noexcept { return pool_.get(); }
  PoolMode mode() const noexcept { return mode_; }

 private:
  std::shared_ptr<const SyntheticTaskSpec> spec_;
  std::shared_ptr<const std::vector<Sample>> pool_;
  PoolMode mode_ = PoolMode::bootstrap;
};

/// One device's acquisition stream for one round. A value object: copies
/// advance independently.
class SampleStream {
 public:
  SampleStream(SampleSource source, Rng rng);

  /// Stream keyed by (seed, train, repeat, device, round).
  static SampleStream for_round(const SampleSource& source, std::uint64_t seed, std::uint64_t repeat,
                                std::uint64_t device, std::uint64_t round);

  /// Next sample. Throws DataError when a sequential pool is exhausted.
  Sample next();
  /// n samples; n must be >= 1.
  std::vector<Sample> draw(std::size_t n);

  std::uint64_t stream_id() const noexcept { return rng_.key(); }
  std::size_t drawn() const noexcept { return drawn_; }

 private:
  SampleSource source_;
  Rng rng_;
  std::size_t drawn_ = 0;
};

/// n samples from the reserved `holdout` stream of `seed`.
std::vector<Sample> holdout(const SyntheticTaskSpec& spec, std::size_t n, std::uint64_t seed);

/// n samples from the `pool` stream of (seed, repeat, device): a finite
/// training set owned by one device.
std::vector<Sample> materialize_pool(const SyntheticTaskSpec& spec, std::size_t n, std::uint64_t seed,
                                     std::uint64_t repeat = 0, std::uint64_t device = 0);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled to [0, 1] and flattened row-major. Throws DataError on
/// bad magic, truncation, or image/label count mismatch.
std::vector<Sample> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

}  // namespace airfeel::data
