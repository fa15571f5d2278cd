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
#include <string>
#include <string_view>
#include <vector>

#include "airfeel/aircomp.hpp"
#include "airfeel/budget.hpp"
#include "airfeel/nn.hpp"

namespace airfeel {

inline constexpr int kConfigSchemaVersion = 1;

enum class SensingMode { reweight, baseline };

std::string_view to_string(SensingMode mode);
SensingMode sensing_mode_from_string(std::string_view name);

/// A power schedule paired with a sensing mode, written "power/sensing".
/// A bare power name means the reweight sensing mode.
struct SchemeSpec {
  aircomp::PowerScheme power = aircomp::PowerScheme::proposed;
  SensingMode sensing = SensingMode::reweight;

  std::string name() const;
  static SchemeSpec parse(std::string_view text);
  bool operator==(const SchemeSpec&) const = default;
};

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "idx"
  std::size_t class_count = 5;
  std::size_t feature_dim = 16;
  double noise_std = 0.6;
  double label_noise_prob = 0.0;
  double min_class_separation = 1.0;
  /// 0 draws fresh samples every round; otherwise each device owns a finite
  /// pool of this size and samples it with replacement.
  std::size_t pool_size_per_device = 0;
  std::string idx_train_images;
  std::string idx_train_labels;
  std::string idx_holdout_images;
  std::string idx_holdout_labels;
};

struct SensingConfig {
  double alpha = 0.1;
  std::size_t b_min = 4;
  std::size_t b_max = 32;
  double theta_bar_initial = 0.0;
};

struct PowerConfig {
  double q = 1.0;
  double channel_floor = 0.1;
  /// Constants of the optimal schedule. A zero sample budget means R * b_max.
  double optimal_sample_budget = 0.0;
  double optimal_lipschitz = 1.0;
  double optimal_sigma = 1.0;
  double loss_floor = 0.0;  // F* used by the optimality-gap proxy
  double gap_floor = 1e-6;
};

struct TheoryConfig {
  std::size_t calibration_rounds = 200;
  std::size_t probe_samples = 1000;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t devices = 5;
  std::size_t rounds = 2000;
  double learning_rate = 0.01;
  std::size_t repeats = 5;
  std::size_t eval_period = 10;
  std::size_t smoothing_window = 100;
  std::size_t holdout_size = 1000;
  bool diagnostics = false;
  nn::ArchSpec arch{{16, 64, 64, 5}, nn::Activation::relu, nn::Loss::cross_entropy};
  DataConfig data;
  SensingConfig sensing;
  PowerConfig power;
  aircomp::CommParams comm;
  budget::SystemParams system;
  TheoryConfig theory;
  std::vector<SchemeSpec> schemes;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

ExperimentConfig default_config();

/// Strict parse: unknown keys, wrong types, and invalid values raise
/// ConfigError with the dotted field name.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Pretty-printed JSON with every field, suitable as a starting config.
std::string dump_config(const ExperimentConfig& config);

/// Stable 64-bit hex digest of every field except the scheme list.
std::string config_fingerprint(const ExperimentConfig& config);

}  // namespace airfeel
