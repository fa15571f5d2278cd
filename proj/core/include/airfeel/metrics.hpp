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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "airfeel/nn.hpp"

namespace airfeel::metrics {

inline constexpr int kSchemaVersion = 1;

/// Per-round bound diagnostics, present only when a run enables them.
struct RoundDiagnostics {
  double train_loss = 0.0;       // mean loss over the raw samples of the round
  double grad_norm_sq = 0.0;     // squared norm of the round's mean gradient
  double grad_variance = 0.0;    // mean per-sample deviation energy around it
  double tau = 0.0;              // noise variance per coordinate, p_n / c_r
  double descent_bound = 0.0;
  double gen_error_bound = 0.0;  // cumulative
  double gen_gap = 0.0;          // validation loss minus train loss
};

/// One evaluation point. Costs are cumulative over rounds 1..round and
/// summed over devices; `c_r` and `b_raw` describe the round itself.
struct MetricsRow {
  std::size_t round = 0;
  double validation_loss = 0.0;
  double cumulative_unit_energy = 0.0;
  std::uint64_t cumulative_raw_samples = 0;
  double joules_sensing = 0.0;
  double joules_compute = 0.0;
  double joules_comm = 0.0;
  double theta_bar = 0.0;  // mean threshold across devices after the round
  double c_r = 0.0;
  double b_raw = 0.0;      // mean raw samples per device in the round
  RoundDiagnostics diag;
};

struct MetricsRecord {
  std::vector<std::pair<std::string, std::string>> meta;  // written as "# key=value"
  bool diagnostics = false;
  std::vector<MetricsRow> rows;

  /// Value of a metadata key, if present.
  std::optional<std::string> get_meta(const std::string& key) const;
  void set_meta(const std::string& key, std::string value);

  std::vector<double> losses() const;
};

/// Mean per-sample loss over the holdout. Throws std::invalid_argument on empty input.
double validation_loss(const nn::Model& model, std::span<const nn::Sample> holdout);

/// Causal linear-kernel smoothing: output t is
///   sum_{j=0}^{m} (window - j) x[t-j] / sum_{j=0}^{m} (window - j),  m = min(t, window-1).
/// Throws std::invalid_argument on an empty series or window 0.
std::vector<double> smooth(std::span<const double> series, std::size_t window = 100);

/// Pointwise mean of equally long series.
std::vector<double> pointwise_mean(std::span<const std::vector<double>> series);

struct Crossing {
  std::size_t index = 0;
  std::size_t round = 0;
  double unit_energy = 0.0;
  std::uint64_t raw_samples = 0;
};

/// First row whose smoothed loss is <= target, with its cumulative costs.
/// `smoothed_loss` must align with `record.rows`. Returns nullopt when the
/// target is never reached.
std::optional<Crossing> crossing_cost(const MetricsRecord& record, std::span<const double> smoothed_loss,
                                      double target_loss);

std::vector<std::string> column_names(bool diagnostics);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_csv(const MetricsRecord& record, const std::filesystem::path& path);
void write_csv(const MetricsRecord& record, std::ostream& out);

/// Parses a file produced by write_csv. Throws DataError on schema mismatch.
MetricsRecord read_csv(const std::filesystem::path& path);
MetricsRecord read_csv(std::istream& in);

}  // namespace airfeel::metrics
