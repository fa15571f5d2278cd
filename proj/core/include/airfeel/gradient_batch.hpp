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
#include <span>
#include <vector>

namespace airfeel {

/// Per-sample gradients of one device batch, stored row-major (n x dim).
///
/// `weights[i]` is the importance correction p_i / q_i attached to row i
/// after resampling; an un-resampled batch carries unit weights and
/// `raw_count == size()`. `raw_count` always counts samples actually
/// acquired from the sensor, which is what the sensing budget pays for.
struct GradientBatch {
  std::size_t dim = 0;
  std::vector<double> grads;
  std::vector<double> norms;
  std::vector<double> weights;
  std::size_t raw_count = 0;
  bool upsampled = false;

  explicit GradientBatch(std::size_t dimension = 0) : dim(dimension) {}

  std::size_t size() const noexcept { return norms.size(); }
  bool empty() const noexcept { return norms.empty(); }

  std::span<const double> row(std::size_t i) const { return {grads.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {grads.data() + i * dim, dim}; }

  /// Appends one freshly acquired gradient (unit weight, counted as raw).
  void append(std::span<const double> gradient);
};

/// sum_j weights[j] * grads[j] / size(). For a resampled batch this is the
/// unbiased importance-sampling estimate of the raw batch mean.
std::vector<double> weighted_mean(const GradientBatch& batch);

/// Plain mean of the rows, ignoring weights.
std::vector<double> plain_mean(const GradientBatch& batch);

}  // namespace airfeel
