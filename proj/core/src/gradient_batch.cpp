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

#include "airfeel/gradient_batch.hpp"

#include <cmath>
#include <stdexcept>

#include "airfeel/error.hpp"

namespace airfeel {

void GradientBatch::append(std::span<const double> gradient) {
  if (gradient.size() != dim) throw DimensionError("GradientBatch::append: gradient dimension mismatch");
  grads.insert(grads.end(), gradient.begin(), gradient.end());
  double sq = 0.0;
  for (double g : gradient) sq += g * g;
  norms.push_back(std::sqrt(sq));
  weights.push_back(1.0);
  ++raw_count;
}

std::vector<double> weighted_mean(const GradientBatch& batch) {
  if (batch.empty()) throw std::invalid_argument("weighted_mean: empty batch");
  std::vector<double> out(batch.dim, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double w = batch.weights[i];
    const auto g = batch.row(i);
    for (std::size_t j = 0; j < batch.dim; ++j) out[j] += w * g[j];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : out) v *= inv;
  return out;
}

std::vector<double> plain_mean(const GradientBatch& batch) {
  if (batch.empty()) throw std::invalid_argument("plain_mean: empty batch");
  std::vector<double> out(batch.dim, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto g = batch.row(i);
    for (std::size_t j = 0; j < batch.dim; ++j) out[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace airfeel
