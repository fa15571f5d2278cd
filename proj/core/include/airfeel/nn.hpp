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

#include "airfeel/gradient_batch.hpp"
#include "airfeel/rng.hpp"

namespace airfeel::nn {

enum class Activation { relu, tanh };
enum class Loss { cross_entropy, squared_error };

/// Fully connected feed-forward architecture. Hidden layers apply
/// `activation`; the output layer is affine (logits for cross-entropy).
/// No normalization layers: they would mix samples and destroy per-sample
/// gradients.
struct ArchSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::relu;
  Loss loss = Loss::cross_entropy;

  /// Throws std::invalid_argument unless there are >= 2 positive widths.
  void validate() const;
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }
};

/// Number of weights plus biases implied by `arch`.
std::size_t param_count(const ArchSpec& arch);

struct Sample {
  std::vector<double> features;
  /// Class index. For squared-error models with a single output the label
  /// doubles as the real-valued regression target.
  std::size_t label = 0;
};

/// Architecture plus a flat weight vector. Layer l stores its weight matrix
/// row-major (out x in) followed by its bias vector.
class Model {
 public:
  Model(ArchSpec arch, std::vector<double> weights);

  static Model zeros(const ArchSpec& arch);
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static Model initialize(const ArchSpec& arch, Rng& rng);

  const ArchSpec& arch() const noexcept { return arch_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t dim() const noexcept { return weights_.size(); }

  /// Offset of layer l's weight matrix inside the flat vector.
  std::size_t layer_offset(std::size_t layer) const { return offsets_[layer]; }

 private:
  ArchSpec arch_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
};

/// Raw network outputs (logits or regression values) for one sample.
std::vector<double> forward(const Model& model, const Sample& sample);

/// Loss of one sample.
double sample_loss(const Model& model, const Sample& sample);

/// Loss of every sample in `batch`; their mean is the batch loss.
std::vector<double> per_sample_losses(const Model& model, std::span<const Sample> batch);

/// Mean loss over `batch`. Throws std::invalid_argument on an empty batch.
double mean_loss(const Model& model, std::span<const Sample> batch);

/// Exact gradient of each sample's loss, with Euclidean norms filled in.
/// Throws DimensionError on shape mismatch and NumericError on non-finite
/// gradients.
GradientBatch per_sample_gradients(const Model& model, std::span<const Sample> batch);

/// Appends one sample's gradient to `out` without reallocating the other rows.
void append_sample_gradient(const Model& model, const Sample& sample, GradientBatch& out);

/// Gradient of the mean batch loss computed layer-by-layer over the whole
/// batch (forward all, then backward all). Independent of the per-sample
/// path; used as a cross-check and for full-gradient probes.
std::vector<double> batch_gradient(const Model& model, std::span<const Sample> batch);

/// Returns weights - eta * direction. The input model is untouched.
Model apply_update(const Model& model, std::span<const double> direction, double eta);

}  // namespace airfeel::nn
