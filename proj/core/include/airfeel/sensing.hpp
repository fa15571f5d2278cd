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
#include <functional>
#include <span>
#include <vector>

#include "airfeel/dataset.hpp"
#include "airfeel/gradient_batch.hpp"
#include "airfeel/nn.hpp"
#include "airfeel/rng.hpp"

/// AI-in-the-loop sensing control: devices keep acquiring samples until the
/// gradient-norm spread of the batch makes the upsampled batch "lucky"
/// against an adaptive threshold, then resample to a fixed batch size with
/// probabilities proportional to gradient norms.
namespace airfeel::sensing {

/// Unbiased sample variance (n - 1 denominator). Throws for fewer than 2 values.
double sample_variance(std::span<const double> values);

/// q_i = norm_i / sum(norms). All-zero norms fall back to uniform, which
/// signals a converged batch rather than an error. Negative or non-finite
/// norms throw std::invalid_argument.
std::vector<double> importance_weights(std::span<const double> norms);

/// Draws b_bar rows i.i.d. from q = importance_weights(batch.norms), with
/// replacement, and attaches the correction (1/b) / q_i to each drawn row.
/// `raw_count` is preserved.
GradientBatch resample_to(const GradientBatch& batch, std::size_t b_bar, Rng& rng);

/// (b / b_bar) * sample_variance(norms), b = norms.size().
double expected_variance_reduction(std::span<const double> norms, std::size_t b_bar);

/// Exact difference between the variance of the b_bar-draw uniform
/// resampling estimator and the b_bar-draw importance estimator with
/// sampling distribution `q`, scaled by b so it is comparable with
/// expected_variance_reduction. Computed by direct summation over the rows.
double realized_variance_reduction(const GradientBatch& raw, std::span<const double> q, std::size_t b_bar);

struct ControllerState {
  double theta_bar = 0.0;
  double alpha = 0.1;
  std::size_t b_min = 4;
  std::size_t b_max = 32;

  void validate() const;
};

struct CollectResult {
  GradientBatch batch;    // upsampled to b_max
  ControllerState state;  // threshold after the EMA update
  double theta = 0.0;     // sample variance of the norms at stopping time
  GradientBatch raw;      // the acquired gradients before resampling
};

/// Appends one newly acquired sample's gradient to the batch.
using GradientSampler = std::function<void(GradientBatch&)>;

/// Running sample variance of the norms (Welford), O(1) per appended value.
class RunningVariance {
 public:
  void push(double x);
  std::size_t count() const noexcept { return n_; }
  /// n - 1 denominator; 0 while fewer than two values are present.
  double variance() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// The stopping loop. Starts with b_min samples, then keeps acquiring one
/// sample at a time while b < b_max and b * theta / b_max < theta_bar, where
/// theta is the running sample variance of the gradient norms (0 for b < 2).
/// The batch is then resampled to b_max and theta_bar <- alpha * theta +
/// (1 - alpha) * theta_bar.
CollectResult adaptive_collect(const GradientSampler& acquire, std::size_t dim, const ControllerState& state,
                               Rng& resample_rng);

/// Same loop driven by a model and a sample stream.
CollectResult adaptive_collect(const nn::Model& model, data::SampleStream& stream, const ControllerState& state,
                               Rng& resample_rng);

/// Baseline sensing: exactly b samples, unit weights.
GradientBatch fixed_collect(const nn::Model& model, data::SampleStream& stream, std::size_t b);

struct MomentEstimate {
  double mu2 = 0.0;
  double mu4 = 0.0;
};

struct MomentPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Closed-form mean and variance of the variance reduction after
/// upsampling b samples to b_bar: mean = (b-1)/b_bar * mu2 and
/// variance = mu4/b_bar - (b-3) mu2^2 / ((b-1) b_bar).
MomentPrediction moment_prediction(const MomentEstimate& est, std::size_t b, std::size_t b_bar);

}  // namespace airfeel::sensing
