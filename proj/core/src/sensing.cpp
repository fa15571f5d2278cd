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

#include "airfeel/sensing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace airfeel::sensing {

double sample_variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n - 1);
}

std::vector<double> importance_weights(std::span<const double> norms) {
  if (norms.empty()) throw std::invalid_argument("importance_weights: empty norms");
  double total = 0.0;
  for (double v : norms) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("importance_weights: norms must be finite and >= 0");
    total += v;
  }
  std::vector<double> q(norms.size());
  if (total == 0.0) {
    const double u = 1.0 / static_cast<double>(norms.size());
    for (double& v : q) v = u;
    return q;
  }
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = norms[i] / total;
  return q;
}

GradientBatch resample_to(const GradientBatch& batch, std::size_t b_bar, Rng& rng) {
  if (batch.upsampled) throw std::invalid_argument("resample_to: batch already upsampled");
  if (batch.empty()) throw std::invalid_argument("resample_to: empty batch");
  if (b_bar == 0) throw std::invalid_argument("resample_to: b_bar must be >= 1");
  const std::vector<double> q = importance_weights(batch.norms);
  const double b = static_cast<double>(batch.size());
  std::discrete_distribution<std::size_t> pick(q.begin(), q.end());

  GradientBatch out(batch.dim);
  out.grads.reserve(b_bar * batch.dim);
  out.norms.reserve(b_bar);
  out.weights.reserve(b_bar);
  for (std::size_t j = 0; j < b_bar; ++j) {
    const std::size_t i = pick(rng);
    const auto g = batch.row(i);
    out.grads.insert(out.grads.end(), g.begin(), g.end());
    out.norms.push_back(batch.norms[i]);
    out.weights.push_back((1.0 / b) / q[i]);
  }
  out.raw_count = batch.raw_count;
  out.upsampled = true;
  return out;
}

double expected_variance_reduction(std::span<const double> norms, std::size_t b_bar) {
  if (norms.size() < 2) throw std::invalid_argument("expected_variance_reduction: need b >= 2");
  if (b_bar == 0) throw std::invalid_argument("expected_variance_reduction: b_bar must be >= 1");
  return static_cast<double>(norms.size()) / static_cast<double>(b_bar) * sample_variance(norms);
}

double realized_variance_reduction(const GradientBatch& raw, std::span<const double> q, std::size_t b_bar) {
  const std::size_t b = raw.size();
  if (b < 2) throw std::invalid_argument("realized_variance_reduction: need b >= 2");
  if (q.size() != b) throw std::invalid_argument("realized_variance_reduction: q size mismatch");
  const std::vector<double> mean = plain_mean(raw);
  double mean_sq = 0.0;
  for (double v : mean) mean_sq += v * v;
  const double bd = static_cast<double>(b);
  // Per-draw second moments: uniform draws x = g_i; importance draws
  // x = g_i / (b q_i). Both estimators share the mean, so the variance
  // difference is the difference of second moments.
  double second_uniform = 0.0;
  double second_importance = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double n2 = raw.norms[i] * raw.norms[i];
    second_uniform += n2 / bd;
    if (n2 > 0.0) {
      if (!(q[i] > 0.0)) throw std::invalid_argument("realized_variance_reduction: q_i = 0 on a nonzero gradient");
      second_importance += n2 / (bd * bd * q[i]);
    }
  }
  const double var_uniform = second_uniform - mean_sq;
  const double var_importance = second_importance - mean_sq;
  return bd * (var_uniform - var_importance) / static_cast<double>(b_bar);
}

void ControllerState::validate() const {
  if (!(theta_bar >= 0.0)) throw std::invalid_argument("ControllerState: theta_bar must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ControllerState: alpha must lie in [0, 1]");
  if (b_min < 1 || b_max < 1) throw std::invalid_argument("ControllerState: batch sizes must be >= 1");
  if (b_min > b_max) throw std::invalid_argument("ControllerState: b_min must not exceed b_max");
}

void RunningVariance::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningVariance::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

CollectResult adaptive_collect(const GradientSampler& acquire, std::size_t dim, const ControllerState& state,
                               Rng& resample_rng) {
  state.validate();
  GradientBatch batch(dim);
  batch.grads.reserve(state.b_max * dim);
  RunningVariance spread;
  const auto acquire_one = [&] {
    const std::size_t before = batch.size();
    acquire(batch);
    if (batch.size() != before + 1) throw std::logic_error("adaptive_collect: sampler must append exactly one gradient");
    spread.push(batch.norms.back());
  };

  for (std::size_t i = 0; i < state.b_min; ++i) acquire_one();
  double theta = spread.variance();
  const double b_max = static_cast<double>(state.b_max);
  while (batch.size() < state.b_max && static_cast<double>(batch.size()) * theta / b_max < state.theta_bar) {
    acquire_one();
    theta = spread.variance();
  }

  CollectResult result;
  result.theta = theta;
  result.state = state;
  result.state.theta_bar = state.alpha * theta + (1.0 - state.alpha) * state.theta_bar;
  result.batch = resample_to(batch, state.b_max, resample_rng);
  result.raw = std::move(batch);
  return result;
}

CollectResult adaptive_collect(const nn::Model& model, data::SampleStream& stream, const ControllerState& state,
                               Rng& resample_rng) {
  const GradientSampler acquire = [&](GradientBatch& batch) {
    nn::append_sample_gradient(model, stream.next(), batch);
  };
  return adaptive_collect(acquire, model.dim(), state, resample_rng);
}

GradientBatch fixed_collect(const nn::Model& model, data::SampleStream& stream, std::size_t b) {
  const auto samples = stream.draw(b);
  return nn::per_sample_gradients(model, samples);
}

MomentPrediction moment_prediction(const MomentEstimate& est, std::size_t b, std::size_t b_bar) {
  if (b < 2) throw std::invalid_argument("moment_prediction: need b >= 2");
  if (b_bar == 0) throw std::invalid_argument("moment_prediction: b_bar must be >= 1");
  if (!std::isfinite(est.mu2) || !std::isfinite(est.mu4)) throw std::invalid_argument("moment_prediction: non-finite moments");
  const double bd = static_cast<double>(b);
  const double bb = static_cast<double>(b_bar);
  MomentPrediction p;
  p.mean = (bd - 1.0) / bb * est.mu2;
  p.variance = est.mu4 / bb - (bd - 3.0) * est.mu2 * est.mu2 / ((bd - 1.0) * bb);
  return p;
}

}  // namespace airfeel::sensing
