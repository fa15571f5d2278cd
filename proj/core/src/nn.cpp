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

#include "airfeel/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "airfeel/error.hpp"

namespace airfeel::nn {
namespace {

constexpr double kProbClamp = 1e-12;

double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// Derivative expressed through the post-activation value.
double activate_grad(Activation a, double z, double out) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

void check_features(const ArchSpec& arch, const Sample& s) {
  if (s.features.size() != arch.input_width()) {
    throw DimensionError("sample has " + std::to_string(s.features.size()) + " features, model expects " +
                         std::to_string(arch.input_width()));
  }
  if (arch.loss == Loss::cross_entropy && s.label >= arch.output_width()) {
    throw DimensionError("label " + std::to_string(s.label) + " out of range for " +
                         std::to_string(arch.output_width()) + " classes");
  }
}

double target_of(const ArchSpec& arch, const Sample& s, std::size_t j) {
  if (arch.output_width() == 1) return static_cast<double>(s.label);
  return j == s.label ? 1.0 : 0.0;
}

// Per-layer pre-activations and activations for one sample. acts[0] is the
// input; acts[L] holds the raw outputs.
struct Trace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> acts;

  explicit Trace(const ArchSpec& arch) : pre(arch.layer_widths.size()), acts(arch.layer_widths.size()) {
    for (std::size_t l = 0; l < arch.layer_widths.size(); ++l) {
      pre[l].resize(arch.layer_widths[l]);
      acts[l].resize(arch.layer_widths[l]);
    }
  }
};

void run_forward(const Model& model, const Sample& s, Trace& t) {
  const ArchSpec& arch = model.arch();
  const auto w = model.weights();
  std::copy(s.features.begin(), s.features.end(), t.acts[0].begin());
  const std::size_t layers = arch.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = arch.layer_widths[l];
    const std::size_t out = arch.layer_widths[l + 1];
    const double* W = w.data() + model.layer_offset(l);
    const double* b = W + in * out;
    const std::vector<double>& a = t.acts[l];
    std::vector<double>& z = t.pre[l + 1];
    std::vector<double>& next = t.acts[l + 1];
    const bool hidden = l + 1 < layers;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = W + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * a[i];
      z[o] = acc;
      next[o] = hidden ? activate(arch.activation, acc) : acc;
    }
  }
}

// Loss value and dLoss/dOutput for one sample given its outputs.
double output_loss(const ArchSpec& arch, const Sample& s, std::span<const double> out, std::span<double> grad) {
  const std::size_t n = out.size();
  if (arch.loss == Loss::squared_error) {
    double loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = out[j] - target_of(arch, s, j);
      loss += r * r;
      if (!grad.empty()) grad[j] = 2.0 * r;
    }
    return loss;
  }
  const double m = *std::max_element(out.begin(), out.end());
  double denom = 0.0;
  for (double v : out) denom += std::exp(v - m);
  const double p_label = std::exp(out[s.label] - m) / denom;
  if (!grad.empty()) {
    for (std::size_t j = 0; j < n; ++j) grad[j] = std::exp(out[j] - m) / denom - (j == s.label ? 1.0 : 0.0);
  }
  return -std::log(std::max(p_label, kProbClamp));
}

// Backpropagates `delta` (dLoss/dOutput) through the trace, writing the
// gradient into `g` scaled by `scale` and accumulated (+=).
void run_backward(const Model& model, const Trace& t, std::vector<double> delta, std::span<double> g,
                  double scale) {
  const ArchSpec& arch = model.arch();
  const auto w = model.weights();
  std::vector<double> prev;
  for (std::size_t l = arch.layer_count(); l-- > 0;) {
    const std::size_t in = arch.layer_widths[l];
    const std::size_t out = arch.layer_widths[l + 1];
    const std::size_t off = model.layer_offset(l);
    const double* W = w.data() + off;
    double* gW = g.data() + off;
    double* gb = gW + in * out;
    const std::vector<double>& a = t.acts[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o] * scale;
      double* grow = gW + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
      gb[o] += d;
    }
    if (l == 0) break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* row = W + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < in; ++i) prev[i] *= activate_grad(arch.activation, t.pre[l][i], t.acts[l][i]);
    delta.swap(prev);
  }
}

}  // namespace

void ArchSpec::validate() const {
  if (layer_widths.size() < 2) throw std::invalid_argument("ArchSpec: need at least input and output layers");
  for (std::size_t w : layer_widths) {
    if (w == 0) throw std::invalid_argument("ArchSpec: layer widths must be positive");
  }
  if (loss == Loss::cross_entropy && output_width() < 2) {
    throw std::invalid_argument("ArchSpec: cross-entropy needs at least 2 output classes");
  }
}

std::size_t param_count(const ArchSpec& arch) {
  arch.validate();
  std::size_t d = 0;
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    d += arch.layer_widths[l] * arch.layer_widths[l + 1] + arch.layer_widths[l + 1];
  }
  return d;
}

Model::Model(ArchSpec arch, std::vector<double> weights) : arch_(std::move(arch)), weights_(std::move(weights)) {
  const std::size_t d = param_count(arch_);
  if (weights_.size() != d) {
    throw DimensionError("Model: expected " + std::to_string(d) + " weights, got " + std::to_string(weights_.size()));
  }
  for (double v : weights_) {
    if (!std::isfinite(v)) throw NumericError("Model: non-finite weight");
  }
  offsets_.reserve(arch_.layer_count());
  std::size_t off = 0;
  for (std::size_t l = 0; l < arch_.layer_count(); ++l) {
    offsets_.push_back(off);
    off += arch_.layer_widths[l] * arch_.layer_widths[l + 1] + arch_.layer_widths[l + 1];
  }
}

Model Model::zeros(const ArchSpec& arch) { return Model(arch, std::vector<double>(param_count(arch), 0.0)); }

Model Model::initialize(const ArchSpec& arch, Rng& rng) {
  std::vector<double> w;
  w.reserve(param_count(arch));
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    const std::size_t in = arch.layer_widths[l];
    const std::size_t count = in * arch.layer_widths[l + 1] + arch.layer_widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < count; ++i) w.push_back(bound * (2.0 * rng.uniform() - 1.0));
  }
  return Model(arch, std::move(w));
}

std::vector<double> forward(const Model& model, const Sample& sample) {
  check_features(model.arch(), sample);
  Trace t(model.arch());
  run_forward(model, sample, t);
  return t.acts.back();
}

double sample_loss(const Model& model, const Sample& sample) {
  check_features(model.arch(), sample);
  Trace t(model.arch());
  run_forward(model, sample, t);
  return output_loss(model.arch(), sample, t.acts.back(), {});
}

std::vector<double> per_sample_losses(const Model& model, std::span<const Sample> batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  Trace t(model.arch());
  for (const Sample& s : batch) {
    check_features(model.arch(), s);
    run_forward(model, s, t);
    out.push_back(output_loss(model.arch(), s, t.acts.back(), {}));
  }
  return out;
}

double mean_loss(const Model& model, std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("mean_loss: empty batch");
  double sum = 0.0;
  for (double v : per_sample_losses(model, batch)) sum += v;
  return sum / static_cast<double>(batch.size());
}

void append_sample_gradient(const Model& model, const Sample& sample, GradientBatch& out) {
  if (out.dim != model.dim()) throw DimensionError("append_sample_gradient: batch dimension mismatch");
  check_features(model.arch(), sample);
  Trace t(model.arch());
  run_forward(model, sample, t);
  std::vector<double> delta(model.arch().output_width());
  output_loss(model.arch(), sample, t.acts.back(), delta);
  std::vector<double> g(model.dim(), 0.0);
  run_backward(model, t, std::move(delta), g, 1.0);
  for (double v : g) {
    if (!std::isfinite(v)) throw NumericError("per-sample gradient is not finite");
  }
  out.append(g);
}

GradientBatch per_sample_gradients(const Model& model, std::span<const Sample> batch) {
  GradientBatch out(model.dim());
  out.grads.reserve(batch.size() * model.dim());
  out.norms.reserve(batch.size());
  out.weights.reserve(batch.size());
  for (const Sample& s : batch) append_sample_gradient(model, s, out);
  return out;
}

std::vector<double> batch_gradient(const Model& model, std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  const ArchSpec& arch = model.arch();
  std::vector<Trace> traces;
  traces.reserve(batch.size());
  for (const Sample& s : batch) {
    check_features(arch, s);
    traces.emplace_back(arch);
    run_forward(model, s, traces.back());
  }
  std::vector<double> g(model.dim(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    std::vector<double> delta(arch.output_width());
    output_loss(arch, batch[n], traces[n].acts.back(), delta);
    run_backward(model, traces[n], std::move(delta), g, scale);
  }
  for (double v : g) {
    if (!std::isfinite(v)) throw NumericError("batch gradient is not finite");
  }
  return g;
}

Model apply_update(const Model& model, std::span<const double> direction, double eta) {
  if (direction.size() != model.dim()) throw DimensionError("apply_update: direction dimension mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("apply_update: eta must be positive");
  std::vector<double> w(model.weights().begin(), model.weights().end());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * direction[i];
  return Model(model.arch(), std::move(w));
}

}  // namespace airfeel::nn
