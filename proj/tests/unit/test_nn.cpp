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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "airfeel/error.hpp"
#include "airfeel/nn.hpp"
#include "airfeel/rng.hpp"

namespace airfeel::nn {
namespace {

std::vector<Sample> fixed_samples(std::size_t n, std::size_t width, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed, StreamPurpose::probe, 0, 0, 7);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    for (std::size_t j = 0; j < width; ++j) s.features.push_back(rng.normal());
    s.label = rng.index(classes);
    out.push_back(s);
  }
  return out;
}

Model seeded_model(const ArchSpec& arch, std::uint64_t seed = 42) {
  Rng init(seed, StreamPurpose::init);
  return Model::initialize(arch, init);
}

// Straight-line forward pass written against the documented weight layout:
// per layer, an out x in row-major matrix followed by the bias.
std::vector<double> reference_forward(const ArchSpec& arch, const std::vector<double>& w, const Sample& s) {
  std::vector<double> a = s.features;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    const std::size_t in = arch.layer_widths[l], out = arch.layer_widths[l + 1];
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = w[off + in * out + o];
      for (std::size_t i = 0; i < in; ++i) acc += w[off + o * in + i] * a[i];
      z[o] = acc;
    }
    off += in * out + out;
    if (l + 2 < arch.layer_widths.size()) {
      for (double& v : z) v = arch.activation == Activation::relu ? std::max(v, 0.0) : std::tanh(v);
    }
    a = z;
  }
  return a;
}

double reference_loss(const ArchSpec& arch, const std::vector<double>& w, const Sample& s) {
  const auto out = reference_forward(arch, w, s);
  if (arch.loss == Loss::cross_entropy) {
    double m = out[0];
    for (double v : out) m = std::max(m, v);
    double z = 0.0;
    for (double v : out) z += std::exp(v - m);
    return -std::log(std::max(std::exp(out[s.label] - m) / z, 1e-12));
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double t = out.size() == 1 ? static_cast<double>(s.label) : (j == s.label ? 1.0 : 0.0);
    sq += (out[j] - t) * (out[j] - t);
  }
  return sq;
}

TEST(ParamCount, SmallArchitectures) {
  EXPECT_EQ(param_count({{2, 3, 2}}), 17u);
  EXPECT_EQ(param_count({{1, 1}, Activation::relu, Loss::squared_error}), 2u);
}

TEST(ParamCount, MatchesLayerByLayerEnumeration) {
  const ArchSpec arch{{4, 8, 8, 3}};
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
    for (std::size_t o = 0; o < arch.layer_widths[l + 1]; ++o) {
      for (std::size_t i = 0; i < arch.layer_widths[l]; ++i) ++count;
      ++count;
    }
  }
  EXPECT_EQ(param_count(arch), count);
  EXPECT_EQ(count, 139u);
}

TEST(ArchSpec, RejectsDegenerateShapes) {
  EXPECT_THROW(ArchSpec{{4}}.validate(), std::invalid_argument);
  EXPECT_THROW((ArchSpec{{4, 0, 3}}.validate()), std::invalid_argument);
  EXPECT_THROW((ArchSpec{{4, 1}, Activation::relu, Loss::cross_entropy}.validate()), std::invalid_argument);
}

TEST(Model, RejectsWrongDimensionAndNonFiniteWeights) {
  const ArchSpec arch{{2, 2}};
  EXPECT_THROW(Model(arch, std::vector<double>(5, 0.0)), DimensionError);
  std::vector<double> w(6, 0.0);
  w[3] = std::nan("");
  EXPECT_THROW(Model(arch, w), NumericError);
}

TEST(Model, InitializationStaysWithinFanInRange) {
  const ArchSpec arch{{16, 64, 5}};
  const Model m = seeded_model(arch);
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.layer_widths[l]));
    const std::size_t n = (arch.layer_widths[l] + 1) * arch.layer_widths[l + 1];
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LE(std::abs(m.weights()[m.layer_offset(l) + i]), bound);
    }
  }
  EXPECT_EQ(seeded_model(arch).weights()[7], m.weights()[7]);
}

TEST(PerSampleLosses, ZeroModelSquaredErrorWithZeroTargetIsZero) {
  const ArchSpec arch{{3, 1}, Activation::relu, Loss::squared_error};
  const Model m = Model::zeros(arch);
  const std::vector<Sample> batch{{{1.0, -2.0, 5.0}, 0}};
  EXPECT_EQ(per_sample_losses(m, batch), std::vector<double>{0.0});
}

TEST(PerSampleLosses, UniformLogitsGiveLogClassCount) {
  const ArchSpec arch{{4, 6, 5}};
  const Model m = Model::zeros(arch);
  const auto batch = fixed_samples(3, 4, 5, 1);
  for (double v : per_sample_losses(m, batch)) EXPECT_NEAR(v, std::log(5.0), 1e-15);
}

TEST(PerSampleLosses, MatchIndependentForwardPass) {
  for (auto act : {Activation::relu, Activation::tanh}) {
    for (auto loss : {Loss::cross_entropy, Loss::squared_error}) {
      const ArchSpec arch{{4, 8, 8, 3}, act, loss};
      const Model m = seeded_model(arch);
      const auto batch = fixed_samples(8, 4, 3, 42);
      const auto losses = per_sample_losses(m, batch);
      const std::vector<double> w(m.weights().begin(), m.weights().end());
      double sum = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        EXPECT_NEAR(losses[i], reference_loss(arch, w, batch[i]), 1e-12);
        sum += losses[i];
      }
      EXPECT_NEAR(mean_loss(m, batch), sum / 8.0, 1e-14);
    }
  }
}

TEST(PerSampleLosses, RejectsFeatureMismatch) {
  const Model m = Model::zeros({{4, 3}});
  const std::vector<Sample> batch{{{1.0, 2.0}, 0}};
  EXPECT_THROW(per_sample_losses(m, batch), DimensionError);
  const std::vector<Sample> bad_label{{{1.0, 2.0, 3.0, 4.0}, 3}};
  EXPECT_THROW(per_sample_losses(m, bad_label), DimensionError);
}

TEST(PerSampleGradients, LinearSquaredErrorIsAnalytic) {
  const ArchSpec arch{{3, 1}, Activation::relu, Loss::squared_error};
  const Model m(arch, {0.5, -1.0, 2.0, 0.25});
  const Sample s{{1.0, 2.0, -1.0}, 3};
  const double resid = 0.5 - 2.0 - 2.0 + 0.25 - 3.0;
  const auto g = per_sample_gradients(m, std::vector<Sample>{s});
  ASSERT_EQ(g.size(), 1u);
  const std::vector<double> expect{2 * resid * 1.0, 2 * resid * 2.0, 2 * resid * -1.0, 2 * resid};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(g.row(0)[j], expect[j]);
  EXPECT_DOUBLE_EQ(g.norms[0], std::sqrt(4 * resid * resid * (1 + 4 + 1 + 1)));
}

TEST(PerSampleGradients, IdenticalSamplesGiveIdenticalRows) {
  const ArchSpec arch{{4, 8, 3}};
  const Model m = seeded_model(arch);
  const auto one = fixed_samples(1, 4, 3, 5);
  const std::vector<Sample> twice{one[0], one[0]};
  const auto g = per_sample_gradients(m, twice);
  for (std::size_t j = 0; j < g.dim; ++j) EXPECT_EQ(g.row(0)[j], g.row(1)[j]);
  EXPECT_EQ(g.raw_count, 2u);
  EXPECT_FALSE(g.upsampled);
  EXPECT_EQ(g.weights, (std::vector<double>{1.0, 1.0}));
}

class FiniteDifference : public ::testing::TestWithParam<std::pair<Activation, Loss>> {};

TEST_P(FiniteDifference, EveryCoordinateAgreesWithCentralDifferences) {
  const auto [act, loss] = GetParam();
  const ArchSpec arch{{4, 8, 8, 3}, act, loss};
  const Model m = seeded_model(arch);
  const auto batch = fixed_samples(8, 4, 3, 42);
  const auto g = per_sample_gradients(m, batch);
  const std::vector<double> w(m.weights().begin(), m.weights().end());
  constexpr double h = 1e-5;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double sq = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) {
      auto plus = w, minus = w;
      plus[p] += h;
      minus[p] -= h;
      const double fd = (reference_loss(arch, plus, batch[i]) - reference_loss(arch, minus, batch[i])) / (2 * h);
      const double an = g.row(i)[p];
      const double scale = std::max({std::abs(an), std::abs(fd), 1e-6});
      EXPECT_LE(std::abs(an - fd) / scale, 1e-4) << "sample " << i << " coordinate " << p;
      sq += an * an;
    }
    EXPECT_NEAR(g.norms[i], std::sqrt(sq), 1e-12 * std::max(1.0, g.norms[i]));
  }
}

INSTANTIATE_TEST_SUITE_P(AllLayerAndLossKinds, FiniteDifference,
                         ::testing::Values(std::pair{Activation::relu, Loss::cross_entropy},
                                           std::pair{Activation::relu, Loss::squared_error},
                                           std::pair{Activation::tanh, Loss::cross_entropy},
                                           std::pair{Activation::tanh, Loss::squared_error}));

TEST(PerSampleGradients, MeanEqualsBatchGradient) {
  const ArchSpec arch{{4, 16, 3}, Activation::tanh};
  const Model m = seeded_model(arch);
  const auto batch = fixed_samples(1024, 4, 3, 9);
  const auto g = per_sample_gradients(m, batch);
  const auto mean = plain_mean(g);
  const auto full = batch_gradient(m, batch);
  for (std::size_t j = 0; j < mean.size(); ++j) {
    EXPECT_LE(std::abs(mean[j] - full[j]), 1e-10 * std::max(1.0, std::abs(full[j])));
  }
}

TEST(PerSampleGradients, BitIdenticalAcrossCalls) {
  const ArchSpec arch{{4, 8, 3}};
  const Model m = seeded_model(arch);
  const auto batch = fixed_samples(16, 4, 3, 3);
  const auto a = per_sample_gradients(m, batch);
  const auto b = per_sample_gradients(m, batch);
  EXPECT_EQ(a.grads, b.grads);
  EXPECT_EQ(a.norms, b.norms);
}

TEST(PerSampleGradients, NonFiniteGradientRaisesNumericError) {
  const ArchSpec arch{{1, 1}, Activation::relu, Loss::squared_error};
  const Model m(arch, {1e300, 0.0});
  const std::vector<Sample> batch{{{1e300}, 0}};
  EXPECT_THROW(per_sample_gradients(m, batch), NumericError);
}

TEST(ApplyUpdate, ZeroDirectionLeavesModelUnchanged) {
  const Model m = seeded_model({{3, 4, 2}});
  const std::vector<double> zero(m.dim(), 0.0);
  const Model next = apply_update(m, zero, 0.01);
  EXPECT_TRUE(std::equal(m.weights().begin(), m.weights().end(), next.weights().begin()));
}

TEST(ApplyUpdate, SubtractsScaledDirection) {
  const ArchSpec arch{{1, 1}, Activation::relu, Loss::squared_error};
  const Model m(arch, {1.0, 1.0});
  const std::vector<double> dir{1.0, -1.0};
  const Model next = apply_update(m, dir, 1.0);
  EXPECT_EQ(std::vector<double>(next.weights().begin(), next.weights().end()), (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(m.weights()[0], 1.0);
}

TEST(ApplyUpdate, RevertingRestoresBitExactly) {
  const ArchSpec arch{{2, 2}, Activation::relu, Loss::squared_error};
  const Model m(arch, {0.5, -0.25, 1.75, 3.0, -8.0, 0.125});
  const std::vector<double> dir{0.5, 1.0, -2.0, 0.25, 4.0, -0.75};
  std::vector<double> neg(dir.size());
  for (std::size_t i = 0; i < dir.size(); ++i) neg[i] = -dir[i];
  const Model back = apply_update(apply_update(m, dir, 0.5), neg, 0.5);
  EXPECT_TRUE(std::equal(m.weights().begin(), m.weights().end(), back.weights().begin()));
}

TEST(ApplyUpdate, RejectsBadArguments) {
  const Model m = Model::zeros({{2, 2}});
  EXPECT_THROW(apply_update(m, std::vector<double>(3, 0.0), 0.1), DimensionError);
  EXPECT_THROW(apply_update(m, std::vector<double>(m.dim(), 0.0), 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace airfeel::nn
