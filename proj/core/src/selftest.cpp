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

#include "airfeel/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "airfeel/aircomp.hpp"
#include "airfeel/gradient_batch.hpp"
#include "airfeel/nn.hpp"
#include "airfeel/rng.hpp"
#include "airfeel/sensing.hpp"

namespace airfeel::selftest {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Check unbiasedness(std::uint64_t seed) {
  // Exhaustive: two gradients, two draws, every ordered outcome.
  GradientBatch two(2);
  const double g0[] = {1.0, -2.0}, g1[] = {0.5, 4.0};
  two.append(g0);
  two.append(g1);
  const auto q = sensing::importance_weights(two.norms);
  double worst = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    double expect = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        const double wa = 0.5 / q[a], wb = 0.5 / q[b];
        expect += q[a] * q[b] * (wa * two.row(a)[j] + wb * two.row(b)[j]) / 2.0;
      }
    }
    worst = std::max(worst, std::abs(expect - plain_mean(two)[j]));
  }

  // Monte Carlo: eight gradients resampled to 32.
  Rng data(seed, StreamPurpose::probe, 0, 0, 1);
  GradientBatch raw(3);
  for (int i = 0; i < 8; ++i) {
    const double g[] = {data.normal() * (1 + i), data.normal(), 3.0 * data.normal()};
    raw.append(g);
  }
  const auto truth = plain_mean(raw);
  Rng rng(seed, StreamPurpose::resample, 0, 0, 1);
  constexpr int kTrials = 20000;
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (int t = 0; t < kTrials; ++t) {
    const auto est = weighted_mean(sensing::resample_to(raw, 32, rng));
    for (int j = 0; j < 3; ++j) {
      sum[j] += est[j];
      sum_sq[j] += est[j] * est[j];
    }
  }
  double worst_z = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double mean = sum[j] / kTrials;
    const double var = (sum_sq[j] - kTrials * mean * mean) / (kTrials - 1);
    worst_z = std::max(worst_z, std::abs(mean - truth[j]) / std::sqrt(var / kTrials));
  }
  const bool pass = worst <= 1e-12 && worst_z <= 4.0;
  return {"importance resampling unbiased", pass,
          "exhaustive error " + fmt(worst) + ", Monte Carlo bias " + fmt(worst_z) + " standard errors"};
}

Check moments(std::uint64_t seed) {
  constexpr std::size_t b = 16, b_bar = 32;
  constexpr int kTrials = 20000;
  Rng rng(seed, StreamPurpose::probe, 0, 0, 2);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> x(b);
  for (int t = 0; t < kTrials; ++t) {
    for (double& v : x) v = rng.normal();
    const double red = sensing::expected_variance_reduction(x, b_bar);
    sum += red;
    sum_sq += red * red;
  }
  const double mean = sum / kTrials;
  const double var = (sum_sq - kTrials * mean * mean) / (kTrials - 1);
  // Gaussian sample variance: E = 1, Var = 2 / (b - 1).
  const double scale = static_cast<double>(b) / b_bar;
  const double exact_mean = scale, exact_var = scale * scale * 2.0 / (b - 1);
  const auto closed = sensing::moment_prediction({1.0, 3.0}, b, b_bar);
  const bool pass = std::abs(mean / exact_mean - 1.0) <= 0.02 && std::abs(var / exact_var - 1.0) <= 0.10;
  return {"variance-reduction moments", pass,
          "mean " + fmt(mean) + " (exact " + fmt(exact_mean) + ", closed form " + fmt(closed.mean) + "), variance " +
              fmt(var) + " (exact " + fmt(exact_var) + ", closed form " + fmt(closed.variance) + ")"};
}

Check finite_differences(std::uint64_t seed) {
  const nn::ArchSpec arch{{4, 8, 8, 3}, nn::Activation::tanh, nn::Loss::cross_entropy};
  Rng init(seed, StreamPurpose::init);
  const auto model = nn::Model::initialize(arch, init);
  Rng data(seed, StreamPurpose::probe, 0, 0, 3);
  std::vector<nn::Sample> batch;
  for (int i = 0; i < 8; ++i) {
    nn::Sample s;
    for (int j = 0; j < 4; ++j) s.features.push_back(data.normal());
    s.label = data.index(3);
    batch.push_back(s);
  }
  const auto grads = nn::per_sample_gradients(model, batch);
  constexpr double h = 1e-5;
  double worst = 0.0;
  std::vector<double> w(model.weights().begin(), model.weights().end());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t p = 0; p < w.size(); ++p) {
      auto plus = w, minus = w;
      plus[p] += h;
      minus[p] -= h;
      const double fd = (nn::sample_loss(nn::Model(arch, plus), batch[i]) -
                         nn::sample_loss(nn::Model(arch, minus), batch[i])) /
                        (2 * h);
      const double an = grads.row(i)[p];
      const double err = std::abs(an - fd) / std::max(1e-6, std::max(std::abs(an), std::abs(fd)));
      worst = std::max(worst, err);
    }
  }
  return {"per-sample gradients match finite differences", worst <= 1e-4, "worst relative error " + fmt(worst)};
}

Check noise_calibration(std::uint64_t seed, double noise_scale) {
  constexpr std::size_t d = 1000000;
  constexpr double c_r = 2.5, p_n = 0.8;
  std::vector<std::vector<double>> zeros(3, std::vector<double>(d, 0.0));
  Rng rng(seed, StreamPurpose::noise, 0, 0, 4);
  const auto out = aircomp::detail::aggregate_scaled(zeros, c_r, p_n, rng, noise_scale);
  double sq = 0.0;
  for (double v : out) sq += v * v;
  const double var = sq / d;
  const double target = p_n / c_r;

  std::vector<std::vector<double>> grads{{1.0, 2.0, 3.0}, {0.25, -1.0, 7.0}};
  const auto exact = aircomp::detail::aggregate_scaled(grads, c_r, 0.0, rng, noise_scale);
  const bool noiseless = exact == std::vector<double>{(1.0 + 0.25) * 0.5, (2.0 - 1.0) * 0.5, (3.0 + 7.0) * 0.5};
  const bool pass = std::abs(var / target - 1.0) <= 0.02 && noiseless;
  return {"aggregation noise calibrated", pass,
          "per-coordinate variance " + fmt(var) + " vs " + fmt(target) +
              (noiseless ? ", noiseless average exact" : ", noiseless average inexact")};
}

}  // namespace

std::vector<Check> run(const Options& options) {
  return {unbiasedness(options.seed), moments(options.seed), finite_differences(options.seed),
          noise_calibration(options.seed, options.noise_scale)};
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

}  // namespace airfeel::selftest
