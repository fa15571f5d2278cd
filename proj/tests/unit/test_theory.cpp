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
#include <limits>
#include <random>
#include <vector>

#include "airfeel/aircomp.hpp"
#include "airfeel/theory.hpp"

namespace airfeel::theory {
namespace {

// Probe of F(w) = a/2 ||w||^2 with exact sample gradients.
ProbePoint quadratic_probe(const std::vector<double>& w, double a) {
  ProbePoint p;
  p.weights = w;
  double sq = 0.0;
  for (double x : w) {
    p.full_grad.push_back(a * x);
    sq += x * x;
  }
  p.loss = 0.5 * a * sq;
  p.mean_grad_sq_norm = a * a * sq;
  p.grad_alignment = a * a * sq;
  p.grad_variance = 0.0;
  p.min_sample_loss = p.loss;
  p.max_sample_loss = p.loss;
  return p;
}

TEST(EstimateConstants, QuadraticRecoversCurvatureAndPl) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ProbePoint> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(quadratic_probe({n(gen), n(gen), n(gen)}, 2.0));
  std::vector<ProbePair> pairs;
  for (std::size_t i = 1; i < pts.size(); ++i) pairs.push_back({i - 1, i});
  const auto c = estimate_constants(pts, pairs, 0.0, 100.0);
  EXPECT_NEAR(c.lipschitz_L, 2.0, 1e-12);
  EXPECT_NEAR(c.delta, 2.0, 1e-12);
  EXPECT_NEAR(c.mu_F, 1.0, 1e-12);
  EXPECT_NEAR(c.mu_G, 1.0, 1e-12);
  EXPECT_NEAR(c.Me_slope, 1.0, 1e-9);
  EXPECT_NEAR(c.Me_const, 0.0, 1e-9);
  EXPECT_EQ(c.Mv_const, 0.0);
  double lo = pts[0].loss, hi = pts[0].loss;
  for (const auto& p : pts) {
    lo = std::min(lo, p.loss);
    hi = std::max(hi, p.loss);
  }
  EXPECT_DOUBLE_EQ(c.sigma, (hi - lo) / 2.0);
  EXPECT_EQ(c.B, 100.0);
  c.validate();
}

TEST(EstimateConstants, FlatSurfaceHasNoPlConstantOrSpread) {
  std::vector<ProbePoint> pts(3);
  for (std::size_t i = 0; i < 3; ++i) {
    pts[i].weights = {static_cast<double>(i)};
    pts[i].full_grad = {0.0};
    pts[i].loss = 1.0;
    pts[i].min_sample_loss = pts[i].max_sample_loss = 1.0;
  }
  const std::vector<ProbePair> pairs{{0, 1}, {1, 2}};
  const auto c = estimate_constants(pts, pairs, 1.0, 1.0);
  EXPECT_EQ(c.delta, 0.0);
  EXPECT_EQ(c.sigma, 0.0);
  EXPECT_EQ(c.lipschitz_L, 0.0);
}

TEST(EstimateConstants, EnvelopeCoversEveryPointAndSigmaIsHalfRange) {
  std::vector<ProbePoint> pts;
  const double gsq[] = {1.0, 2.0, 3.0, 4.0};
  const double var[] = {0.5, 2.5, 1.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    ProbePoint p;
    p.weights = {static_cast<double>(i)};
    p.full_grad = {std::sqrt(gsq[i])};
    p.loss = 1.0;
    p.grad_variance = var[i];
    p.mean_grad_sq_norm = gsq[i];
    p.grad_alignment = gsq[i];
    p.min_sample_loss = -0.5 * i;
    p.max_sample_loss = 2.0 + i;
    pts.push_back(p);
  }
  const auto c = estimate_constants(pts, {}, 0.0, 1.0);
  EXPECT_GE(c.Mv_slope, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_LE(var[i], c.Mv_const + c.Mv_slope * gsq[i] + 1e-12);
  EXPECT_DOUBLE_EQ(c.sigma, (5.0 - (-1.5)) / 2.0);
  EXPECT_EQ(c.lipschitz_L, 0.0);
}

TEST(EstimateConstants, RejectsTooFewPoints) {
  std::vector<ProbePoint> one(1);
  EXPECT_THROW(estimate_constants(one, {}, 0.0, 1.0), std::invalid_argument);
}

TEST(Lipschitz, RunningMaxIsMonotone) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ProbePoint> pts;
  for (int i = 0; i < 20; ++i) {
    ProbePoint p;
    p.weights = {n(gen), n(gen)};
    p.full_grad = {std::sin(p.weights[0]), std::cos(p.weights[1])};
    pts.push_back(p);
  }
  std::vector<ProbePair> pairs;
  for (std::size_t i = 1; i < pts.size(); ++i) pairs.push_back({0, i});
  const auto run = lipschitz_running_max(pts, pairs);
  ASSERT_EQ(run.size(), pairs.size());
  for (std::size_t i = 1; i < run.size(); ++i) EXPECT_GE(run[i], run[i - 1]);
  EXPECT_LE(run.back(), 1.0 + 1e-12);
  EXPECT_THROW(lipschitz_running_max(pts, std::vector<ProbePair>{{0, 99}}), std::out_of_range);
}

TEST(DescentBound, MatchesFormulaAndCap) {
  TheoryConstants c;
  c.lipschitz_L = 2.0;
  c.mu_F = 0.5;
  c.Me_const = 0.1;
  c.Mv_const = 3.0;
  c.Me_slope = 1.0;
  c.Mv_slope = 4.0;
  const auto d = loss_descent_bound(5.0, 0.2, 8.0, c, 0.1, 2);
  EXPECT_DOUBLE_EQ(d.value, -(0.1 * 0.5 / 2) * 5.0 + 2.0 * 0.2 * 0.01 / 4.0 + (2.0 * 0.01 / 2) * (0.1 + 3.0 / 16.0));
  EXPECT_DOUBLE_EQ(d.eta_cap, 0.5 / (2.0 * (1.0 + 4.0 / 16.0)));
  EXPECT_TRUE(d.eta_within_cap);
  EXPECT_FALSE(loss_descent_bound(5.0, 0.2, 8.0, c, 1.0, 2).eta_within_cap);
  EXPECT_THROW(loss_descent_bound(1.0, 1.0, 0.0, c, 0.1, 2), std::invalid_argument);
}

TEST(GenError, ZeroCasesAndMonotonicity) {
  TheoryConstants c;
  c.sigma = 2.0;
  const std::vector<double> var{0.0, 1.0, 4.0, 0.0};
  const std::vector<double> tau{0.0, 1.0, 1.0, 0.0};
  const std::vector<double> b{4.0, 4.0, 4.0, 4.0};
  const auto g = gen_error_bound(var, tau, b, c, 0.5, 2, 10.0);
  EXPECT_EQ(g.increments[0], 0.0);
  EXPECT_DOUBLE_EQ(g.increments[1], (2.0 * 0.5 / 20.0) * std::sqrt(1.0 / 8.0));
  EXPECT_DOUBLE_EQ(g.increments[2], 2.0 * g.increments[1]);
  for (std::size_t i = 1; i < g.cumulative.size(); ++i) EXPECT_GE(g.cumulative[i], g.cumulative[i - 1]);

  const auto inf = gen_error_bound(std::vector<double>{1.0}, std::vector<double>{0.0}, std::vector<double>{1.0}, c,
                                   0.5, 1, 1.0);
  EXPECT_TRUE(std::isinf(inf.increments[0]));
}

TEST(GenError, MoreSamplesOrLessNoiseNeverIncreasesTheBound) {
  TheoryConstants c;
  const std::vector<double> var{1.0};
  double prev = std::numeric_limits<double>::infinity();
  for (double b = 1.0; b <= 64.0; b *= 2.0) {
    const double v = gen_error_bound(var, std::vector<double>{1.0}, std::vector<double>{b}, c, 0.1, 3, 5.0).cumulative[0];
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double t1 = gen_error_bound(var, std::vector<double>{1.0}, std::vector<double>{4.0}, c, 0.1, 3, 5.0).cumulative[0];
  const double t2 = gen_error_bound(var, std::vector<double>{2.0}, std::vector<double>{4.0}, c, 0.1, 3, 5.0).cumulative[0];
  EXPECT_NEAR(t2, t1 / std::sqrt(2.0), 1e-15);
}

class JBarTest : public ::testing::Test {
 protected:
  void SetUp() override {
    c.lipschitz_L = 1.5;
    c.delta = 0.3;
    c.mu_F = 0.8;
    c.mu_G = 0.7;
    c.Me_const = 0.05;
    c.Mv_const = 2.0;
    c.sigma = 1.2;
  }
  TheoryConstants c;
  double eta = 0.05, p_n = 2.0, B = 4000.0, gamma = 0.6;
  std::size_t K = 5;
};

TEST_F(JBarTest, ClosedFormMinimizerAgreesWithGridSearch) {
  const double cstar = aircomp::optimal_c(B, c.lipschitz_L, p_n, eta, c.sigma, gamma);
  double best_c = 0.0, best = std::numeric_limits<double>::infinity();
  for (double lg = -4.0; lg <= 6.0; lg += 1e-4) {
    const double cr = std::pow(10.0, lg);
    const double v = j_bar(cr, 16.0, gamma, c, eta, K, p_n, B);
    if (v < best) {
      best = v;
      best_c = cr;
    }
  }
  EXPECT_NEAR(std::log10(best_c), std::log10(cstar), 2e-4);
  EXPECT_LE(j_bar(cstar, 16.0, gamma, c, eta, K, p_n, B), best + 1e-15);
}

TEST_F(JBarTest, BalancesTheTwoPowerTermsAtTheOptimum) {
  const double cstar = aircomp::optimal_c(B, c.lipschitz_L, p_n, eta, c.sigma, gamma);
  const double k = static_cast<double>(K);
  const double noise_term = c.lipschitz_L * p_n * eta * eta / (2.0 * k * cstar);
  const double gap_term = gamma * c.sigma * cstar / (B * k * p_n);
  EXPECT_NEAR(noise_term / gap_term, 1.0, 1e-12);
}

TEST_F(JBarTest, ConvexInDenoisingFactor) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(gen), b = u(gen);
    const double mid = j_bar(0.5 * (a + b), 8.0, gamma, c, eta, K, p_n, B);
    EXPECT_LE(mid, 0.5 * (j_bar(a, 8.0, gamma, c, eta, K, p_n, B) + j_bar(b, 8.0, gamma, c, eta, K, p_n, B)) + 1e-15);
  }
  EXPECT_THROW(j_bar(0.0, 8.0, gamma, c, eta, K, p_n, B), std::invalid_argument);
}

TEST(VarDescent, SignFollowsVarianceVersusNoise) {
  TheoryConstants c;
  c.lipschitz_L = 1.0;
  c.mu_G = 1.0;
  EXPECT_DOUBLE_EQ(var_descent_bound(0.0, 2.0, c, 0.1, 1), 0.01);
  EXPECT_LT(var_descent_bound(10.0, 0.1, c, 0.1, 1), 0.0);
  EXPECT_DOUBLE_EQ(var_descent_bound(2.0, 0.0, c, 0.1, 1), -0.1);
}

}  // namespace
}  // namespace airfeel::theory
