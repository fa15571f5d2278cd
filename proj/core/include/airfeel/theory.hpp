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

/// Numeric forms of the convergence and generalization bounds, plus the
/// empirical estimation of the constants they depend on.
namespace airfeel::theory {

struct TheoryConstants {
  double lipschitz_L = 1.0;
  double delta = 0.0;      // Polyak-Lojasiewicz constant
  double mu_F = 1.0;       // first-moment limits; 1 for unbiased gradients
  double mu_G = 1.0;
  // Second-moment limits: E||g||^2 <= Me_const + Me_slope ||grad F||^2 and
  // the variance likewise with the Mv pair.
  double Me_const = 0.0;
  double Mv_const = 0.0;
  double Me_slope = 1.0;
  double Mv_slope = 0.0;
  double sigma = 1.0;      // sub-Gaussian parameter of the sample loss
  double F_star = 0.0;     // infimum of the loss
  double B = 1.0;          // total sample budget per device

  void validate() const;
};

/// One probe of the objective at a weight vector.
struct ProbePoint {
  std::vector<double> weights;
  std::vector<double> full_grad;        // gradient of the population-loss proxy
  double loss = 0.0;                    // population-loss proxy
  double grad_variance = 0.0;           // E||g_i - E g||^2 over sample gradients
  double mean_grad_sq_norm = 0.0;       // ||E g||^2
  double grad_alignment = 0.0;          // full_grad . E g
  double min_sample_loss = 0.0;
  double max_sample_loss = 0.0;
};

/// Pairs of probe points whose gradient difference estimates curvature.
struct ProbePair {
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Empirical constants:
///   L       max ||grad_i - grad_j|| / ||w_i - w_j|| over `pairs`
///   delta   min ||grad||^2 / (2 gamma) over points with gamma > 0 (0 if none)
///   mu_F    min (grad . E g) / ||grad||^2, clamped to (0, 1]
///   mu_G    min (grad . E g) / E||g||^2, clamped to (0, 1]
///   Mv_*    upper envelope of grad_variance vs ||grad||^2 (OLS slope >= 0,
///           intercept raised until every point lies on or below the line)
///   Me_*    same for mean_grad_sq_norm
///   sigma   (max sample loss - min sample loss) / 2
/// `F_star` and `B` are copied from the arguments. Throws
/// std::invalid_argument when fewer than two points are given.
TheoryConstants estimate_constants(std::span<const ProbePoint> points, std::span<const ProbePair> pairs, double F_star,
                                   double B);

/// Running maximum of the curvature ratio as pairs are added, one entry per pair.
std::vector<double> lipschitz_running_max(std::span<const ProbePoint> points, std::span<const ProbePair> pairs);

struct DescentBound {
  double value = 0.0;
  bool eta_within_cap = true;  // eta <= mu_F / (L (Me_slope + Mv_slope / (K b)))
  double eta_cap = 0.0;
};

/// -(eta mu_F / 2) ||grad F||^2 + L tau eta^2 / (2K) + (L eta^2 / 2)(Me_const + Mv_const / (K b)).
DescentBound loss_descent_bound(double grad_norm_sq, double tau_r, double b_r, const TheoryConstants& c, double eta,
                                std::size_t K);

struct GenErrorBound {
  std::vector<double> increments;
  std::vector<double> cumulative;
};

/// Cumulative generalization-error bound
///   (sigma eta / (K B)) sum_r sqrt(V_r / (K tau_r b_r)).
/// A round with zero variance contributes zero even when tau_r is zero.
GenErrorBound gen_error_bound(std::span<const double> variance, std::span<const double> tau, std::span<const double> b,
                              const TheoryConstants& c, double eta, std::size_t K, double B);

/// One-round objective bound
///   -delta eta mu_F gamma + L p_n eta^2 / (2 K c) + L Mv_const eta^2 / (2 K b)
///   + gamma sigma c / (B K p_n) + C,
///   C = L Me_const eta^2 / 2 + sigma eta / (2 B K^2 mu_G) + L sigma eta^2 / (2 B K^2).
double j_bar(double c_r, double b_r, double gamma_prev, const TheoryConstants& c, double eta, std::size_t K, double p_n,
             double B);

/// -(eta mu_G / 2) V + L tau eta^2 / (2K).
double var_descent_bound(double grad_variance, double tau_r, const TheoryConstants& c, double eta, std::size_t K);

}  // namespace airfeel::theory
