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

#include "airfeel/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace airfeel::theory {
namespace {

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("theory: probe vectors differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct Envelope {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares slope clamped at zero, then the smallest nonnegative
// intercept that puts every point on or below the line.
Envelope upper_envelope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  Envelope e;
  e.slope = sxx > 0.0 ? std::max(sxy / sxx, 0.0) : 0.0;
  for (std::size_t i = 0; i < n; ++i) e.intercept = std::max(e.intercept, y[i] - e.slope * x[i]);
  return e;
}

double curvature_ratio(const ProbePoint& a, const ProbePoint& b) {
  const double dw = std::sqrt(sq_dist(a.weights, b.weights));
  if (!(dw > 0.0)) return 0.0;
  return std::sqrt(sq_dist(a.full_grad, b.full_grad)) / dw;
}

}  // namespace

void TheoryConstants::validate() const {
  const double all[] = {lipschitz_L, delta, mu_F, mu_G, Me_const, Mv_const, Me_slope, Mv_slope, sigma, B};
  for (double v : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("TheoryConstants: constants must be finite and >= 0");
  }
}

std::vector<double> lipschitz_running_max(std::span<const ProbePoint> points, std::span<const ProbePair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  double best = 0.0;
  for (const auto& p : pairs) {
    if (p.first >= points.size() || p.second >= points.size()) throw std::out_of_range("probe pair index");
    best = std::max(best, curvature_ratio(points[p.first], points[p.second]));
    out.push_back(best);
  }
  return out;
}

TheoryConstants estimate_constants(std::span<const ProbePoint> points, std::span<const ProbePair> pairs, double F_star,
                                   double B) {
  if (points.size() < 2) throw std::invalid_argument("estimate_constants: need at least two probe points");
  TheoryConstants c;
  c.F_star = F_star;
  c.B = B;

  const auto running = lipschitz_running_max(points, pairs);
  c.lipschitz_L = running.empty() ? 0.0 : running.back();

  double delta = std::numeric_limits<double>::infinity();
  double mu_F = 1.0, mu_G = 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> grad_sq, variance, mean_sq;
  for (const auto& p : points) {
    const double gsq = sq_norm(p.full_grad);
    const double gamma = p.loss - F_star;
    if (gamma > 0.0) delta = std::min(delta, gsq / (2.0 * gamma));
    if (gsq > 0.0) mu_F = std::min(mu_F, p.grad_alignment / gsq);
    const double second = p.mean_grad_sq_norm + p.grad_variance;
    if (second > 0.0) mu_G = std::min(mu_G, p.grad_alignment / second);
    lo = std::min(lo, p.min_sample_loss);
    hi = std::max(hi, p.max_sample_loss);
    grad_sq.push_back(gsq);
    variance.push_back(p.grad_variance);
    mean_sq.push_back(p.mean_grad_sq_norm);
  }
  c.delta = std::isfinite(delta) ? delta : 0.0;
  // Alignment can be nonpositive far from convergence; keep the constants
  // inside (0, 1] so the bounds stay defined.
  constexpr double kMuFloor = 1e-6;
  c.mu_F = std::clamp(mu_F, kMuFloor, 1.0);
  c.mu_G = std::clamp(mu_G, kMuFloor, 1.0);
  const Envelope v = upper_envelope(grad_sq, variance);
  c.Mv_slope = v.slope;
  c.Mv_const = v.intercept;
  const Envelope e = upper_envelope(grad_sq, mean_sq);
  c.Me_slope = e.slope;
  c.Me_const = e.intercept;
  c.sigma = std::max(0.0, (hi - lo) / 2.0);
  return c;
}

DescentBound loss_descent_bound(double grad_norm_sq, double tau_r, double b_r, const TheoryConstants& c, double eta,
                                std::size_t K) {
  if (K == 0 || !(b_r > 0.0)) throw std::invalid_argument("loss_descent_bound: K and b must be positive");
  const double k = static_cast<double>(K);
  DescentBound d;
  d.value = -(eta * c.mu_F / 2.0) * grad_norm_sq + c.lipschitz_L * tau_r * eta * eta / (2.0 * k) +
            (c.lipschitz_L * eta * eta / 2.0) * (c.Me_const + c.Mv_const / (k * b_r));
  const double denom = c.lipschitz_L * (c.Me_slope + c.Mv_slope / (k * b_r));
  d.eta_cap = denom > 0.0 ? c.mu_F / denom : std::numeric_limits<double>::infinity();
  d.eta_within_cap = eta > 0.0 && eta <= d.eta_cap;
  return d;
}

GenErrorBound gen_error_bound(std::span<const double> variance, std::span<const double> tau, std::span<const double> b,
                              const TheoryConstants& c, double eta, std::size_t K, double B) {
  if (variance.size() != tau.size() || variance.size() != b.size()) {
    throw std::invalid_argument("gen_error_bound: histories must be aligned");
  }
  if (K == 0 || !(B > 0.0)) throw std::invalid_argument("gen_error_bound: K and B must be positive");
  const double k = static_cast<double>(K);
  const double scale = c.sigma * eta / (k * B);
  GenErrorBound out;
  out.increments.reserve(variance.size());
  out.cumulative.reserve(variance.size());
  double total = 0.0;
  for (std::size_t r = 0; r < variance.size(); ++r) {
    double inc = 0.0;
    if (variance[r] > 0.0) {
      inc = tau[r] > 0.0 ? scale * std::sqrt(variance[r] / (k * tau[r] * b[r])) : std::numeric_limits<double>::infinity();
    }
    total += inc;
    out.increments.push_back(inc);
    out.cumulative.push_back(total);
  }
  return out;
}

double j_bar(double c_r, double b_r, double gamma_prev, const TheoryConstants& c, double eta, std::size_t K, double p_n,
             double B) {
  if (!(c_r > 0.0 && b_r > 0.0 && p_n > 0.0 && B > 0.0) || K == 0) {
    throw std::invalid_argument("j_bar: c, b, p_n, B, K must be positive");
  }
  const double k = static_cast<double>(K);
  const double L = c.lipschitz_L;
  const double constant = L * c.Me_const * eta * eta / 2.0 + c.sigma * eta / (2.0 * B * k * k * c.mu_G) +
                          L * c.sigma * eta * eta / (2.0 * B * k * k);
  return -c.delta * eta * c.mu_F * gamma_prev + L * p_n * eta * eta / (2.0 * k * c_r) +
         L * c.Mv_const * eta * eta / (2.0 * k * b_r) + gamma_prev * c.sigma * c_r / (B * k * p_n) + constant;
}

double var_descent_bound(double grad_variance, double tau_r, const TheoryConstants& c, double eta, std::size_t K) {
  if (K == 0) throw std::invalid_argument("var_descent_bound: K must be positive");
  return -(eta * c.mu_G / 2.0) * grad_variance + c.lipschitz_L * tau_r * eta * eta / (2.0 * static_cast<double>(K));
}

}  // namespace airfeel::theory
