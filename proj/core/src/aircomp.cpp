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

#include "airfeel/aircomp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "airfeel/error.hpp"

namespace airfeel::aircomp {

double ChannelRealization::worst() const {
  if (h_mag.empty()) throw std::invalid_argument("ChannelRealization: no devices");
  return *std::min_element(h_mag.begin(), h_mag.end());
}

void CommParams::validate() const {
  if (!(p_n >= 0.0)) throw std::invalid_argument("CommParams: p_n must be >= 0");
  if (!(P_cm_max > 0.0)) throw std::invalid_argument("CommParams: P_cm_max must be positive");
  if (t_slots < 1) throw std::invalid_argument("CommParams: t_slots must be >= 1");
  if (!(T1 > 0.0)) throw std::invalid_argument("CommParams: T1 must be positive");
  if (L_slot < 1) throw std::invalid_argument("CommParams: L_slot must be >= 1");
}

std::size_t slots_for(std::size_t d, std::size_t L_slot) {
  if (L_slot == 0) throw std::invalid_argument("slots_for: L_slot must be >= 1");
  return (d + L_slot - 1) / L_slot;
}

std::string_view to_string(PowerScheme scheme) {
  switch (scheme) {
    case PowerScheme::proposed: return "proposed";
    case PowerScheme::vanilla: return "vanilla";
    case PowerScheme::reversed: return "reversed";
    case PowerScheme::optimal: return "optimal";
  }
  return "unknown";
}

PowerScheme power_scheme_from_string(std::string_view name) {
  if (name == "proposed") return PowerScheme::proposed;
  if (name == "vanilla") return PowerScheme::vanilla;
  if (name == "reversed") return PowerScheme::reversed;
  if (name == "optimal") return PowerScheme::optimal;
  throw std::invalid_argument("unknown power scheme '" + std::string(name) + "'");
}

void PowerSchedule::validate() const {
  if (!(q_param > 0.0)) throw std::invalid_argument("PowerSchedule: q must be positive");
  if (R < 1) throw std::invalid_argument("PowerSchedule: R must be >= 1");
}

ChannelRealization draw_channel(std::size_t K, double h_floor, Rng& rng) {
  if (K < 1) throw std::invalid_argument("draw_channel: K must be >= 1");
  if (!(h_floor >= 0.0)) throw std::invalid_argument("draw_channel: h_floor must be >= 0");
  ChannelRealization ch;
  ch.h_floor = h_floor;
  ch.h_mag.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double power = h_floor * h_floor - std::log1p(-rng.uniform());
    ch.h_mag.push_back(std::max(std::sqrt(power), h_floor));
  }
  return ch;
}

double inversion_power(double c_r, double h_mag) {
  if (!(c_r > 0.0)) throw std::invalid_argument("inversion_power: c_r must be positive");
  if (!(h_mag > 0.0)) throw std::invalid_argument("inversion_power: |h| must be positive");
  return std::sqrt(c_r) / h_mag;
}

double transmit_energy(double c_r, double h_mag, const CommParams& comm) {
  if (!(h_mag > 0.0)) throw std::invalid_argument("transmit_energy: |h| must be positive");
  return static_cast<double>(comm.t_slots) * comm.T1 * c_r / (h_mag * h_mag);
}

namespace detail {

std::vector<double> aggregate_scaled(std::span<const std::vector<double>> local_grads, double c_r, double p_n, Rng& rng,
                                     double noise_scale) {
  if (local_grads.empty()) throw std::invalid_argument("aggregate: no device gradients");
  if (!(p_n >= 0.0)) throw std::invalid_argument("aggregate: p_n must be >= 0");
  const std::size_t d = local_grads.front().size();
  std::vector<double> out(d, 0.0);
  for (const auto& g : local_grads) {
    if (g.size() != d) throw DimensionError("aggregate: device gradient dimension mismatch");
    for (std::size_t j = 0; j < d; ++j) out[j] += g[j];
  }
  const double inv_k = 1.0 / static_cast<double>(local_grads.size());
  for (double& v : out) v *= inv_k;
  if (p_n == 0.0) return out;
  if (!(c_r > 0.0)) throw std::invalid_argument("aggregate: c_r must be positive when p_n > 0");
  const double std_dev = noise_scale * std::sqrt(p_n / c_r);
  for (double& v : out) v += std_dev * rng.normal();
  return out;
}

}  // namespace detail

std::vector<double> aggregate(std::span<const std::vector<double>> local_grads, double c_r, double p_n, Rng& rng) {
  return detail::aggregate_scaled(local_grads, c_r, p_n, rng, 1.0);
}

double schedule_c(const PowerSchedule& schedule, std::size_t r, double p_n) {
  schedule.validate();
  if (r < 1 || r > schedule.R) throw std::out_of_range("schedule_c: round outside [1, R]");
  const double scale = p_n / std::sqrt(schedule.q_param);
  switch (schedule.scheme) {
    case PowerScheme::proposed: return scale * std::sqrt(static_cast<double>(r));
    case PowerScheme::vanilla: return scale * std::sqrt(static_cast<double>(schedule.R));
    case PowerScheme::reversed: return scale * std::sqrt(static_cast<double>(std::max<std::size_t>(schedule.R - r, 1)));
    case PowerScheme::optimal: break;
  }
  throw std::invalid_argument("schedule_c: the optimal scheme depends on the optimality gap; use optimal_c");
}

std::vector<double> schedule_series(const PowerSchedule& schedule, double p_n) {
  std::vector<double> out;
  out.reserve(schedule.R);
  for (std::size_t r = 1; r <= schedule.R; ++r) out.push_back(schedule_c(schedule, r, p_n));
  return out;
}

double optimal_c(double B, double lipschitz_L, double p_n, double eta, double sigma, double gamma_prev,
                 double gamma_floor) {
  if (!(B > 0.0 && lipschitz_L > 0.0 && p_n > 0.0 && eta > 0.0 && sigma > 0.0)) {
    throw std::invalid_argument("optimal_c: B, L, p_n, eta, sigma must be positive");
  }
  const double gamma = std::max(gamma_prev, gamma_floor);
  return std::sqrt(B * lipschitz_L * p_n * p_n * eta * eta / (2.0 * sigma * gamma));
}

double unit_energy(double c_r, std::size_t t_slots, double T1, double p_n) {
  if (c_r == 0.0) return 0.0;
  if (!(p_n > 0.0)) throw std::invalid_argument("unit_energy: p_n must be positive when c_r > 0");
  return c_r * static_cast<double>(t_slots) * T1 / p_n;
}

}  // namespace airfeel::aircomp
