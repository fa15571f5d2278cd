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
#include <string_view>
#include <vector>

#include "airfeel/rng.hpp"

/// Over-the-air aggregation on a block-fading multiple-access channel with
/// channel-inversion power control, plus denoising-factor schedules.
namespace airfeel::aircomp {

/// Per-device fading magnitudes for one round. Phases are not simulated:
/// with perfect CSI, channel inversion cancels them exactly.
struct ChannelRealization {
  std::vector<double> h_mag;
  double h_floor = 0.0;

  /// Smallest magnitude in this round.
  double worst() const;
};

struct CommParams {
  double p_n = 1.0;                 // receiver noise power
  double P_cm_max = 1e300;          // peak communication power
  std::size_t t_slots = 1;          // ceil(d / L_slot)
  double T1 = 1e-3;                 // slot duration, seconds
  std::size_t L_slot = 1000;        // scalars per slot

  void validate() const;
};

/// Slots needed to upload a d-dimensional vector.
std::size_t slots_for(std::size_t d, std::size_t L_slot);

enum class PowerScheme { proposed, vanilla, reversed, optimal };

std::string_view to_string(PowerScheme scheme);
PowerScheme power_scheme_from_string(std::string_view name);

struct PowerSchedule {
  PowerScheme scheme = PowerScheme::proposed;
  double q_param = 1.0;
  std::size_t R = 1;

  void validate() const;
};

/// K Rayleigh magnitudes with unit mean-square, conditioned on |h| >= h_floor.
/// By memorylessness of the exponential, |h|^2 = h_floor^2 + Exp(1).
ChannelRealization draw_channel(std::size_t K, double h_floor, Rng& rng);

/// Channel-inversion amplitude sqrt(c_r) / |h|. Throws for c_r <= 0.
double inversion_power(double c_r, double h_mag);

/// Device k's transmit energy t * T1 * c_r / |h|^2.
double transmit_energy(double c_r, double h_mag, const CommParams& comm);

/// Average of the device vectors plus i.i.d. N(0, p_n / c_r) per coordinate.
/// With p_n == 0 the result is the exact average and no noise is drawn.
std::vector<double> aggregate(std::span<const std::vector<double>> local_grads, double c_r, double p_n, Rng& rng);

namespace detail {
/// aggregate() with the noise standard deviation multiplied by `noise_scale`.
/// Exists so the self-test can prove it detects a mis-calibrated channel.
std::vector<double> aggregate_scaled(std::span<const std::vector<double>> local_grads, double c_r, double p_n, Rng& rng,
                                     double noise_scale);
}  // namespace detail

/// Denoising factor for round r (1-based):
///   proposed  p_n sqrt(r) / sqrt(q)
///   vanilla   p_n sqrt(R) / sqrt(q)
///   reversed  p_n sqrt(max(R - r, 1)) / sqrt(q)
/// The optimal scheme needs the optimality gap; use optimal_c() instead.
double schedule_c(const PowerSchedule& schedule, std::size_t r, double p_n);

/// The whole schedule c_1..c_R.
std::vector<double> schedule_series(const PowerSchedule& schedule, double p_n);

/// c* = sqrt(B L p_n^2 eta^2 / (2 sigma gamma)); gamma <= 0 is clamped to
/// `gamma_floor`, meaning the loss is already near its infimum.
double optimal_c(double B, double lipschitz_L, double p_n, double eta, double sigma, double gamma_prev,
                 double gamma_floor = 1e-12);

/// Dimensionless communication cost c_r t T1 / p_n. Zero when c_r is zero
/// (noiseless reference runs, where p_n is zero as well).
double unit_energy(double c_r, std::size_t t_slots, double T1, double p_n);

}  // namespace airfeel::aircomp
