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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airfeel/aircomp.hpp"

/// Latency and energy accounting per round and per device, and the
/// constraint checks C1 (latency), C2 (energy), C3 (peak power), C4 (sensing power).
namespace airfeel::budget {

/// Homogeneous device parameters. `kappa` is the effective switched
/// capacitance of the computation-energy model.
struct SystemParams {
  double T0 = 1e-3;         // sampling interval per sample, s
  double nu = 1e6;          // CPU cycles per sample
  double phi = 1e9;         // CPU frequency, cycles/s
  double kappa = 1e-28;     // effective switched capacitance
  double p_s = 0.1;         // sensing power, W
  double P_s_min = 0.1;     // W
  double P_s_max = 1.0;     // W
  double T_max = 1e300;     // total latency budget, s
  double E_max = 1e300;     // per-device energy budget, J

  /// Positivity only; the sensing power window C4 is reported by audit().
  void validate() const;
};

struct RoundLatency {
  double T_s = 0.0;
  double T_cp = 0.0;
  double T_cm = 0.0;
  double T_r = 0.0;
};

struct DeviceEnergy {
  double E_s = 0.0;
  double E_cp = 0.0;
  double E_cm = 0.0;

  double total() const { return E_s + E_cp + E_cm; }
};

/// T_s = T0 b, T_cp = b nu / phi, T_cm = t T1, T_r their sum.
RoundLatency round_latency(double b, const SystemParams& params, const aircomp::CommParams& comm);

/// E_s = T0 b p_s, E_cp = kappa nu phi^2 b, E_cm = t T1 c_r / |h_k|^2.
DeviceEnergy round_energy(double b, double c_r, double h_mag, const SystemParams& params,
                          const aircomp::CommParams& comm);

/// One round of the ledger: per-device raw sample counts and energies.
struct RoundEntry {
  std::size_t round = 0;
  double c_r = 0.0;
  std::vector<double> h_mag;
  std::vector<std::size_t> raw_samples;
  RoundLatency latency;
  std::vector<DeviceEnergy> energy;
};

/// Append-only accounting. Sensing and computation are charged for the
/// samples a device actually acquired; the round latency is set by the
/// slowest device (synchronous aggregation).
class RoundLedger {
 public:
  explicit RoundLedger(std::size_t devices = 0) : cum_energy_(devices) {}

  /// Builds and appends the entry for one round.
  const RoundEntry& record(std::size_t round, double c_r, std::span<const double> h_mag,
                           std::span<const std::size_t> raw_samples, const SystemParams& params,
                           const aircomp::CommParams& comm);

  std::span<const RoundEntry> entries() const noexcept { return entries_; }
  std::size_t devices() const noexcept { return cum_energy_.size(); }
  double cumulative_latency() const noexcept { return cum_latency_; }
  const std::vector<DeviceEnergy>& cumulative_energy() const noexcept { return cum_energy_; }
  std::size_t cumulative_raw_samples() const noexcept { return cum_raw_; }

 private:
  std::vector<RoundEntry> entries_;
  double cum_latency_ = 0.0;
  std::vector<DeviceEnergy> cum_energy_;
  std::size_t cum_raw_ = 0;
};

struct Feasibility {
  double Q = 0.0;
  double latency_branch = 0.0;
  double energy_branch = 0.0;
  bool feasible = false;
};

/// Worst-case sample budget
///   Q = min{(T_max - t R T1) / (T0 + nu/phi),
///           (E_max - sum_r t T1 c_r / h_floor^2) / (P_s_min T0 + kappa nu phi^2)}
/// with R = c_schedule.size(). Q = 0 and feasible = false when either
/// numerator is not positive.
Feasibility feasibility_Q(std::span<const double> c_schedule, const SystemParams& params,
                          const aircomp::CommParams& comm, double h_floor);

struct ConstraintResult {
  std::string name;
  bool pass = true;
  std::optional<std::size_t> first_violation_round;
  std::optional<std::size_t> device;
  std::string detail;
};

struct AuditReport {
  std::vector<ConstraintResult> constraints;  // C1, C2, C3, C4 in order

  bool pass() const;
  const ConstraintResult& get(const std::string& name) const;
  std::string to_text() const;
};

/// Checks a (complete or partial) ledger against C1-C4. C3 is checked
/// against the realized magnitudes stored in the ledger. With p_n == 0 the
/// channel is an ideal reference and c_r == 0 is allowed.
AuditReport audit(const RoundLedger& ledger, const SystemParams& params, const aircomp::CommParams& comm);

/// Sum of 1/b_r, the batch-size dependent part of the per-round objective.
double reciprocal_batch_cost(std::span<const double> plan);

/// Splits Q evenly over R rounds.
std::vector<double> uniform_allocation(double Q, std::size_t R);

/// Relative tolerance used by audit() comparisons.
inline constexpr double kAuditRelTol = 1e-12;

}  // namespace airfeel::budget
