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

#include "airfeel/budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace airfeel::budget {
namespace {

bool exceeds(double value, double limit) { return value > limit + kAuditRelTol * std::max(1.0, std::abs(limit)); }

}  // namespace

void SystemParams::validate() const {
  if (!(T0 > 0.0 && nu > 0.0 && phi > 0.0 && kappa > 0.0 && p_s > 0.0)) {
    throw std::invalid_argument("SystemParams: T0, nu, phi, kappa, p_s must be positive");
  }
  if (!(P_s_min > 0.0 && P_s_max >= P_s_min)) throw std::invalid_argument("SystemParams: need 0 < P_s_min <= P_s_max");
  if (!(T_max > 0.0 && E_max > 0.0)) throw std::invalid_argument("SystemParams: budgets must be positive");
}

RoundLatency round_latency(double b, const SystemParams& params, const aircomp::CommParams& comm) {
  RoundLatency l;
  l.T_s = params.T0 * b;
  l.T_cp = b * params.nu / params.phi;
  l.T_cm = static_cast<double>(comm.t_slots) * comm.T1;
  l.T_r = l.T_cp + l.T_cm + l.T_s;
  return l;
}

DeviceEnergy round_energy(double b, double c_r, double h_mag, const SystemParams& params,
                          const aircomp::CommParams& comm) {
  DeviceEnergy e;
  e.E_s = params.T0 * b * params.p_s;
  e.E_cp = params.kappa * params.nu * params.phi * params.phi * b;
  e.E_cm = aircomp::transmit_energy(c_r, h_mag, comm);
  return e;
}

const RoundEntry& RoundLedger::record(std::size_t round, double c_r, std::span<const double> h_mag,
                                      std::span<const std::size_t> raw_samples, const SystemParams& params,
                                      const aircomp::CommParams& comm) {
  if (h_mag.size() != devices() || raw_samples.size() != devices()) {
    throw std::invalid_argument("RoundLedger::record: per-device vectors must match the device count");
  }
  if (!entries_.empty() && round <= entries_.back().round) {
    throw std::invalid_argument("RoundLedger::record: rounds must increase");
  }
  RoundEntry e;
  e.round = round;
  e.c_r = c_r;
  e.h_mag.assign(h_mag.begin(), h_mag.end());
  e.raw_samples.assign(raw_samples.begin(), raw_samples.end());
  const std::size_t slowest = *std::max_element(raw_samples.begin(), raw_samples.end());
  e.latency = round_latency(static_cast<double>(slowest), params, comm);
  e.energy.reserve(devices());
  for (std::size_t k = 0; k < devices(); ++k) {
    e.energy.push_back(round_energy(static_cast<double>(raw_samples[k]), c_r, h_mag[k], params, comm));
  }

  cum_latency_ += e.latency.T_r;
  for (std::size_t k = 0; k < devices(); ++k) {
    cum_energy_[k].E_s += e.energy[k].E_s;
    cum_energy_[k].E_cp += e.energy[k].E_cp;
    cum_energy_[k].E_cm += e.energy[k].E_cm;
    cum_raw_ += raw_samples[k];
  }
  entries_.push_back(std::move(e));
  return entries_.back();
}

Feasibility feasibility_Q(std::span<const double> c_schedule, const SystemParams& params,
                          const aircomp::CommParams& comm, double h_floor) {
  if (!(h_floor > 0.0)) throw std::invalid_argument("feasibility_Q: h_floor must be positive");
  const double R = static_cast<double>(c_schedule.size());
  const double tT1 = static_cast<double>(comm.t_slots) * comm.T1;
  double comm_energy = 0.0;
  for (double c : c_schedule) comm_energy += tT1 * c / (h_floor * h_floor);

  Feasibility f;
  const double latency_num = params.T_max - tT1 * R;
  const double energy_num = params.E_max - comm_energy;
  f.latency_branch = latency_num / (params.T0 + params.nu / params.phi);
  f.energy_branch = energy_num / (params.P_s_min * params.T0 + params.kappa * params.nu * params.phi * params.phi);
  if (!(latency_num > 0.0) || !(energy_num > 0.0)) {
    f.latency_branch = std::max(f.latency_branch, 0.0);
    f.energy_branch = std::max(f.energy_branch, 0.0);
    f.Q = 0.0;
    f.feasible = false;
    return f;
  }
  f.Q = std::min(f.latency_branch, f.energy_branch);
  f.feasible = true;
  return f;
}

bool AuditReport::pass() const {
  return std::all_of(constraints.begin(), constraints.end(), [](const ConstraintResult& c) { return c.pass; });
}

const ConstraintResult& AuditReport::get(const std::string& name) const {
  for (const auto& c : constraints) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("AuditReport: no constraint named " + name);
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : constraints) {
    os << c.name << ": " << (c.pass ? "pass" : "FAIL");
    if (c.first_violation_round) os << " at round " << *c.first_violation_round;
    if (c.device) os << " (device " << *c.device << ")";
    if (!c.detail.empty()) os << " - " << c.detail;
    os << '\n';
  }
  return os.str();
}

AuditReport audit(const RoundLedger& ledger, const SystemParams& params, const aircomp::CommParams& comm) {
  AuditReport report;

  ConstraintResult c1{"C1", true, {}, {}, {}};
  double latency = 0.0;
  for (const auto& e : ledger.entries()) {
    latency += e.latency.T_r;
    if (exceeds(latency, params.T_max)) {
      c1.pass = false;
      c1.first_violation_round = e.round;
      std::ostringstream os;
      os << "cumulative latency " << latency << " s exceeds T_max " << params.T_max << " s";
      c1.detail = os.str();
      break;
    }
  }
  report.constraints.push_back(c1);

  ConstraintResult c2{"C2", true, {}, {}, {}};
  std::vector<double> energy(ledger.devices(), 0.0);
  for (const auto& e : ledger.entries()) {
    for (std::size_t k = 0; k < ledger.devices(); ++k) energy[k] += e.energy[k].total();
    const auto worst = std::max_element(energy.begin(), energy.end());
    if (worst != energy.end() && exceeds(*worst, params.E_max)) {
      c2.pass = false;
      c2.first_violation_round = e.round;
      c2.device = static_cast<std::size_t>(worst - energy.begin());
      std::ostringstream os;
      os << "device energy " << *worst << " J exceeds E_max " << params.E_max << " J";
      c2.detail = os.str();
      break;
    }
  }
  report.constraints.push_back(c2);

  ConstraintResult c3{"C3", true, {}, {}, {}};
  for (const auto& e : ledger.entries()) {
    if (!(e.c_r > 0.0) && comm.p_n > 0.0) {
      c3.pass = false;
      c3.first_violation_round = e.round;
      c3.detail = "denoising factor must be positive";
      break;
    }
    for (std::size_t k = 0; k < e.h_mag.size(); ++k) {
      const double limit = comm.P_cm_max * e.h_mag[k] * e.h_mag[k];
      if (exceeds(e.c_r, limit)) {
        c3.pass = false;
        c3.first_violation_round = e.round;
        c3.device = k;
        std::ostringstream os;
        os << "c_r " << e.c_r << " exceeds P_cm_max |h|^2 = " << limit;
        c3.detail = os.str();
        break;
      }
    }
    if (!c3.pass) break;
  }
  report.constraints.push_back(c3);

  ConstraintResult c4{"C4", true, {}, {}, {}};
  if (!(params.P_s_min > 0.0 && params.P_s_min <= params.p_s && params.p_s <= params.P_s_max)) {
    c4.pass = false;
    if (!ledger.entries().empty()) c4.first_violation_round = ledger.entries().front().round;
    std::ostringstream os;
    os << "sensing power " << params.p_s << " W outside [" << params.P_s_min << ", " << params.P_s_max << "] W";
    c4.detail = os.str();
  }
  report.constraints.push_back(c4);
  return report;
}

double reciprocal_batch_cost(std::span<const double> plan) {
  double sum = 0.0;
  for (double b : plan) {
    if (!(b > 0.0)) throw std::invalid_argument("reciprocal_batch_cost: batch sizes must be positive");
    sum += 1.0 / b;
  }
  return sum;
}

std::vector<double> uniform_allocation(double Q, std::size_t R) {
  if (R == 0) throw std::invalid_argument("uniform_allocation: R must be >= 1");
  return std::vector<double>(R, Q / static_cast<double>(R));
}

}  // namespace airfeel::budget
