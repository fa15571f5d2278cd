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
#include <numeric>
#include <random>
#include <vector>

#include "airfeel/budget.hpp"

namespace airfeel::budget {
namespace {

SystemParams small_system() {
  SystemParams p;
  p.T0 = 1e-3;
  p.nu = 2e6;
  p.phi = 1e9;
  p.kappa = 1e-28;
  p.p_s = 0.2;
  p.P_s_min = 0.2;
  p.P_s_max = 1.0;
  return p;
}

aircomp::CommParams small_comm() {
  aircomp::CommParams c;
  c.p_n = 1.0;
  c.t_slots = 3;
  c.T1 = 1e-3;
  return c;
}

TEST(Accounting, LatencyAndEnergyFormulas) {
  const auto p = small_system();
  const auto c = small_comm();
  const auto l = round_latency(10.0, p, c);
  EXPECT_DOUBLE_EQ(l.T_s, 1e-2);
  EXPECT_DOUBLE_EQ(l.T_cp, 2e-2);
  EXPECT_DOUBLE_EQ(l.T_cm, 3e-3);
  EXPECT_DOUBLE_EQ(l.T_r, l.T_s + l.T_cp + l.T_cm);
  const auto e = round_energy(10.0, 2.0, 0.5, p, c);
  EXPECT_DOUBLE_EQ(e.E_s, 1e-3 * 10 * 0.2);
  EXPECT_DOUBLE_EQ(e.E_cp, 1e-28 * 2e6 * 1e18 * 10);
  EXPECT_DOUBLE_EQ(e.E_cm, 3e-3 * 2.0 / 0.25);
}

TEST(Ledger, SlowestDeviceSetsLatencyAndCountsAccumulate) {
  const auto p = small_system();
  const auto c = small_comm();
  RoundLedger ledger(2);
  const std::vector<double> h{1.0, 0.5};
  const std::vector<std::size_t> raw{4, 9};
  ledger.record(1, 1.0, h, raw, p, c);
  ledger.record(2, 2.0, h, raw, p, c);
  EXPECT_EQ(ledger.cumulative_raw_samples(), 26u);
  EXPECT_DOUBLE_EQ(ledger.cumulative_latency(), 2 * round_latency(9.0, p, c).T_r);
  EXPECT_DOUBLE_EQ(ledger.cumulative_energy()[0].E_cm, 3e-3 * (1.0 + 2.0));
  EXPECT_DOUBLE_EQ(ledger.cumulative_energy()[1].E_cm, 3e-3 * (1.0 + 2.0) / 0.25);
  EXPECT_THROW(ledger.record(2, 1.0, h, raw, p, c), std::invalid_argument);
  EXPECT_THROW(ledger.record(3, 1.0, std::vector<double>{1.0}, raw, p, c), std::invalid_argument);
}

TEST(FeasibilityQ, ClosedFormBranches) {
  auto p = small_system();
  p.T_max = 10.0;
  p.E_max = 5.0;
  const auto c = small_comm();
  const std::vector<double> sched{1.0, 2.0, 3.0};
  const auto f = feasibility_Q(sched, p, c, 0.5);
  EXPECT_DOUBLE_EQ(f.latency_branch, (10.0 - 3 * 3e-3) / (1e-3 + 2e-3));
  EXPECT_DOUBLE_EQ(f.energy_branch, (5.0 - 3e-3 * 6.0 / 0.25) / (0.2 * 1e-3 + 1e-28 * 2e6 * 1e18));
  EXPECT_DOUBLE_EQ(f.Q, std::min(f.latency_branch, f.energy_branch));
  EXPECT_TRUE(f.feasible);

  p.T_max = 5e-3;
  const auto g = feasibility_Q(sched, p, c, 0.5);
  EXPECT_FALSE(g.feasible);
  EXPECT_EQ(g.Q, 0.0);
}

// Any equal-per-device allocation whose per-device total stays within Q is
// admissible on every channel draw above the floor, and overshooting the
// binding branch on the floor channel is caught.
TEST(FeasibilityQ, DominatesRandomAllocations) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto p = small_system();
    p.T_max = 0.5 + 5.0 * unif(gen);
    p.E_max = 0.05 + 2.0 * unif(gen);
    const auto c = small_comm();
    const std::size_t R = 5 + gen() % 20;
    const double floor = 0.2 + unif(gen);
    std::vector<double> sched(R);
    for (double& v : sched) v = 0.01 + 0.5 * unif(gen);
    const auto f = feasibility_Q(sched, p, c, floor);
    if (!f.feasible || f.Q < 2.0 * static_cast<double>(R)) continue;
    ++checked;

    std::vector<double> w(R);
    for (double& v : w) v = unif(gen) + 0.05;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::size_t> plan(R);
    for (std::size_t r = 0; r < R; ++r) plan[r] = static_cast<std::size_t>(std::floor(f.Q * w[r] / total));

    RoundLedger ledger(3);
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<double> h(3);
      for (double& v : h) v = floor + unif(gen);
      const std::vector<std::size_t> raw(3, plan[r]);
      ledger.record(r + 1, sched[r], h, raw, p, c);
    }
    const auto rep = audit(ledger, p, c);
    ASSERT_TRUE(rep.get("C1").pass) << rep.to_text();
    ASSERT_TRUE(rep.get("C2").pass) << rep.to_text();

    RoundLedger over(1);
    const auto extra = static_cast<std::size_t>(std::ceil(f.Q * 1.01)) + 1;
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t b = r == 0 ? extra : 0;
      over.record(r + 1, sched[r], std::vector<double>{floor}, std::vector<std::size_t>{b}, p, c);
    }
    const auto bad = audit(over, p, c);
    EXPECT_FALSE(bad.get("C1").pass && bad.get("C2").pass);
  }
  EXPECT_GT(checked, 100);
}

TEST(Audit, PinpointsLatencyViolation) {
  auto p = small_system();
  const auto c = small_comm();
  p.T_max = 2.5 * round_latency(10.0, p, c).T_r;
  RoundLedger ledger(2);
  for (std::size_t r = 1; r <= 4; ++r) {
    ledger.record(r, 1.0, std::vector<double>{1.0, 1.0}, std::vector<std::size_t>{10, 3}, p, c);
  }
  const auto rep = audit(ledger, p, c);
  EXPECT_FALSE(rep.pass());
  EXPECT_FALSE(rep.get("C1").pass);
  EXPECT_EQ(rep.get("C1").first_violation_round, 3u);
  EXPECT_TRUE(rep.get("C2").pass);
}

TEST(Audit, PinpointsEnergyViolationAndDevice) {
  auto p = small_system();
  const auto c = small_comm();
  // Device 1 sits on a weak channel and pays 4x the transmit energy.
  p.E_max = 0.05;
  RoundLedger ledger(2);
  for (std::size_t r = 1; r <= 10; ++r) {
    ledger.record(r, 1.0, std::vector<double>{1.0, 0.5}, std::vector<std::size_t>{1, 1}, p, c);
  }
  const auto rep = audit(ledger, p, c);
  const auto& c2 = rep.get("C2");
  EXPECT_FALSE(c2.pass);
  EXPECT_EQ(c2.device, 1u);
  const double per_round = round_energy(1.0, 1.0, 0.5, p, c).total();
  EXPECT_EQ(c2.first_violation_round, static_cast<std::size_t>(std::floor(0.05 / per_round)) + 1);
}

TEST(Audit, PeakPowerAndSensingWindow) {
  auto p = small_system();
  auto c = small_comm();
  c.P_cm_max = 2.0;
  RoundLedger ledger(2);
  ledger.record(1, 1.0, std::vector<double>{1.0, 1.0}, std::vector<std::size_t>{1, 1}, p, c);
  ledger.record(2, 1.0, std::vector<double>{1.0, 0.6}, std::vector<std::size_t>{1, 1}, p, c);
  auto rep = audit(ledger, p, c);
  EXPECT_FALSE(rep.get("C3").pass);
  EXPECT_EQ(rep.get("C3").first_violation_round, 2u);
  EXPECT_EQ(rep.get("C3").device, 1u);
  EXPECT_TRUE(rep.get("C4").pass);

  p.p_s = 1.5;
  rep = audit(ledger, p, c);
  EXPECT_FALSE(rep.get("C4").pass);
  EXPECT_NE(rep.to_text().find("C4: FAIL"), std::string::npos);
}

TEST(Audit, NoiselessReferenceAllowsZeroDenoisingFactor) {
  const auto p = small_system();
  auto c = small_comm();
  c.p_n = 0.0;
  RoundLedger ledger(1);
  ledger.record(1, 0.0, std::vector<double>{1.0}, std::vector<std::size_t>{1}, p, c);
  EXPECT_TRUE(audit(ledger, p, c).pass());
  c.p_n = 1.0;
  EXPECT_FALSE(audit(ledger, p, c).get("C3").pass);
}

TEST(Allocation, UniformMinimizesReciprocalCost) {
  const double Q = 300.0;
  const auto uniform = uniform_allocation(Q, 10);
  const double best = reciprocal_batch_cost(uniform);
  EXPECT_DOUBLE_EQ(best, 10.0 * 10.0 / Q);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> plan(10);
    double s = 0.0;
    for (double& v : plan) s += (v = unif(gen));
    for (double& v : plan) v *= Q / s;
    EXPECT_GE(reciprocal_batch_cost(plan), best * (1.0 - 1e-12));
  }
  EXPECT_THROW(reciprocal_batch_cost(std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

}  // namespace
}  // namespace airfeel::budget
