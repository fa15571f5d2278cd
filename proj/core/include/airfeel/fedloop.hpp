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
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "airfeel/aircomp.hpp"
#include "airfeel/budget.hpp"
#include "airfeel/config.hpp"
#include "airfeel/dataset.hpp"
#include "airfeel/metrics.hpp"
#include "airfeel/nn.hpp"
#include "airfeel/sensing.hpp"
#include "airfeel/theory.hpp"

namespace airfeel::fed {

/// Data shared read-only by every run of an experiment.
struct Environment {
  std::shared_ptr<const data::SyntheticTaskSpec> task;       // null for file-backed data
  std::shared_ptr<const std::vector<nn::Sample>> file_train;  // null for synthetic data
  std::vector<nn::Sample> holdout;
};

/// Builds the task, holdout, and (for idx data) the training file contents.
Environment make_environment(const ExperimentConfig& config);

/// Everything fixed for one (scheme, repeat) run.
struct RunContext {
  const ExperimentConfig* config = nullptr;
  const Environment* env = nullptr;
  SchemeSpec scheme;
  std::size_t repeat = 0;
  std::vector<data::SampleSource> sources;  // one per device
  aircomp::CommParams comm;                 // t_slots filled from the model size
  aircomp::PowerSchedule schedule;
  double sample_budget = 0.0;               // per-device B
};

RunContext make_context(const ExperimentConfig& config, const Environment& env, const SchemeSpec& scheme,
                        std::size_t repeat);

struct RunState {
  std::size_t round = 0;
  nn::Model model;
  std::vector<sensing::ControllerState> controllers;
  budget::RoundLedger ledger;
  double gamma = 0.0;  // optimality-gap proxy from the latest evaluation
  double cumulative_unit_energy = 0.0;
  std::uint64_t cumulative_raw_samples = 0;
};

/// Round-0 state: initialized weights, fresh controllers, gamma from the holdout.
RunState initial_state(const RunContext& ctx);

/// What happened in one round, for diagnostics and tests.
struct RoundTrace {
  std::size_t round = 0;
  double c_r = 0.0;
  double tau = 0.0;  // p_n / c_r, 0 when noiseless
  std::vector<double> h_mag;
  std::vector<std::size_t> raw_samples;
  std::vector<double> thetas;
  std::vector<std::vector<double>> local_grads;  // importance-weighted device gradients
  std::vector<double> aggregate;                 // noisy global gradient
  std::vector<GradientBatch> raw_batches;        // acquired gradients per device
  std::vector<std::vector<nn::Sample>> samples;  // acquired samples per device
};

/// Randomness used by a round. Regular rounds use the master seed; replays
/// pass a derived seed so data, channel, and noise are redrawn together.
struct RoundSeed {
  std::uint64_t seed = 0;
};

/// One synchronous round: sense, aggregate over the air, update, and record
/// the ledger. Throws BudgetError once a latency, energy, or power limit is
/// crossed.
RoundTrace run_round(RunState& state, const RunContext& ctx);
RoundTrace run_round(RunState& state, const RunContext& ctx, RoundSeed seed);

/// Seed for replay `index` of the current configuration.
RoundSeed replay_seed(const ExperimentConfig& config, std::uint64_t index);

/// max(mean holdout loss - F*, floor).
double estimate_gamma(const nn::Model& model, std::span<const nn::Sample> holdout, double loss_floor,
                      double gap_floor);

/// Evaluation rounds: 0, every `period`, and the final round.
bool is_eval_round(std::size_t round, std::size_t rounds, std::size_t period);

/// Plain squared norm of the pooled raw-gradient mean and the mean
/// per-sample deviation energy around it (n - 1 denominator).
struct GradientMoments {
  double mean_sq_norm = 0.0;
  double variance = 0.0;
  double mean_raw_count = 0.0;
};
GradientMoments gradient_moments(const RoundTrace& trace);

/// A probe of the population-loss proxy and the training-gradient
/// statistics at `model`.
theory::ProbePoint make_probe(const nn::Model& model, std::span<const nn::Sample> population,
                              std::span<const nn::Sample> training);

struct Calibration {
  theory::TheoryConstants constants;
  std::vector<theory::ProbePoint> probes;
  std::vector<theory::ProbePair> pairs;
};

/// Runs `config.theory.calibration_rounds` rounds of the scheme, probing at
/// every evaluation round plus a perturbed partner of each probe, then
/// estimates the constants.
Calibration calibrate(const RunContext& ctx);

/// Probe-stream samples used as the population proxy during calibration.
std::vector<nn::Sample> probe_population(const RunContext& ctx);

struct RunResult {
  SchemeSpec scheme;
  std::size_t repeat = 0;
  metrics::MetricsRecord record;
  budget::AuditReport audit;
  nn::Model final_model;
  std::optional<theory::TheoryConstants> constants;
};

/// A complete run. When `config.diagnostics` is set the run is preceded by
/// a calibration and the bound columns are filled.
RunResult run_single(const RunContext& ctx);

/// Every scheme x repeat, distributed over `threads` workers. Results are
/// ordered scheme-major and do not depend on the thread count.
std::vector<RunResult> run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// "<scheme with '/' replaced by '_'>_r<repeat>.csv"
std::string csv_name(const SchemeSpec& scheme, std::size_t repeat);

}  // namespace airfeel::fed
