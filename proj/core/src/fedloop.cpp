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

#include "airfeel/fedloop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "airfeel/error.hpp"

namespace airfeel::fed {
namespace {

bool over(double value, double limit) {
  return value > limit + budget::kAuditRelTol * std::max(1.0, std::abs(limit));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_budgets(const RunState& state, double c_r, std::span<const double> h_mag, const RunContext& ctx) {
  const auto& sys = ctx.config->system;
  bool violated = over(state.ledger.cumulative_latency(), sys.T_max);
  for (const auto& e : state.ledger.cumulative_energy()) violated = violated || over(e.total(), sys.E_max);
  for (double h : h_mag) violated = violated || over(c_r, ctx.comm.P_cm_max * h * h);
  violated = violated || sys.p_s < sys.P_s_min || sys.p_s > sys.P_s_max;
  if (violated) {
    const auto report = budget::audit(state.ledger, sys, ctx.comm);
    throw BudgetError("budget exceeded in round " + std::to_string(state.ledger.entries().back().round) + "\n" +
                      report.to_text());
  }
}

data::SampleSource population_source(const RunContext& ctx) {
  if (ctx.env->task) return data::SampleSource::synthetic(ctx.env->task);
  return data::SampleSource::pool(ctx.env->file_train);
}

std::vector<nn::Sample> probe_training(const RunContext& ctx, std::size_t round) {
  const auto& cfg = *ctx.config;
  data::SampleStream stream(population_source(ctx), Rng(cfg.seed, StreamPurpose::probe, ctx.repeat, 1, round));
  return stream.draw(std::max<std::size_t>(2, cfg.devices * cfg.sensing.b_max));
}

nn::Model perturbed(const nn::Model& model, Rng& rng, double radius) {
  std::vector<double> w(model.weights().begin(), model.weights().end());
  std::vector<double> u(w.size());
  double sq = 0.0;
  for (double& v : u) {
    v = rng.normal();
    sq += v * v;
  }
  const double scale = radius / std::sqrt(sq);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * u[i];
  return nn::Model(model.arch(), std::move(w));
}

metrics::MetricsRow base_row(const RunState& state, const RunContext& ctx, double validation, double c_r,
                             double b_raw) {
  metrics::MetricsRow row;
  row.round = state.round;
  row.validation_loss = validation;
  row.cumulative_unit_energy = state.cumulative_unit_energy;
  row.cumulative_raw_samples = state.cumulative_raw_samples;
  for (const auto& e : state.ledger.cumulative_energy()) {
    row.joules_sensing += e.E_s;
    row.joules_compute += e.E_cp;
    row.joules_comm += e.E_cm;
  }
  double theta = 0.0;
  for (const auto& c : state.controllers) theta += c.theta_bar;
  row.theta_bar = theta / static_cast<double>(ctx.config->devices);
  row.c_r = c_r;
  row.b_raw = b_raw;
  return row;
}

}  // namespace

Environment make_environment(const ExperimentConfig& config) {
  config.validate();
  Environment env;
  const auto& d = config.data;
  if (d.source == "synthetic") {
    env.task = std::make_shared<const data::SyntheticTaskSpec>(data::make_task(
        d.class_count, d.feature_dim, d.noise_std, d.label_noise_prob, config.seed, d.min_class_separation));
    env.holdout = data::holdout(*env.task, config.holdout_size, config.seed);
    return env;
  }
  auto train = data::load_idx(d.idx_train_images, d.idx_train_labels);
  auto held = data::load_idx(d.idx_holdout_images, d.idx_holdout_labels);
  if (train.empty()) throw ConfigError("data.idx_train_images", "file holds no samples");
  if (held.empty()) throw ConfigError("data.idx_holdout_images", "file holds no samples");
  const std::size_t width = config.arch.input_width();
  for (const auto* set : {&train, &held}) {
    for (const auto& s : *set) {
      if (s.features.size() != width) throw ConfigError("model.layer_widths", "input width must equal the image size");
      if (s.label >= d.class_count) throw ConfigError("data.class_count", "a label exceeds the class count");
    }
  }
  if (held.size() > config.holdout_size) held.resize(config.holdout_size);
  env.file_train = std::make_shared<const std::vector<nn::Sample>>(std::move(train));
  env.holdout = std::move(held);
  return env;
}

RunContext make_context(const ExperimentConfig& config, const Environment& env, const SchemeSpec& scheme,
                        std::size_t repeat) {
  RunContext ctx;
  ctx.config = &config;
  ctx.env = &env;
  ctx.scheme = scheme;
  ctx.repeat = repeat;
  const std::size_t pool = config.data.pool_size_per_device;
  for (std::size_t k = 0; k < config.devices; ++k) {
    if (env.file_train) {
      ctx.sources.push_back(data::SampleSource::pool(env.file_train));
    } else if (pool == 0) {
      ctx.sources.push_back(data::SampleSource::synthetic(env.task));
    } else {
      auto samples = std::make_shared<const std::vector<nn::Sample>>(
          data::materialize_pool(*env.task, pool, config.seed, repeat, k));
      ctx.sources.push_back(data::SampleSource::pool(std::move(samples)));
    }
  }
  ctx.comm = config.comm;
  ctx.comm.t_slots = aircomp::slots_for(nn::param_count(config.arch), config.comm.L_slot);
  ctx.schedule = aircomp::PowerSchedule{scheme.power, config.power.q, config.rounds};
  ctx.sample_budget = config.power.optimal_sample_budget > 0.0
                          ? config.power.optimal_sample_budget
                          : static_cast<double>(config.rounds * config.sensing.b_max);
  return ctx;
}

RunState initial_state(const RunContext& ctx) {
  const auto& cfg = *ctx.config;
  Rng init(cfg.seed, StreamPurpose::init, ctx.repeat);
  RunState state{0, nn::Model::initialize(cfg.arch, init), {}, budget::RoundLedger(cfg.devices), 0.0, 0.0, 0};
  const sensing::ControllerState controller{cfg.sensing.theta_bar_initial, cfg.sensing.alpha, cfg.sensing.b_min,
                                            cfg.sensing.b_max};
  state.controllers.assign(cfg.devices, controller);
  state.gamma = estimate_gamma(state.model, ctx.env->holdout, cfg.power.loss_floor, cfg.power.gap_floor);
  return state;
}

RoundTrace run_round(RunState& state, const RunContext& ctx) { return run_round(state, ctx, {ctx.config->seed}); }

RoundTrace run_round(RunState& state, const RunContext& ctx, RoundSeed seed) {
  const auto& cfg = *ctx.config;
  const std::size_t r = state.round + 1;
  if (r > cfg.rounds) throw std::out_of_range("run_round: all rounds already done");
  const std::size_t K = cfg.devices;
  const std::size_t dim = state.model.dim();

  RoundTrace trace;
  trace.round = r;
  trace.raw_samples.resize(K);
  trace.thetas.resize(K);
  trace.local_grads.resize(K);
  trace.raw_batches.resize(K);
  trace.samples.resize(K);

  for (std::size_t k = 0; k < K; ++k) {
    auto stream = data::SampleStream::for_round(ctx.sources[k], seed.seed, ctx.repeat, k, r);
    auto& samples = trace.samples[k];
    if (ctx.scheme.sensing == SensingMode::reweight) {
      Rng resample(seed.seed, StreamPurpose::resample, ctx.repeat, k, r);
      const sensing::GradientSampler acquire = [&](GradientBatch& batch) {
        samples.push_back(stream.next());
        nn::append_sample_gradient(state.model, samples.back(), batch);
      };
      auto result = sensing::adaptive_collect(acquire, dim, state.controllers[k], resample);
      state.controllers[k] = result.state;
      trace.thetas[k] = result.theta;
      trace.local_grads[k] = weighted_mean(result.batch);
      trace.raw_samples[k] = result.raw.raw_count;
      trace.raw_batches[k] = std::move(result.raw);
    } else {
      samples = stream.draw(cfg.sensing.b_max);
      auto batch = nn::per_sample_gradients(state.model, samples);
      trace.thetas[k] = batch.size() >= 2 ? sensing::sample_variance(batch.norms) : 0.0;
      trace.local_grads[k] = weighted_mean(batch);
      trace.raw_samples[k] = batch.raw_count;
      trace.raw_batches[k] = std::move(batch);
    }
  }

  const double p_n = ctx.comm.p_n;
  if (ctx.scheme.power == aircomp::PowerScheme::optimal) {
    trace.c_r = aircomp::optimal_c(ctx.sample_budget, cfg.power.optimal_lipschitz, p_n, cfg.learning_rate,
                                   cfg.power.optimal_sigma, state.gamma, cfg.power.gap_floor);
  } else {
    trace.c_r = aircomp::schedule_c(ctx.schedule, r, p_n);
  }
  trace.tau = trace.c_r > 0.0 ? p_n / trace.c_r : 0.0;

  Rng channel(seed.seed, StreamPurpose::channel, ctx.repeat, 0, r);
  trace.h_mag = aircomp::draw_channel(K, cfg.power.channel_floor, channel).h_mag;
  Rng noise(seed.seed, StreamPurpose::noise, ctx.repeat, 0, r);
  trace.aggregate = aircomp::aggregate(trace.local_grads, trace.c_r, p_n, noise);
  state.model = nn::apply_update(state.model, trace.aggregate, cfg.learning_rate);

  state.round = r;
  state.ledger.record(r, trace.c_r, trace.h_mag, trace.raw_samples, cfg.system, ctx.comm);
  state.cumulative_unit_energy += aircomp::unit_energy(trace.c_r, ctx.comm.t_slots, ctx.comm.T1, p_n);
  for (std::size_t b : trace.raw_samples) state.cumulative_raw_samples += b;
  check_budgets(state, trace.c_r, trace.h_mag, ctx);
  return trace;
}

RoundSeed replay_seed(const ExperimentConfig& config, std::uint64_t index) {
  return {stream_key(config.seed, StreamPurpose::replay, index)};
}

double estimate_gamma(const nn::Model& model, std::span<const nn::Sample> holdout, double loss_floor,
                      double gap_floor) {
  return std::max(metrics::validation_loss(model, holdout) - loss_floor, gap_floor);
}

bool is_eval_round(std::size_t round, std::size_t rounds, std::size_t period) {
  return round % period == 0 || round == rounds;
}

GradientMoments gradient_moments(const RoundTrace& trace) {
  GradientMoments m;
  if (trace.raw_batches.empty()) return m;
  const std::size_t dim = trace.raw_batches.front().dim;
  std::vector<double> mean(dim, 0.0);
  std::size_t n = 0;
  for (const auto& b : trace.raw_batches) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto row = b.row(i);
      for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    }
    n += b.size();
  }
  if (n == 0) return m;
  for (double& v : mean) v /= static_cast<double>(n);
  double dev = 0.0;
  for (const auto& b : trace.raw_batches) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto row = b.row(i);
      for (std::size_t j = 0; j < dim; ++j) dev += (row[j] - mean[j]) * (row[j] - mean[j]);
    }
  }
  m.mean_sq_norm = dot(mean, mean);
  m.variance = n >= 2 ? dev / static_cast<double>(n - 1) : 0.0;
  m.mean_raw_count = static_cast<double>(n) / static_cast<double>(trace.raw_batches.size());
  return m;
}

theory::ProbePoint make_probe(const nn::Model& model, std::span<const nn::Sample> population,
                              std::span<const nn::Sample> training) {
  if (population.empty() || training.size() < 2) throw std::invalid_argument("make_probe: not enough samples");
  theory::ProbePoint p;
  p.weights.assign(model.weights().begin(), model.weights().end());
  p.full_grad = nn::batch_gradient(model, population);
  const auto pop_losses = nn::per_sample_losses(model, population);
  double sum = 0.0;
  for (double v : pop_losses) sum += v;
  p.loss = sum / static_cast<double>(pop_losses.size());

  const auto batch = nn::per_sample_gradients(model, training);
  const auto mean = plain_mean(batch);
  double dev = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.row(i);
    for (std::size_t j = 0; j < batch.dim; ++j) dev += (row[j] - mean[j]) * (row[j] - mean[j]);
  }
  p.grad_variance = dev / static_cast<double>(batch.size() - 1);
  p.mean_grad_sq_norm = dot(mean, mean);
  p.grad_alignment = dot(p.full_grad, mean);

  const auto train_losses = nn::per_sample_losses(model, training);
  const auto [lo1, hi1] = std::minmax_element(pop_losses.begin(), pop_losses.end());
  const auto [lo2, hi2] = std::minmax_element(train_losses.begin(), train_losses.end());
  p.min_sample_loss = std::min(*lo1, *lo2);
  p.max_sample_loss = std::max(*hi1, *hi2);
  return p;
}

std::vector<nn::Sample> probe_population(const RunContext& ctx) {
  const auto& cfg = *ctx.config;
  data::SampleStream stream(population_source(ctx), Rng(cfg.seed, StreamPurpose::probe, ctx.repeat, 0, 0));
  return stream.draw(cfg.theory.probe_samples);
}

Calibration calibrate(const RunContext& ctx) {
  const auto& cfg = *ctx.config;
  const std::size_t rounds = std::min(cfg.theory.calibration_rounds, cfg.rounds);
  const auto population = probe_population(ctx);
  constexpr double kPartnerRadius = 0.05;

  Calibration cal;
  RunState state = initial_state(ctx);
  std::optional<std::size_t> previous;
  const auto probe_here = [&] {
    const auto training = probe_training(ctx, state.round);
    const std::size_t at = cal.probes.size();
    cal.probes.push_back(make_probe(state.model, population, training));
    Rng rng(cfg.seed, StreamPurpose::probe, ctx.repeat, 2, state.round);
    cal.probes.push_back(make_probe(perturbed(state.model, rng, kPartnerRadius), population, training));
    cal.pairs.push_back({at, at + 1});
    if (previous) cal.pairs.push_back({*previous, at});
    previous = at;
  };
  probe_here();
  while (state.round < rounds) {
    run_round(state, ctx);
    if (is_eval_round(state.round, rounds, cfg.eval_period)) probe_here();
  }
  cal.constants = theory::estimate_constants(cal.probes, cal.pairs, cfg.power.loss_floor, ctx.sample_budget);
  return cal;
}

RunResult run_single(const RunContext& ctx) {
  const auto& cfg = *ctx.config;
  RunResult result{ctx.scheme, ctx.repeat, {}, {}, nn::Model::zeros(cfg.arch), std::nullopt};
  if (cfg.diagnostics) result.constants = calibrate(ctx).constants;

  auto& rec = result.record;
  rec.diagnostics = cfg.diagnostics;
  rec.set_meta("schema", std::to_string(metrics::kSchemaVersion));
  rec.set_meta("scheme", ctx.scheme.name());
  rec.set_meta("repeat", std::to_string(ctx.repeat));
  rec.set_meta("seed", std::to_string(cfg.seed));
  rec.set_meta("q", metrics::format_double(cfg.power.q));
  rec.set_meta("devices", std::to_string(cfg.devices));
  rec.set_meta("rounds", std::to_string(cfg.rounds));
  rec.set_meta("fingerprint", config_fingerprint(cfg));

  RunState state = initial_state(ctx);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  {
    auto row = base_row(state, ctx, metrics::validation_loss(state.model, ctx.env->holdout), 0.0, 0.0);
    row.diag = {nan, nan, nan, nan, nan, 0.0, nan};
    rec.rows.push_back(row);
  }

  const double eta = cfg.learning_rate;
  double gen_bound = 0.0;
  bool within_cap = true;
  while (state.round < cfg.rounds) {
    const RoundTrace trace = run_round(state, ctx);
    GradientMoments moments;
    if (result.constants) {
      moments = gradient_moments(trace);
      const double v = moments.variance, tau = trace.tau, b = moments.mean_raw_count;
      gen_bound += theory::gen_error_bound({&v, 1}, {&tau, 1}, {&b, 1}, *result.constants, eta, cfg.devices,
                                           ctx.sample_budget)
                       .increments.front();
    }
    if (!is_eval_round(state.round, cfg.rounds, cfg.eval_period)) continue;
    const double validation = metrics::validation_loss(state.model, ctx.env->holdout);
    state.gamma = std::max(validation - cfg.power.loss_floor, cfg.power.gap_floor);
    double b_raw = 0.0;
    for (std::size_t b : trace.raw_samples) b_raw += static_cast<double>(b);
    auto row = base_row(state, ctx, validation, trace.c_r, b_raw / static_cast<double>(cfg.devices));
    if (result.constants) {
      double train = 0.0;
      std::size_t n = 0;
      for (const auto& samples : trace.samples) {
        for (const auto& s : samples) train += nn::sample_loss(state.model, s);
        n += samples.size();
      }
      train /= static_cast<double>(n);
      const auto descent = theory::loss_descent_bound(moments.mean_sq_norm, trace.tau, moments.mean_raw_count,
                                                      *result.constants, eta, cfg.devices);
      within_cap = within_cap && descent.eta_within_cap;
      row.diag = {train, moments.mean_sq_norm, moments.variance, trace.tau, descent.value, gen_bound,
                  validation - train};
    }
    rec.rows.push_back(row);
  }
  if (result.constants) rec.set_meta("descent_bound_verified", within_cap ? "true" : "false");
  result.audit = budget::audit(state.ledger, cfg.system, ctx.comm);
  result.final_model = state.model;
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& config, std::size_t threads) {
  const Environment env = make_environment(config);
  struct Job {
    SchemeSpec scheme;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (const auto& s : config.schemes) {
    for (std::size_t r = 0; r < config.repeats; ++r) jobs.push_back({s, r});
  }
  std::vector<std::optional<RunResult>> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto ctx = make_context(config, env, jobs[i].scheme, jobs[i].repeat);
        out[i] = run_single(ctx);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, jobs.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunResult> results;
  results.reserve(out.size());
  for (auto& r : out) results.push_back(std::move(*r));
  return results;
}

std::string csv_name(const SchemeSpec& scheme, std::size_t repeat) {
  std::string name = scheme.name();
  std::replace(name.begin(), name.end(), '/', '_');
  return name + "_r" + std::to_string(repeat) + ".csv";
}

}  // namespace airfeel::fed
