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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "airfeel/budget.hpp"
#include "airfeel/config.hpp"
#include "airfeel/error.hpp"
#include "airfeel/fedloop.hpp"
#include "airfeel/metrics.hpp"
#include "airfeel/selftest.hpp"

namespace fs = std::filesystem;
using namespace airfeel;

namespace {

constexpr int kOk = 0;
constexpr int kRunError = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> schemes;
  std::optional<std::size_t> repeats;
  bool diagnostics = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_out) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  if (with_out) cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--scheme", o.schemes, "Run only these schemes, e.g. vanilla or proposed/baseline")->delimiter(',');
  cmd->add_option("--repeats", o.repeats, "Override the repeat count");
  cmd->add_flag("--diagnostics", o.diagnostics, "Append bound diagnostics columns");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (o.diagnostics) cfg.diagnostics = true;
  if (!o.schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : o.schemes) {
      try {
        cfg.schemes.push_back(SchemeSpec::parse(s));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--scheme", e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

std::size_t thread_count() {
  if (const char* env = std::getenv("AIRFEEL_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring AIRFEEL_THREADS=" << env << "\n";
  }
  return 1;
}

std::string audit_text(const std::vector<fed::RunResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << "[" << r.scheme.name() << " repeat " << r.repeat << "] " << (r.audit.pass() ? "pass" : "FAIL") << "\n"
       << r.audit.to_text();
  }
  return os.str();
}

bool all_audits_pass(const std::vector<fed::RunResult>& results) {
  for (const auto& r : results) {
    if (!r.audit.pass()) return false;
  }
  return true;
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<fed::RunResult>& results, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& r : results) metrics::write_csv(r.record, dir / fed::csv_name(r.scheme, r.repeat));
  std::ofstream(dir / "config.json", std::ios::binary) << dump_config(cfg);
  std::ofstream(dir / "audit.txt", std::ios::binary) << audit_text(results);
}

void print_summary(const ExperimentConfig& cfg, const std::vector<fed::RunResult>& results) {
  std::cout << std::left << std::setw(22) << "scheme" << std::setw(14) << "final_loss" << std::setw(16)
            << "smoothed_final" << std::setw(16) << "unit_energy" << "raw_samples\n";
  for (const auto& scheme : cfg.schemes) {
    std::vector<std::vector<double>> smoothed;
    double final_loss = 0.0, energy = 0.0, raw = 0.0;
    std::size_t n = 0;
    for (const auto& r : results) {
      if (!(r.scheme == scheme)) continue;
      const auto losses = r.record.losses();
      smoothed.push_back(metrics::smooth(losses, cfg.smoothing_window));
      final_loss += losses.back();
      energy += r.record.rows.back().cumulative_unit_energy;
      raw += static_cast<double>(r.record.rows.back().cumulative_raw_samples);
      ++n;
    }
    if (n == 0) continue;
    const double dn = static_cast<double>(n);
    std::cout << std::setw(22) << scheme.name() << std::setw(14) << final_loss / dn << std::setw(16)
              << metrics::pointwise_mean(smoothed).back() << std::setw(16) << energy / dn << raw / dn << "\n";
  }
}

int cmd_run(const Overrides& o) {
  const auto cfg = resolve(o);
  const auto results = fed::run_experiment(cfg, thread_count());
  write_outputs(cfg, results, o.out_dir);
  print_summary(cfg, results);
  if (!all_audits_pass(results)) {
    std::cerr << audit_text(results);
    return kRunError;
  }
  return kOk;
}

int cmd_sweep(const Overrides& o, const std::vector<double>& qs) {
  const auto base = resolve(o);
  std::vector<ExperimentConfig> points;
  for (double q : qs) {
    auto cfg = base;
    cfg.power.q = q;
    cfg.validate();
    points.push_back(cfg);
  }
  bool ok = true;
  for (const auto& cfg : points) {
    const auto results = fed::run_experiment(cfg, thread_count());
    write_outputs(cfg, results, fs::path(o.out_dir) / ("q_" + metrics::format_double(cfg.power.q)));
    std::cout << "q = " << cfg.power.q << "\n";
    print_summary(cfg, results);
    ok = ok && all_audits_pass(results);
  }
  return ok ? kOk : kRunError;
}

int cmd_audit(const Overrides& o) {
  const auto cfg = resolve(o);
  const fed::Environment env = fed::make_environment(cfg);
  bool ok = true;
  for (const auto& scheme : cfg.schemes) {
    const auto ctx = fed::make_context(cfg, env, scheme, 0);
    if (scheme.power != aircomp::PowerScheme::optimal) {
      const auto f = budget::feasibility_Q(aircomp::schedule_series(ctx.schedule, ctx.comm.p_n), cfg.system, ctx.comm,
                                           cfg.power.channel_floor);
      std::cout << scheme.name() << ": sample budget Q = " << f.Q << " (latency branch " << f.latency_branch
                << ", energy branch " << f.energy_branch << ")"
                << (f.feasible ? "" : " infeasible") << "\n";
      ok = ok && f.feasible;
    }
  }
  auto single = cfg;
  single.repeats = 1;
  single.diagnostics = false;
  try {
    const auto results = fed::run_experiment(single, thread_count());
    std::cout << audit_text(results);
    ok = ok && all_audits_pass(results);
  } catch (const BudgetError& e) {
    std::cout << e.what();
    ok = false;
  }
  return ok ? kOk : kRunError;
}

int cmd_selftest(double noise_scale) {
  selftest::Options opt;
  opt.noise_scale = noise_scale;
  const auto checks = selftest::run(opt);
  for (const auto& c : checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  return selftest::all_pass(checks) ? kOk : kRunError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated edge learning simulator"};
  app.require_subcommand(1);

  Overrides run_opts, sweep_opts, audit_opts;
  bool print_defaults = false;
  auto* run = app.add_subcommand("run", "Run every scheme and repeat, writing one CSV per run");
  add_common(run, run_opts, true);
  run->add_flag("--print-defaults", print_defaults, "Print the default config and exit");
  run->get_option("--config")->required(false);

  std::vector<double> qs{1.0, 4.0, 16.0};
  auto* sweep = app.add_subcommand("sweep", "Repeat the run for several power-schedule q values");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--q", qs, "Values of q")->delimiter(',')->capture_default_str();

  auto* audit = app.add_subcommand("audit", "Report sample budgets and the constraint audit of one repeat");
  add_common(audit, audit_opts, false);

  double noise_scale = 1.0;
  auto* self = app.add_subcommand("selftest", "Run the fast invariant suite");
  self->add_option("--inject-noise-scale", noise_scale)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      if (print_defaults) {
        std::cout << dump_config(default_config());
        return kOk;
      }
      if (run_opts.config_path.empty()) {
        std::cerr << "run: --config is required\n" << run->help();
        return kConfigError;
      }
      return cmd_run(run_opts);
    }
    if (*sweep) return cmd_sweep(sweep_opts, qs);
    if (*audit) return cmd_audit(audit_opts);
    if (*self) return cmd_selftest(noise_scale);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunError;
  }
  return kRunError;
}
