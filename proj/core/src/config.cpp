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

#include "airfeel/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "airfeel/error.hpp"
#include "json.hpp"

namespace airfeel {
namespace {

using json = nlohmann::ordered_json;

constexpr double kUnlimited = 1e300;

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
    }
  }

  // null means unlimited
  void read_limit(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out = kUnlimited;
        return;
      }
      if (!v->is_number()) throw ConfigError(field(key), "expected a number or null");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void read_uint(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
        throw ConfigError(field(key), "expected a nonnegative integer");
      }
      out = static_cast<Int>(v->get<std::uint64_t>());
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void object(const std::string& key, const std::function<void(ObjectReader&)>& body) {
    if (const json* v = find(key)) {
      ObjectReader sub(*v, field(key));
      body(sub);
      sub.finish();
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

nn::Activation activation_from(const std::string& s, const std::string& field) {
  if (s == "relu") return nn::Activation::relu;
  if (s == "tanh") return nn::Activation::tanh;
  throw ConfigError(field, "expected \"relu\" or \"tanh\"");
}

nn::Loss loss_from(const std::string& s, const std::string& field) {
  if (s == "cross_entropy") return nn::Loss::cross_entropy;
  if (s == "squared_error") return nn::Loss::squared_error;
  throw ConfigError(field, "expected \"cross_entropy\" or \"squared_error\"");
}

std::string_view to_string(nn::Activation a) { return a == nn::Activation::relu ? "relu" : "tanh"; }
std::string_view to_string(nn::Loss l) { return l == nn::Loss::cross_entropy ? "cross_entropy" : "squared_error"; }

json limit(double v) { return v >= kUnlimited ? json(nullptr) : json(v); }

json to_json(const ExperimentConfig& c, bool with_schemes) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = c.seed;
  j["devices"] = c.devices;
  j["rounds"] = c.rounds;
  j["learning_rate"] = c.learning_rate;
  j["repeats"] = c.repeats;
  j["eval_period_rounds"] = c.eval_period;
  j["smoothing_window"] = c.smoothing_window;
  j["holdout_size"] = c.holdout_size;
  j["diagnostics"] = c.diagnostics;
  j["model"] = {{"layer_widths", c.arch.layer_widths},
                {"activation", to_string(c.arch.activation)},
                {"loss", to_string(c.arch.loss)}};
  const auto& d = c.data;
  j["data"] = {{"source", d.source},
               {"class_count", d.class_count},
               {"feature_dim", d.feature_dim},
               {"noise_std", d.noise_std},
               {"label_noise_prob", d.label_noise_prob},
               {"min_class_separation", d.min_class_separation},
               {"pool_size_per_device", d.pool_size_per_device},
               {"idx_train_images", d.idx_train_images},
               {"idx_train_labels", d.idx_train_labels},
               {"idx_holdout_images", d.idx_holdout_images},
               {"idx_holdout_labels", d.idx_holdout_labels}};
  j["sensing"] = {{"alpha", c.sensing.alpha},
                  {"b_min", c.sensing.b_min},
                  {"b_max", c.sensing.b_max},
                  {"theta_bar_initial", c.sensing.theta_bar_initial}};
  const auto& p = c.power;
  j["power"] = {{"q", p.q},
                {"channel_floor", p.channel_floor},
                {"optimal_sample_budget", p.optimal_sample_budget},
                {"optimal_lipschitz", p.optimal_lipschitz},
                {"optimal_sigma", p.optimal_sigma},
                {"loss_floor", p.loss_floor},
                {"gap_floor", p.gap_floor}};
  j["comm"] = {{"noise_power_W", c.comm.p_n},
               {"peak_power_W", limit(c.comm.P_cm_max)},
               {"slot_seconds", c.comm.T1},
               {"scalars_per_slot", c.comm.L_slot}};
  const auto& s = c.system;
  j["system"] = {{"sample_interval_seconds", s.T0},
                 {"cycles_per_sample", s.nu},
                 {"cpu_frequency_hz", s.phi},
                 {"capacitance_coefficient", s.kappa},
                 {"sensing_power_W", s.p_s},
                 {"sensing_power_min_W", s.P_s_min},
                 {"sensing_power_max_W", s.P_s_max},
                 {"latency_budget_seconds", limit(s.T_max)},
                 {"energy_budget_joules", limit(s.E_max)}};
  j["theory"] = {{"calibration_rounds", c.theory.calibration_rounds}, {"probe_samples", c.theory.probe_samples}};
  if (with_schemes) {
    json arr = json::array();
    for (const auto& sc : c.schemes) arr.push_back(sc.name());
    j["schemes"] = arr;
  }
  return j;
}

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(SensingMode mode) { return mode == SensingMode::reweight ? "reweight" : "baseline"; }

SensingMode sensing_mode_from_string(std::string_view name) {
  if (name == "reweight") return SensingMode::reweight;
  if (name == "baseline") return SensingMode::baseline;
  throw std::invalid_argument("unknown sensing mode: " + std::string(name));
}

std::string SchemeSpec::name() const {
  return std::string(aircomp::to_string(power)) + "/" + std::string(to_string(sensing));
}

SchemeSpec SchemeSpec::parse(std::string_view text) {
  SchemeSpec s;
  const auto slash = text.find('/');
  s.power = aircomp::power_scheme_from_string(text.substr(0, slash));
  if (slash != std::string_view::npos) s.sensing = sensing_mode_from_string(text.substr(slash + 1));
  return s;
}

void ExperimentConfig::validate() const {
  require(devices >= 1, "devices", "must be >= 1");
  require(rounds >= 1, "rounds", "must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate", "must be positive");
  require(repeats >= 1, "repeats", "must be >= 1");
  require(eval_period >= 1, "eval_period_rounds", "must be >= 1");
  require(smoothing_window >= 1, "smoothing_window", "must be >= 1");
  require(holdout_size >= 1, "holdout_size", "must be >= 1");

  try {
    arch.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model.layer_widths", e.what());
  }

  require(data.source == "synthetic" || data.source == "idx", "data.source", "expected \"synthetic\" or \"idx\"");
  require(data.class_count >= 2, "data.class_count", "must be >= 2");
  if (data.source == "synthetic") {
    require(data.feature_dim >= 1, "data.feature_dim", "must be >= 1");
    require(data.noise_std > 0.0, "data.noise_std", "must be positive");
    require(data.label_noise_prob >= 0.0 && data.label_noise_prob < 1.0, "data.label_noise_prob", "must be in [0, 1)");
    require(data.min_class_separation >= 0.0 && data.min_class_separation <= 1.0, "data.min_class_separation",
            "must be in [0, 1]");
    require(arch.input_width() == data.feature_dim, "model.layer_widths", "input width must equal data.feature_dim");
  } else {
    require(!data.idx_train_images.empty(), "data.idx_train_images", "required for the idx source");
    require(!data.idx_train_labels.empty(), "data.idx_train_labels", "required for the idx source");
    require(!data.idx_holdout_images.empty(), "data.idx_holdout_images", "required for the idx source");
    require(!data.idx_holdout_labels.empty(), "data.idx_holdout_labels", "required for the idx source");
  }
  const bool regression = arch.loss == nn::Loss::squared_error && arch.output_width() == 1;
  require(regression || arch.output_width() == data.class_count, "model.layer_widths",
          "output width must equal data.class_count");

  require(sensing.alpha >= 0.0 && sensing.alpha <= 1.0, "sensing.alpha", "must be in [0, 1]");
  require(sensing.b_min >= 1, "sensing.b_min", "must be >= 1");
  require(sensing.b_max >= sensing.b_min, "sensing.b_max", "must be >= sensing.b_min");
  require(sensing.theta_bar_initial >= 0.0, "sensing.theta_bar_initial", "must be >= 0");

  require(power.q > 0.0, "power.q", "must be positive");
  require(power.channel_floor > 0.0, "power.channel_floor", "must be positive");
  require(power.optimal_sample_budget >= 0.0, "power.optimal_sample_budget", "must be >= 0");
  require(power.optimal_lipschitz > 0.0, "power.optimal_lipschitz", "must be positive");
  require(power.optimal_sigma > 0.0, "power.optimal_sigma", "must be positive");
  require(power.gap_floor > 0.0, "power.gap_floor", "must be positive");

  require(comm.p_n >= 0.0, "comm.noise_power_W", "must be >= 0");
  require(comm.P_cm_max > 0.0, "comm.peak_power_W", "must be positive or null");
  require(comm.T1 > 0.0, "comm.slot_seconds", "must be positive");
  require(comm.L_slot >= 1, "comm.scalars_per_slot", "must be >= 1");

  require(system.T0 > 0.0, "system.sample_interval_seconds", "must be positive");
  require(system.nu > 0.0, "system.cycles_per_sample", "must be positive");
  require(system.phi > 0.0, "system.cpu_frequency_hz", "must be positive");
  require(system.kappa > 0.0, "system.capacitance_coefficient", "must be positive");
  require(system.p_s > 0.0, "system.sensing_power_W", "must be positive");
  require(system.P_s_min > 0.0, "system.sensing_power_min_W", "must be positive");
  require(system.P_s_max >= system.P_s_min, "system.sensing_power_max_W", "must be >= sensing_power_min_W");
  require(system.T_max > 0.0, "system.latency_budget_seconds", "must be positive or null");
  require(system.E_max > 0.0, "system.energy_budget_joules", "must be positive or null");

  require(theory.calibration_rounds >= 1, "theory.calibration_rounds", "must be >= 1");
  require(theory.probe_samples >= 1, "theory.probe_samples", "must be >= 1");

  require(!schemes.empty(), "schemes", "at least one scheme is required");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) require(!(schemes[i] == schemes[j]), "schemes", "duplicate entry");
    if (schemes[i].power == aircomp::PowerScheme::optimal) {
      require(comm.p_n > 0.0, "comm.noise_power_W", "the optimal scheme needs positive noise power");
    }
  }
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.schemes = {SchemeSpec{aircomp::PowerScheme::proposed, SensingMode::reweight},
               SchemeSpec{aircomp::PowerScheme::vanilla, SensingMode::reweight},
               SchemeSpec{aircomp::PowerScheme::reversed, SensingMode::reweight},
               SchemeSpec{aircomp::PowerScheme::proposed, SensingMode::baseline}};
  return c;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c = default_config();
  ObjectReader r(root, "");
  int version = kConfigSchemaVersion;
  r.read_uint("schema_version", version);
  if (version != kConfigSchemaVersion) throw ConfigError("schema_version", "unsupported version");
  r.read_uint("seed", c.seed);
  r.read_uint("devices", c.devices);
  r.read_uint("rounds", c.rounds);
  r.read("learning_rate", c.learning_rate);
  r.read_uint("repeats", c.repeats);
  r.read_uint("eval_period_rounds", c.eval_period);
  r.read_uint("smoothing_window", c.smoothing_window);
  r.read_uint("holdout_size", c.holdout_size);
  r.read("diagnostics", c.diagnostics);
  r.object("model", [&](ObjectReader& m) {
    if (const json* w = m.find("layer_widths")) {
      if (!w->is_array()) throw ConfigError(m.field("layer_widths"), "expected an array of positive integers");
      c.arch.layer_widths.clear();
      for (const auto& v : *w) {
        if (!v.is_number_unsigned()) throw ConfigError(m.field("layer_widths"), "expected an array of positive integers");
        c.arch.layer_widths.push_back(v.get<std::size_t>());
      }
    }
    std::string act(to_string(c.arch.activation)), loss(to_string(c.arch.loss));
    m.read("activation", act);
    m.read("loss", loss);
    c.arch.activation = activation_from(act, m.field("activation"));
    c.arch.loss = loss_from(loss, m.field("loss"));
  });
  r.object("data", [&](ObjectReader& d) {
    d.read("source", c.data.source);
    d.read_uint("class_count", c.data.class_count);
    d.read_uint("feature_dim", c.data.feature_dim);
    d.read("noise_std", c.data.noise_std);
    d.read("label_noise_prob", c.data.label_noise_prob);
    d.read("min_class_separation", c.data.min_class_separation);
    d.read_uint("pool_size_per_device", c.data.pool_size_per_device);
    d.read("idx_train_images", c.data.idx_train_images);
    d.read("idx_train_labels", c.data.idx_train_labels);
    d.read("idx_holdout_images", c.data.idx_holdout_images);
    d.read("idx_holdout_labels", c.data.idx_holdout_labels);
  });
  r.object("sensing", [&](ObjectReader& s) {
    s.read("alpha", c.sensing.alpha);
    s.read_uint("b_min", c.sensing.b_min);
    s.read_uint("b_max", c.sensing.b_max);
    s.read("theta_bar_initial", c.sensing.theta_bar_initial);
  });
  r.object("power", [&](ObjectReader& p) {
    p.read("q", c.power.q);
    p.read("channel_floor", c.power.channel_floor);
    p.read("optimal_sample_budget", c.power.optimal_sample_budget);
    p.read("optimal_lipschitz", c.power.optimal_lipschitz);
    p.read("optimal_sigma", c.power.optimal_sigma);
    p.read("loss_floor", c.power.loss_floor);
    p.read("gap_floor", c.power.gap_floor);
  });
  r.object("comm", [&](ObjectReader& m) {
    m.read("noise_power_W", c.comm.p_n);
    m.read_limit("peak_power_W", c.comm.P_cm_max);
    m.read("slot_seconds", c.comm.T1);
    m.read_uint("scalars_per_slot", c.comm.L_slot);
  });
  r.object("system", [&](ObjectReader& s) {
    s.read("sample_interval_seconds", c.system.T0);
    s.read("cycles_per_sample", c.system.nu);
    s.read("cpu_frequency_hz", c.system.phi);
    s.read("capacitance_coefficient", c.system.kappa);
    s.read("sensing_power_W", c.system.p_s);
    s.read("sensing_power_min_W", c.system.P_s_min);
    s.read("sensing_power_max_W", c.system.P_s_max);
    s.read_limit("latency_budget_seconds", c.system.T_max);
    s.read_limit("energy_budget_joules", c.system.E_max);
  });
  r.object("theory", [&](ObjectReader& t) {
    t.read_uint("calibration_rounds", c.theory.calibration_rounds);
    t.read_uint("probe_samples", c.theory.probe_samples);
  });
  if (const json* s = r.find("schemes")) {
    if (!s->is_array()) throw ConfigError("schemes", "expected an array of \"power/sensing\" strings");
    c.schemes.clear();
    for (const auto& v : *s) {
      if (!v.is_string()) throw ConfigError("schemes", "expected an array of \"power/sensing\" strings");
      try {
        c.schemes.push_back(SchemeSpec::parse(v.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("schemes", e.what());
      }
    }
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config, true).dump(2) + "\n"; }

std::string config_fingerprint(const ExperimentConfig& config) {
  const std::string text = to_json(config, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace airfeel
