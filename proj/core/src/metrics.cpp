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

#include "airfeel/metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "airfeel/error.hpp"

namespace airfeel::metrics {
namespace {

const std::vector<std::string> kBaseColumns = {
    "schema_version",  "round",          "validation_loss", "cumulative_unit_energy", "cumulative_raw_samples",
    "joules_sensing", "joules_compute", "joules_comm",     "theta_bar",              "c_r",
    "b_raw"};

const std::vector<std::string> kDiagColumns = {"train_loss", "grad_norm_sq",    "grad_variance", "tau",
                                               "descent_bound", "gen_error_bound", "gen_gap"};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError("metrics csv: bad number '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError("metrics csv: bad integer '" + text + "'");
  return v;
}

}  // namespace

std::optional<std::string> MetricsRecord::get_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void MetricsRecord::set_meta(const std::string& key, std::string value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  meta.emplace_back(key, std::move(value));
}

std::vector<double> MetricsRecord::losses() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.validation_loss);
  return out;
}

double validation_loss(const nn::Model& model, std::span<const nn::Sample> holdout) {
  if (holdout.empty()) throw std::invalid_argument("validation_loss: empty holdout");
  return nn::mean_loss(model, holdout);
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (series.empty()) throw std::invalid_argument("smooth: empty series");
  if (window == 0) throw std::invalid_argument("smooth: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t m = std::min(t, window - 1);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      const double w = static_cast<double>(window - j);
      num += w * series[t - j];
      den += w;
    }
    out[t] = num / den;
  }
  return out;
}

std::vector<double> pointwise_mean(std::span<const std::vector<double>> series) {
  if (series.empty()) return {};
  const std::size_t n = series.front().size();
  std::vector<double> out(n, 0.0);
  for (const auto& s : series) {
    if (s.size() != n) throw std::invalid_argument("pointwise_mean: series differ in length");
    for (std::size_t i = 0; i < n; ++i) out[i] += s[i];
  }
  for (double& v : out) v /= static_cast<double>(series.size());
  return out;
}

std::optional<Crossing> crossing_cost(const MetricsRecord& record, std::span<const double> smoothed_loss,
                                      double target_loss) {
  if (smoothed_loss.size() != record.rows.size()) {
    throw std::invalid_argument("crossing_cost: smoothed series does not align with the record");
  }
  for (std::size_t i = 0; i < smoothed_loss.size(); ++i) {
    if (smoothed_loss[i] <= target_loss) {
      const auto& row = record.rows[i];
      return Crossing{i, row.round, row.cumulative_unit_energy, row.cumulative_raw_samples};
    }
  }
  return std::nullopt;
}

std::vector<std::string> column_names(bool diagnostics) {
  auto cols = kBaseColumns;
  if (diagnostics) cols.insert(cols.end(), kDiagColumns.begin(), kDiagColumns.end());
  return cols;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_csv(const MetricsRecord& record, std::ostream& out) {
  for (const auto& [k, v] : record.meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw std::invalid_argument("write_csv: metadata may not contain '=' in keys or newlines");
    }
    out << "# " << k << '=' << v << '\n';
  }
  const auto cols = column_names(record.diagnostics);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : record.rows) {
    out << kSchemaVersion << ',' << r.round << ',' << format_double(r.validation_loss) << ','
        << format_double(r.cumulative_unit_energy) << ',' << r.cumulative_raw_samples << ','
        << format_double(r.joules_sensing) << ',' << format_double(r.joules_compute) << ','
        << format_double(r.joules_comm) << ',' << format_double(r.theta_bar) << ',' << format_double(r.c_r) << ','
        << format_double(r.b_raw);
    if (record.diagnostics) {
      const auto& d = r.diag;
      for (double v : {d.train_loss, d.grad_norm_sq, d.grad_variance, d.tau, d.descent_bound, d.gen_error_bound,
                       d.gen_gap}) {
        out << ',' << format_double(v);
      }
    }
    out << '\n';
  }
}

void write_csv(const MetricsRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  write_csv(record, out);
  out.flush();
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

MetricsRecord read_csv(std::istream& in) {
  MetricsRecord rec;
  std::string line;
  bool have_header = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("metrics csv: metadata line without '='");
      rec.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      const auto cols = split(line, ',');
      if (cols == column_names(false)) {
        rec.diagnostics = false;
      } else if (cols == column_names(true)) {
        rec.diagnostics = true;
      } else {
        throw DataError("metrics csv: unrecognized header");
      }
      width = cols.size();
      have_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != width) throw DataError("metrics csv: row has " + std::to_string(f.size()) + " fields");
    if (parse_uint(f[0]) != static_cast<std::uint64_t>(kSchemaVersion)) {
      throw DataError("metrics csv: unsupported schema_version " + f[0]);
    }
    MetricsRow r;
    r.round = static_cast<std::size_t>(parse_uint(f[1]));
    r.validation_loss = parse_double(f[2]);
    r.cumulative_unit_energy = parse_double(f[3]);
    r.cumulative_raw_samples = parse_uint(f[4]);
    r.joules_sensing = parse_double(f[5]);
    r.joules_compute = parse_double(f[6]);
    r.joules_comm = parse_double(f[7]);
    r.theta_bar = parse_double(f[8]);
    r.c_r = parse_double(f[9]);
    r.b_raw = parse_double(f[10]);
    if (rec.diagnostics) {
      r.diag.train_loss = parse_double(f[11]);
      r.diag.grad_norm_sq = parse_double(f[12]);
      r.diag.grad_variance = parse_double(f[13]);
      r.diag.tau = parse_double(f[14]);
      r.diag.descent_bound = parse_double(f[15]);
      r.diag.gen_error_bound = parse_double(f[16]);
      r.diag.gen_gap = parse_double(f[17]);
    }
    rec.rows.push_back(r);
  }
  if (!have_header) throw DataError("metrics csv: missing header row");
  return rec;
}

MetricsRecord read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("metrics csv: cannot open " + path.string());
  return read_csv(in);
}

}  // namespace airfeel::metrics
