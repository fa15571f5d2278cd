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

#include <string>

#include "airfeel/config.hpp"
#include "airfeel/error.hpp"

namespace airfeel {
namespace {

std::string field_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(Defaults, MatchTheReferenceExperiment) {
  const auto c = default_config();
  EXPECT_EQ(c.devices, 5u);
  EXPECT_EQ(c.rounds, 2000u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.01);
  EXPECT_EQ(c.repeats, 5u);
  EXPECT_EQ(c.eval_period, 10u);
  EXPECT_EQ(c.smoothing_window, 100u);
  EXPECT_EQ(c.sensing.b_min, 4u);
  EXPECT_EQ(c.sensing.b_max, 32u);
  EXPECT_DOUBLE_EQ(c.sensing.alpha, 0.1);
  ASSERT_EQ(c.schemes.size(), 4u);
  EXPECT_EQ(c.schemes[0].name(), "proposed/reweight");
  EXPECT_EQ(c.schemes[3].name(), "proposed/baseline");
  c.validate();
}

TEST(Parse, EmptyObjectYieldsDefaults) {
  EXPECT_EQ(dump_config(parse_config("{}")), dump_config(default_config()));
}

TEST(Parse, DumpRoundTrips) {
  auto c = default_config();
  c.seed = 7;
  c.sensing.alpha = 0.25;
  c.power.q = 16.0;
  c.system.E_max = 3.5;
  c.schemes = {SchemeSpec::parse("reversed"), SchemeSpec::parse("vanilla/baseline")};
  const auto text = dump_config(c);
  const auto back = parse_config(text);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(back.schemes, c.schemes);
  EXPECT_EQ(config_fingerprint(back), config_fingerprint(c));
}

TEST(Parse, NullBudgetsMeanUnlimited) {
  const auto c = parse_config(R"({"system": {"latency_budget_seconds": null, "energy_budget_joules": 2.0}})");
  EXPECT_GE(c.system.T_max, 1e300);
  EXPECT_DOUBLE_EQ(c.system.E_max, 2.0);
}

TEST(Parse, ErrorsNameTheDottedField) {
  EXPECT_EQ(field_of(R"({"sensing": {"alpah": 0.1}})"), "sensing.alpah");
  EXPECT_EQ(field_of(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(field_of(R"({"rounds": "many"})"), "rounds");
  EXPECT_EQ(field_of(R"({"devices": -1})"), "devices");
  EXPECT_EQ(field_of(R"({"sensing": {"alpha": 1.5}})"), "sensing.alpha");
  EXPECT_EQ(field_of(R"({"sensing": {"b_min": 0}})"), "sensing.b_min");
  EXPECT_EQ(field_of(R"({"sensing": {"b_min": 40}})"), "sensing.b_max");
  EXPECT_EQ(field_of(R"({"power": {"q": 0}})"), "power.q");
  EXPECT_EQ(field_of(R"({"diagnostics": 1})"), "diagnostics");
  EXPECT_EQ(field_of(R"({"model": {"activation": "gelu"}})"), "model.activation");
  EXPECT_EQ(field_of(R"({"schemes": ["loud/reweight"]})"), "schemes");
  EXPECT_EQ(field_of(R"({"schema_version": 2})"), "schema_version");
  EXPECT_EQ(field_of("{not json"), "<root>");
}

TEST(Parse, ErrorMessageIncludesFieldName) {
  try {
    parse_config(R"({"comm": {"slot_seconds": -1}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("comm.slot_seconds"), std::string::npos);
  }
}

TEST(Fingerprint, IgnoresSchemesButTracksEverythingElse) {
  auto a = default_config();
  auto b = a;
  b.schemes = {SchemeSpec::parse("optimal")};
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.learning_rate = 0.02;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
  EXPECT_EQ(config_fingerprint(a).size(), 16u);
}

TEST(SchemeSpec, ParsesNamesAndRejectsUnknown) {
  EXPECT_EQ(SchemeSpec::parse("vanilla").sensing, SensingMode::reweight);
  EXPECT_EQ(SchemeSpec::parse("reversed/baseline").power, aircomp::PowerScheme::reversed);
  EXPECT_EQ(SchemeSpec::parse("reversed/baseline").name(), "reversed/baseline");
  EXPECT_THROW(SchemeSpec::parse("proposed/greedy"), std::invalid_argument);
}

}  // namespace
}  // namespace airfeel
