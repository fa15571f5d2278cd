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

#include "airfeel/selftest.hpp"

namespace airfeel::selftest {
namespace {

TEST(Selftest, PassesOnTheRealImplementation) {
  const auto checks = run({});
  ASSERT_FALSE(checks.empty());
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
  EXPECT_TRUE(all_pass(checks));
}

TEST(Selftest, DetectsMiscalibratedNoise) {
  Options opt;
  opt.noise_scale = 1.1;
  EXPECT_FALSE(all_pass(run(opt)));
}

}  // namespace
}  // namespace airfeel::selftest
