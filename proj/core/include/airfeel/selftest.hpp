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

#include <cstdint>
#include <string>
#include <vector>

/// Fast invariant suite behind the `selftest` subcommand.
namespace airfeel::selftest {

struct Options {
  std::uint64_t seed = 42;
  /// Multiplies the aggregation noise standard deviation. Anything other
  /// than 1 is a deliberate fault that the calibration check must catch.
  double noise_scale = 1.0;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Check> run(const Options& options = {});

bool all_pass(const std::vector<Check>& checks);

}  // namespace airfeel::selftest
