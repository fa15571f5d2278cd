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

#include <benchmark/benchmark.h>

#include <vector>

#include "airfeel/aircomp.hpp"
#include "airfeel/config.hpp"
#include "airfeel/dataset.hpp"
#include "airfeel/fedloop.hpp"
#include "airfeel/nn.hpp"
#include "airfeel/sensing.hpp"

namespace {

using namespace airfeel;

struct Fixture {
  ExperimentConfig cfg = default_config();
  fed::Environment env = fed::make_environment(cfg);
  fed::RunContext ctx = fed::make_context(cfg, env, cfg.schemes.front(), 0);
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_PerSampleGradients(benchmark::State& state) {
  auto& f = fixture();
  Rng init(1, StreamPurpose::init);
  const auto model = nn::Model::initialize(f.cfg.arch, init);
  auto stream = data::SampleStream::for_round(f.ctx.sources.front(), 1, 0, 0, 1);
  const auto batch = stream.draw(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nn::per_sample_gradients(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PerSampleGradients)->Arg(1)->Arg(32);

void BM_AdaptiveCollect(benchmark::State& state) {
  auto& f = fixture();
  Rng init(1, StreamPurpose::init);
  const auto model = nn::Model::initialize(f.cfg.arch, init);
  const sensing::ControllerState ctl{static_cast<double>(state.range(0)), 0.1, 4, 32};
  std::uint64_t round = 1;
  for (auto _ : state) {
    auto stream = data::SampleStream::for_round(f.ctx.sources.front(), 1, 0, 0, round);
    Rng rng(1, StreamPurpose::resample, 0, 0, round++);
    benchmark::DoNotOptimize(sensing::adaptive_collect(model, stream, ctl, rng));
  }
}
BENCHMARK(BM_AdaptiveCollect)->Arg(0)->Arg(1000);

void BM_Aggregate(benchmark::State& state) {
  const std::vector<std::vector<double>> grads(5, std::vector<double>(static_cast<std::size_t>(state.range(0)), 0.5));
  Rng rng(1, StreamPurpose::noise);
  for (auto _ : state) benchmark::DoNotOptimize(aircomp::aggregate(grads, 2.0, 1.0, rng));
}
BENCHMARK(BM_Aggregate)->Arg(5573)->Arg(100000);

void BM_RunRound(benchmark::State& state) {
  auto& f = fixture();
  auto cfg = f.cfg;
  cfg.rounds = 1000000;
  const auto ctx = fed::make_context(cfg, f.env, cfg.schemes.front(), 0);
  auto run_state = fed::initial_state(ctx);
  for (auto _ : state) benchmark::DoNotOptimize(fed::run_round(run_state, ctx));
}
BENCHMARK(BM_RunRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
