// Copyright 2026 The HRNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hrnet/accountant.h"
#include "hrnet/autodiff/ops.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/evaluate.h"
#include "hrnet/generate.h"
#include "hrnet/model.h"
#include "hrnet/preprocess.h"
#include "hrnet/rng.h"
#include "hrnet/train.h"

namespace hrnet {
namespace {

model::ModelConfig Config(model::ModelKind kind, int w) {
  model::ModelConfig c;
  c.kind = kind;
  c.grid = *geo::GridSpec::Create(preprocess::SyntheticBoundingBox(), w);
  c.n_time = 24;
  c.n_dim = 16;
  c.n_hidden = 32;
  c.n_key = 16;
  c.key_hidden = 32;
  c.n_time_dim = 8;
  return c;
}

void BM_QuadDeconv(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int channels = 16;
  Rng rng(1);
  ad::Tensor m({side, side, channels}), k({channels, 2, 2, channels});
  for (double& v : m.values()) v = rng.Uniform();
  for (double& v : k.values()) v = rng.Uniform();
  for (auto _ : state) benchmark::DoNotOptimize(ad::QuadDeconv(m, k));
  state.SetItemsProcessed(state.iterations() * 4 * side * side);
}
BENCHMARK(BM_QuadDeconv)->Arg(4)->Arg(16)->Arg(32);

// Forward and backward of one per-example loss, the inner loop of DP-SGD.
void BM_PerExampleGradient(benchmark::State& state) {
  const auto kind = state.range(0) ? model::ModelKind::kHrnet : model::ModelKind::kBaseline;
  const int w = static_cast<int>(state.range(1));
  const model::Model m = *model::Model::Create(Config(kind, w), 3);
  const Trajectory t{{0, 0}, {w, 1}, {2 * w, 2}, {2 * w + 1, 5}};
  ad::Tape tape(&m.params());
  model::Graph graph(m, tape);
  const size_t mark = tape.Mark();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tape.Backward(graph.Loss(t)));
    tape.Truncate(mark);
  }
}
BENCHMARK(BM_PerExampleGradient)
    ->Args({1, 16})
    ->Args({1, 64})
    ->Args({0, 16})
    ->Args({0, 64})
    ->Unit(benchmark::kMicrosecond);

void BM_AccountantEpsilon(benchmark::State& state) {
  const int64_t steps = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(dp::AccountantEpsilon(0.0256, 1.3, steps, 1e-5));
}
BENCHMARK(BM_AccountantEpsilon)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_PlanNoise(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(train::PlanNoise(1.9, 1e-5, 0.0512, 196));
}
BENCHMARK(BM_PlanNoise)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const model::Model m = *model::Model::Create(Config(model::ModelKind::kHrnet, 16), 3);
  generate::GenConfig g;
  g.count = 100;
  for (auto _ : state) benchmark::DoNotOptimize(generate::GenerateDataset(m, g));
  state.SetItemsProcessed(state.iterations() * g.count);
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_FullReport(benchmark::State& state) {
  const Dataset real = *preprocess::GenStraightDataset(16, state.range(0), 1);
  const Dataset gen = *preprocess::GenStraightDataset(16, state.range(0), 2);
  const evaluate::EvalConfig config;
  for (auto _ : state) {
    absl::StatusOr<evaluate::MetricReport> report = evaluate::FullReport(real, gen, config);
    if (!report.ok()) {
      state.SkipWithError(std::string(report.status().message()).c_str());
      return;
    }
    benchmark::DoNotOptimize(*report);
  }
}
BENCHMARK(BM_FullReport)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hrnet

BENCHMARK_MAIN();
