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

// Slow end-to-end checks on the Straight dataset (about two minutes).

#include <cstdint>

#include "gtest/gtest.h"
#include "hrnet/model.h"
#include "hrnet/pipeline.h"
#include "hrnet/preprocess.h"

namespace hrnet {
namespace {

constexpr int kW = 16;

pipeline::PipelineConfig StraightConfig(double epsilon_total, bool non_private) {
  pipeline::PipelineConfig c;
  c.arm = model::Arm::kFull;
  c.epsilon_total = epsilon_total;
  c.delta = 1e-5;
  c.seed = 1;
  c.sizes = {.n_dim = 16, .n_hidden = 32, .n_key = 16, .key_hidden = 32, .n_time_dim = 8};
  c.pretrain.steps = 1000;
  c.train.non_private = non_private;
  c.generate.count = 10000;
  c.run_evaluation = false;
  return c;
}

// Mean probability of the true next cell over every transition of `held`.
double HeldOutNextCellProbability(const model::Model& m, const Dataset& held) {
  double total = 0.0;
  int64_t n = 0;
  for (const Trajectory& t : held.trajectories) {
    for (size_t i = 1; i < t.size(); ++i) {
      const Trajectory prefix(t.begin(), t.begin() + i);
      total += model::NextDistributionAfter(m, prefix)->location[t[i].cell];
      ++n;
    }
  }
  return total / n;
}

double ExactStraightFraction(const Dataset& d) {
  int64_t hits = 0;
  for (const Trajectory& t : d.trajectories) {
    hits += t.size() == 3 && t[1].cell == t[0].cell + kW && t[2].cell == t[1].cell + kW;
  }
  return static_cast<double>(hits) / d.size();
}

TEST(StraightConvergenceTest, PrivateModelPredictsTheNextRow) {
  const Dataset data = *preprocess::GenStraightDataset(kW, 10000, 7);
  const Dataset held = *preprocess::GenStraightDataset(kW, 200, 1001);
  // Total 1.92 leaves about 1.9 for DP-SGD after the transition matrix.
  const auto r = pipeline::RunPipeline(data, StraightConfig(1.92, false));
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_NEAR(r->allocation.budget.epsilon_sgd, 1.9, 0.01);
  EXPECT_LE(r->privacy.epsilon_sgd, r->allocation.budget.epsilon_sgd);
  const double p = HeldOutNextCellProbability(*r->model, held);
  RecordProperty("next_cell_probability", std::to_string(p));
  EXPECT_GE(p, 0.5);
}

TEST(StraightConvergenceTest, ConvergedModelGeneratesStraightColumns) {
  const Dataset data = *preprocess::GenStraightDataset(kW, 10000, 7);
  pipeline::PipelineConfig c = StraightConfig(2.0, true);
  // Without noise, smaller batches buy more updates per epoch.
  c.train.expected_batch = 128;
  const auto r = pipeline::RunPipeline(data, c);
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_EQ(r->synthetic.size(), 10000u);
  const double fraction = ExactStraightFraction(r->synthetic);
  RecordProperty("straight_fraction", std::to_string(fraction));
  EXPECT_GE(fraction, 0.95);
  EXPECT_TRUE(ValidateDataset(r->synthetic).ok());
}

}  // namespace
}  // namespace hrnet
