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

#include "hrnet/train.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "hrnet/accountant.h"
#include "hrnet/audit.h"
#include "hrnet/geo.h"
#include "hrnet/model.h"
#include "hrnet/preprocess.h"
#include "hrnet/rng.h"

namespace hrnet::train {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

model::ModelConfig Small(model::Arm arm, const Dataset& d) {
  model::ModelConfig c = model::ConfigForArm(arm, d.grid, d.n_time);
  c.n_dim = 8;
  c.n_hidden = 16;
  c.n_key = 8;
  c.n_time_dim = 4;
  c.key_hidden = 8;
  return c;
}

Dataset RandomData(int w, int n, uint64_t seed) {
  return *preprocess::GenRandomDataset(w, n, seed);
}

TEST(ScheduleTest, SamplingRateAndSteps) {
  TrainConfig c;
  c.expected_batch = 64;
  c.max_epochs = 2;
  EXPECT_DOUBLE_EQ(SamplingRate(c, 6400), 0.01);
  EXPECT_EQ(MaxSteps(c, 6400), 200);
  EXPECT_EQ(SamplingRate(c, 10), 1.0);
  EXPECT_EQ(MaxSteps(c, 10), 2);
  c.max_epochs = 0.5;
  EXPECT_EQ(MaxSteps(c, 6400), 50);
}

TEST(PlanNoiseTest, RejectsBadArguments) {
  EXPECT_FALSE(PlanNoise(0.0, 1e-5, 0.01, 100).ok());
  EXPECT_FALSE(PlanNoise(1.0, 1e-5, 0.0, 100).ok());
  EXPECT_FALSE(PlanNoise(1.0, 1e-5, 1.5, 100).ok());
  EXPECT_FALSE(PlanNoise(1.0, 1e-5, 0.01, 0).ok());
  EXPECT_FALSE(PlanNoise(1.0, 0.0, 0.01, 10).ok());
}

TEST(PlanNoiseTest, InfeasibleBudgetIsAnError) {
  const auto s = PlanNoise(1e-4, 1e-5, 1.0, 100000);
  EXPECT_EQ(s.status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(PlanNoiseTest, HugeEpsilonGivesGridMinimum) {
  EXPECT_DOUBLE_EQ(*PlanNoise(1e6, 1e-5, 0.01, 100), 0.1);
}

TEST(PlanNoiseTest, DoublingStepsNeverLowersSigma) {
  for (const double q : {0.001, 0.01, 0.1}) {
    double prev = 0.0;
    for (int64_t t = 10; t <= 20480; t *= 2) {
      const double sigma = *PlanNoise(2.0, 1e-5, q, t);
      EXPECT_GE(sigma, prev) << "q=" << q << " T=" << t;
      prev = sigma;
    }
  }
}

TEST(PlanNoiseTest, WithinFivePercentOfBisection) {
  const double eps = 2.0, delta = 1e-5, q = 0.01;
  const int64_t steps = 2000;
  const double sigma = *PlanNoise(eps, delta, q, steps);
  EXPECT_LE(*dp::AccountantEpsilon(q, sigma, steps, delta), eps);
  double lo = 0.1, hi = 100.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (*dp::AccountantEpsilon(q, mid, steps, delta) <= eps ? hi : lo) = mid;
  }
  EXPECT_GE(sigma, lo);
  EXPECT_LE(sigma, 1.05 * hi);
}

TEST(DpsgdTest, RejectsBadConfigurations) {
  const Dataset d = RandomData(8, 20, 1);
  model::Model m = *model::Model::Create(Small(model::Arm::kFull, d), 1);
  TrainConfig c;
  c.epsilon = 0.0;
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(d), c).ok());
  c.epsilon = -1.0;
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(d), c).ok());
  c.epsilon = 1.0;
  c.noise_multiplier = 0.0;
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(d), c).ok());
  c.noise_multiplier = 1.0;
  c.clip_norm = kInf;
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(d), c).ok());

  Dataset empty = d;
  empty.trajectories.clear();
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(empty), TrainConfig{}).ok());
  const Dataset other = RandomData(4, 20, 1);
  EXPECT_FALSE(DpsgdTrain(m, DatasetView(other), TrainConfig{}).ok());
}

TEST(DpsgdTest, NoiselessFullBatchLossDecreases) {
  const Dataset d = RandomData(8, 100, 2);
  model::Model m = *model::Model::Create(Small(model::Arm::kFull, d), 2);
  TrainConfig c;
  c.non_private = true;
  c.clip_norm = kInf;
  c.expected_batch = 1000;
  c.max_epochs = 11;
  c.optimizer = ad::OptimizerKind::kSgd;
  c.learning_rate = 0.005;
  const TrainResult r = *DpsgdTrain(m, DatasetView(d), c);
  ASSERT_EQ(r.log.size(), 11u);
  for (int i = 0; i < 11; ++i) EXPECT_EQ(r.log[i].batch_size, 100);
  for (int i = 1; i < 11; ++i) EXPECT_LT(r.log[i].loss, r.log[i - 1].loss) << "step " << i;
  EXPECT_EQ(r.report.epsilon_sgd, kInf);
  EXPECT_EQ(r.report.sigma, 0.0);
}

TEST(DpsgdTest, ReportMatchesIndependentAccountant) {
  const Dataset d = RandomData(8, 200, 3);
  model::Model m = *model::Model::Create(Small(model::Arm::kDeconv, d), 3);
  TrainConfig c;
  c.epsilon = 3.0;
  c.expected_batch = 20;
  c.max_epochs = 1;
  const TrainResult r = *DpsgdTrain(m, DatasetView(d), c);
  EXPECT_FALSE(r.stopped_by_budget);
  EXPECT_EQ(r.report.steps, 10);
  EXPECT_DOUBLE_EQ(r.report.sampling_rate, 0.1);
  EXPECT_EQ(r.report.epsilon_sgd,
            *dp::AccountantEpsilon(0.1, r.report.sigma, 10, c.delta));
  EXPECT_LE(r.report.epsilon_sgd, 3.0);
  EXPECT_EQ(r.report.sigma, *PlanNoise(3.0, c.delta, 0.1, 10));
  EXPECT_EQ(r.log.back().epsilon, r.report.epsilon_sgd);
}

TEST(DpsgdTest, StopsBeforeOverspending) {
  const Dataset d = RandomData(8, 100, 4);
  model::Model m = *model::Model::Create(Small(model::Arm::kBaseline, d), 4);
  TrainConfig c;
  c.epsilon = 1.0;
  c.noise_multiplier = 2.0;
  c.expected_batch = 10;
  c.max_epochs = 100;
  const TrainResult r = *DpsgdTrain(m, DatasetView(d), c);
  EXPECT_TRUE(r.stopped_by_budget);
  ASSERT_GT(r.report.steps, 0);
  EXPECT_LE(r.report.epsilon_sgd, 1.0);
  EXPECT_GT(*dp::AccountantEpsilon(0.1, 2.0, r.report.steps + 1, c.delta), 1.0);
  for (size_t i = 1; i < r.log.size(); ++i) EXPECT_GT(r.log[i].epsilon, r.log[i - 1].epsilon);
}

TEST(DpsgdTest, BitReproducibleAndThreadIndependent) {
  const Dataset d = RandomData(8, 120, 5);
  const model::Model init = *model::Model::Create(Small(model::Arm::kFull, d), 5);
  TrainConfig c;
  c.epsilon = 2.0;
  c.expected_batch = 30;
  c.max_epochs = 1;
  c.seed = 77;
  model::Model a = init, b = init, t = init;
  ASSERT_TRUE(DpsgdTrain(a, DatasetView(d), c).ok());
  ASSERT_TRUE(DpsgdTrain(b, DatasetView(d), c).ok());
  c.threads = 3;
  ASSERT_TRUE(DpsgdTrain(t, DatasetView(d), c).ok());
  EXPECT_EQ(a.params(), b.params());
  EXPECT_EQ(a.params(), t.params());
  EXPECT_NE(a.params(), init.params());
  c.seed = 78;
  model::Model other = init;
  ASSERT_TRUE(DpsgdTrain(other, DatasetView(d), c).ok());
  EXPECT_NE(other.params(), a.params());
}

TEST(DpsgdTest, EveryArmTrains) {
  const Dataset d = RandomData(8, 40, 6);
  for (const model::Arm arm : model::AllArms()) {
    model::Model m = *model::Model::Create(Small(arm, d), 6);
    TrainConfig c;
    c.epsilon = 5.0;
    c.expected_batch = 20;
    c.max_epochs = 1;
    const auto r = DpsgdTrain(m, DatasetView(d), c);
    ASSERT_TRUE(r.ok()) << model::ArmName(arm) << ": " << r.status();
    EXPECT_EQ(r->report.steps, 2);
  }
}

TEST(DpsgdTest, CallbackSeesEveryStepAndCanAbort) {
  const Dataset d = RandomData(8, 50, 7);
  model::Model m = *model::Model::Create(Small(model::Arm::kDeconv, d), 7);
  TrainConfig c;
  c.epsilon = 4.0;
  c.expected_batch = 10;
  c.max_epochs = 1;
  std::vector<std::string> lines;
  ASSERT_TRUE(DpsgdTrain(m, DatasetView(d), c,
                         [&](const StepLog& log, const model::Model&) {
                           lines.push_back(FormatStepLog(log));
                           return absl::OkStatus();
                         })
                  .ok());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("step=1 batch=", 0), 0u) << lines[0];
  for (const char* key : {"grad_norm=", "loss=", "epsilon="}) {
    EXPECT_NE(lines[0].find(key), std::string::npos);
  }
  int calls = 0;
  const auto aborted = DpsgdTrain(m, DatasetView(d), c, [&](const StepLog&, const model::Model&) {
    return ++calls == 2 ? absl::CancelledError("stop") : absl::OkStatus();
  });
  EXPECT_EQ(aborted.status().code(), absl::StatusCode::kCancelled);
  EXPECT_EQ(calls, 2);
}

TEST(DpsgdTest, ReadsAreAudited) {
  const Dataset d = RandomData(8, 50, 8);
  model::Model m = *model::Model::Create(Small(model::Arm::kBaseline, d), 8);
  AccessAudit audit;
  audit.BeginPhase("train");
  TrainConfig c;
  c.epsilon = 4.0;
  c.expected_batch = 50;
  c.max_epochs = 2;
  const TrainResult r = *DpsgdTrain(m, DatasetView(d, &audit), c);
  int64_t sampled = 0;
  for (const StepLog& log : r.log) sampled += log.batch_size;
  EXPECT_EQ(audit.Reads("train"), sampled);
  EXPECT_EQ(audit.Reads("pretrain"), 0);
}

}  // namespace
}  // namespace hrnet::train
