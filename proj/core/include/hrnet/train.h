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

#ifndef HRNET_TRAIN_H_
#define HRNET_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hrnet/audit.h"
#include "hrnet/autodiff/optimizer.h"
#include "hrnet/dp.h"
#include "hrnet/model.h"

namespace hrnet::train {

struct TrainConfig {
  double clip_norm = 1.0;
  // Noise multiplier. Negative means "plan it": the smallest grid value that
  // keeps max_steps steps within epsilon.
  double noise_multiplier = -1.0;
  double expected_batch = 512.0;
  double max_epochs = 10.0;
  // The update rule only sees the privatized mean gradient, so the choice
  // does not affect the accounting.
  ad::OptimizerKind optimizer = ad::OptimizerKind::kAdam;
  double learning_rate = 0.02;
  double epsilon = 1.0;  // DP-SGD share of the budget
  double delta = 1e-5;
  uint64_t seed = 0;
  // Explicit opt-in to noiseless training (sigma = 0, epsilon ignored and
  // reported as infinite).
  bool non_private = false;
  int threads = 1;
};

// Poisson sampling rate expected_batch / n, capped at 1.
double SamplingRate(const TrainConfig& config, int64_t dataset_size);
int64_t MaxSteps(const TrainConfig& config, int64_t dataset_size);

// Smallest sigma on a geometric grid (ratio 1.01 from 0.1 to ~2000) with
// AccountantEpsilon(q, sigma, max_steps, delta) <= epsilon.
absl::StatusOr<double> PlanNoise(double epsilon, double delta, double q,
                                 int64_t max_steps);

struct StepLog {
  int64_t step = 0;
  int batch_size = 0;
  double mean_grad_norm = 0.0;  // before clipping and noise
  double loss = 0.0;            // mean over the sampled batch
  double epsilon = 0.0;         // cumulative
};
std::string FormatStepLog(const StepLog& log);

struct TrainResult {
  dp::PrivacyReport report;  // epsilon_pretrain left at 0
  std::vector<StepLog> log;
  bool stopped_by_budget = false;
};

// Called after every committed step; a non-OK status aborts training.
using StepCallback =
    std::function<absl::Status(const StepLog&, const model::Model&)>;

// DP-SGD over trajectories: Poisson sampling, per-trajectory gradients,
// clipping, Gaussian noise, then an SGD or Adam update. Stops at max_epochs or before the step
// that would push the accountant past config.epsilon.
absl::StatusOr<TrainResult> DpsgdTrain(model::Model& model, const DatasetView& data,
                                       const TrainConfig& config,
                                       const StepCallback& on_step = nullptr);

}  // namespace hrnet::train

#endif  // HRNET_TRAIN_H_
