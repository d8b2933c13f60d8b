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

#ifndef HRNET_PIPELINE_H_
#define HRNET_PIPELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "hrnet/dp.h"
#include "hrnet/evaluate.h"
#include "hrnet/generate.h"
#include "hrnet/key_value.h"
#include "hrnet/model.h"
#include "hrnet/pretrain.h"
#include "hrnet/train.h"
#include "hrnet/trajectory.h"

namespace hrnet::pipeline {

// Layer widths shared by every arm.
struct ModelSizes {
  int n_dim = 64;
  int n_hidden = 128;
  int n_key = 64;
  int key_hidden = 64;
  int n_time_dim = 16;
};

struct PipelineConfig {
  std::string data_path;  // read by RunPipelineFromFile
  model::Arm arm = model::Arm::kFull;
  double epsilon_total = 2.0;
  double delta = 1e-5;
  uint64_t seed = 0;
  ModelSizes sizes;
  double snr_constant = dp::kDefaultSnrConstant;
  int pretrain_resolution = dp::kDefaultPretrainResolution;
  // Seeds and epsilons inside the phase configs are overwritten from the
  // fields above.
  pretrain::PretrainConfig pretrain;
  train::TrainConfig train;
  // count <= 0 generates as many trajectories as the real dataset holds.
  generate::GenConfig generate;
  evaluate::EvalConfig evaluate;
  bool run_evaluation = true;
  // Artifacts go here when non-empty.
  std::string out_dir;
  int checkpoint_every = 0;
  int threads = 1;
};

// Flat snapshot keyed by the command-line flag names, so a run can be
// replayed with `hrnet run --config <out>/config.txt`.
KeyValueBlock ConfigSnapshot(const PipelineConfig& config);

struct PipelineResult {
  dp::Allocation allocation;       // planned split
  dp::PrivacyReport privacy;       // spent
  std::optional<pretrain::PretrainResult> pretrain;
  train::TrainResult train;
  std::optional<model::Model> model;
  Dataset synthetic;
  std::optional<evaluate::MetricReport> metrics;
  std::map<std::string, int64_t> reads;  // raw-data reads per phase
};

// allocate -> transition matrix (epsilon_2) -> pretrain -> DP-SGD
// (epsilon_1, delta) -> generate -> evaluate. Arms without pretraining
// spend the whole budget on DP-SGD.
absl::StatusOr<PipelineResult> RunPipeline(const Dataset& data,
                                           const PipelineConfig& config);

// Loads config.data_path and runs the pipeline on it.
absl::StatusOr<PipelineResult> RunPipelineFromFile(const PipelineConfig& config);

}  // namespace hrnet::pipeline

#endif  // HRNET_PIPELINE_H_
