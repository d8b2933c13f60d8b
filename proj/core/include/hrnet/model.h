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

#ifndef HRNET_MODEL_H_
#define HRNET_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "hrnet/autodiff/checkpoint.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/autodiff/tensor.h"
#include "hrnet/geo.h"
#include "hrnet/trajectory.h"

namespace hrnet::model {

enum class ModelKind { kBaseline, kHrnet };

absl::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name);

// The six ablation configurations.
enum class Arm {
  kBaseline,
  kBaselinePretrain,
  kDeconv,
  kDeconvPretrain,
  kDeconvMultitask,
  kFull,
};

struct ArmFlags {
  bool deconv = false;
  bool multitask = false;
  bool pretrain = false;
};

ArmFlags FlagsOf(Arm arm);
absl::string_view ArmName(Arm arm);  // e.g. "deconv+multitask"
absl::StatusOr<Arm> ParseArm(absl::string_view name);
std::vector<Arm> AllArms();

struct ModelConfig {
  ModelKind kind = ModelKind::kHrnet;
  geo::GridSpec grid;  // depth d >= 1
  int n_time = 24;
  int n_dim = 64;
  int n_hidden = 128;
  int n_key = 64;
  int n_time_dim = 16;
  int key_hidden = 64;  // width of the f_query / f_key hidden layer
  bool multitask = true;  // HRNet only: train on every resolution 1..d

  int depth() const { return grid.depth(); }
  int num_cells() const { return static_cast<int>(grid.num_cells()); }
  // Index of the end-of-sequence entry in finest-resolution logits.
  int eos_index() const { return num_cells(); }
  // GRU input: time embedding, location encoding, special-token channel.
  int input_size() const { return n_time_dim + n_dim + 1; }
};

// Config for an arm at the given grid and time discretization.
ModelConfig ConfigForArm(Arm arm, const geo::GridSpec& grid, int n_time);

// Parameter tensors of either generator plus the config that shapes them.
class Model {
 public:
  static absl::StatusOr<Model> Create(const ModelConfig& config, uint64_t seed);
  static absl::StatusOr<Model> FromCheckpoint(const ad::Checkpoint& checkpoint);

  ad::Checkpoint ToCheckpoint() const;

  const ModelConfig& config() const { return config_; }
  const ad::ParameterSet& params() const { return params_; }
  ad::ParameterSet& mutable_params() { return params_; }
  size_t NumParameters() const { return params_.TotalSize(); }

  // Index of a named parameter; the name must exist.
  int Index(absl::string_view name) const;

 private:
  Model(ModelConfig config, ad::ParameterSet params)
      : config_(std::move(config)), params_(std::move(params)) {}

  ModelConfig config_;
  ad::ParameterSet params_;
};

// Builds model computations on a tape. The constructor records the
// example-independent prefix (parameter handles, the deconvolution chain and
// the key matrices of the requested resolutions); callers typically Mark()
// the tape right after construction.
class Graph {
 public:
  // `key_resolutions` lists the levels whose keys go into the prefix; by
  // default the training levels (1..d with multitask, otherwise d alone).
  // Keys of other levels are built on first use.
  Graph(const Model& model, ad::Tape& tape,
        std::optional<std::vector<int>> key_resolutions = std::nullopt);

  const ModelConfig& config() const { return model_.config(); }
  ad::Tape& tape() { return tape_; }

  // (4^r, n_dim) encodings of every resolution-r cell, r <= d (HRNet only).
  ad::Var Encodings(int resolution) const;
  // (4^r, n_key) key vectors at resolution r.
  ad::Var Keys(int resolution);

  ad::Var InitialState();
  // GRU input for a visit, or for the start token when `visit` is null.
  ad::Var Encode(const Visit* visit);
  ad::Var Step(ad::Var h, ad::Var input);
  ad::Var Query(ad::Var h);
  ad::Var LocationLogitsFromQuery(ad::Var query, int resolution);
  // Location logits at resolution r. At r = d an end-of-sequence entry is
  // appended (index eos_index()). The baseline only supports r = d.
  ad::Var LocationLogits(ad::Var h, int resolution);
  ad::Var TimeLogits(ad::Var h);

  // Sum over positions of the location cross-entropies (every training
  // resolution) and the time cross-entropy; the final position predicts
  // end-of-sequence at the finest resolution only.
  ad::Var Loss(const Trajectory& trajectory);

  // Hidden state after consuming the start token and `prefix`.
  ad::Var RunPrefix(const Trajectory& prefix);

  // Parameter handle by name.
  ad::Var P(absl::string_view name) const;

 private:
  const Model& model_;
  ad::Tape& tape_;
  std::vector<int> train_resolutions_;
  std::vector<ad::Var> params_;
  std::vector<ad::Var> encodings_;  // index r
  std::vector<ad::Var> keys_;       // index r
  ad::Var zero_state_;
  ad::Var zero_location_;
  ad::Var channel_off_;
  ad::Var channel_on_;
};

// Forward-only helpers.

// Row (row, col) of the resolution-r encoding matrix.
absl::StatusOr<std::vector<double>> HiEncode(const Model& model, int resolution,
                                             int64_t cell);
absl::StatusOr<std::vector<double>> EncodeVisit(const Model& model,
                                                const Visit& visit);
// Softmax over resolution-r cells (plus EOS at r = d) for hidden state h.
absl::StatusOr<std::vector<double>> ScoreResolution(const Model& model,
                                                    std::span<const double> h,
                                                    int resolution);

struct NextDistribution {
  std::vector<double> location;  // num_cells + 1 entries, EOS last
  std::vector<double> time;      // n_time entries
};
absl::StatusOr<NextDistribution> NextDistributionAfter(const Model& model,
                                                       const Trajectory& prefix);

absl::StatusOr<double> MultiresLoss(const Model& model,
                                    const Trajectory& trajectory);

}  // namespace hrnet::model

#endif  // HRNET_MODEL_H_
