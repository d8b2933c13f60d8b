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

#include "hrnet/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "hrnet/autodiff/ops.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"

namespace hrnet::model {
namespace {

constexpr std::pair<Arm, const char*> kArmNames[] = {
    {Arm::kBaseline, "baseline"},
    {Arm::kBaselinePretrain, "baseline+pretrain"},
    {Arm::kDeconv, "deconv"},
    {Arm::kDeconvPretrain, "deconv+pretrain"},
    {Arm::kDeconvMultitask, "deconv+multitask"},
    {Arm::kFull, "full"},
};

class Initializer {
 public:
  explicit Initializer(uint64_t seed) : rng_(seed) {}

  ad::Tensor Uniform(std::vector<int> shape, int fan_in) {
    ad::Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.values()) v = dist(rng_);
    return t;
  }

  ad::Tensor Normal(std::vector<int> shape, double scale) {
    ad::Tensor t(std::move(shape));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : t.values()) v = scale * dist(rng_);
    return t;
  }

 private:
  Rng rng_;
};

absl::Status ValidateConfig(const ModelConfig& c) {
  if (c.depth() < 1) {
    return absl::InvalidArgumentError("model grid needs depth >= 1 (w >= 2)");
  }
  if (c.n_time < 1 || c.n_dim < 1 || c.n_hidden < 1 || c.n_key < 1 ||
      c.n_time_dim < 1 || c.key_hidden < 1) {
    return absl::InvalidArgumentError("model dimensions must be positive");
  }
  return absl::OkStatus();
}

ad::ParameterSet InitParams(const ModelConfig& c, uint64_t seed) {
  Initializer init(seed);
  ad::ParameterSet p;
  const int w2 = c.num_cells();
  const int h = c.n_hidden;
  if (c.kind == ModelKind::kHrnet) {
    p.Add("theta_root", init.Normal({1, 1, c.n_dim}, 0.1));
    for (int r = 1; r <= c.depth(); ++r) {
      p.Add(absl::StrCat("deconv_", r), init.Uniform({c.n_dim, 2, 2, c.n_dim}, c.n_dim));
    }
  } else {
    p.Add("poi_embedding", init.Uniform({w2, c.n_dim}, 1));
  }
  p.Add("time_embedding", init.Uniform({c.n_time, c.n_time_dim}, 1));
  p.Add("sos_time", init.Uniform({c.n_time_dim}, 1));
  p.Add("gru_w_ih", init.Uniform({3 * h, c.input_size()}, c.input_size()));
  p.Add("gru_w_hh", init.Uniform({3 * h, h}, h));
  p.Add("gru_b_ih", init.Uniform({3 * h}, c.input_size()));
  p.Add("gru_b_hh", init.Uniform({3 * h}, h));
  if (c.kind == ModelKind::kHrnet) {
    p.Add("query_w1", init.Uniform({c.key_hidden, h}, h));
    p.Add("query_b1", init.Uniform({c.key_hidden}, h));
    p.Add("query_w2", init.Uniform({c.n_key, c.key_hidden}, c.key_hidden));
    p.Add("query_b2", init.Uniform({c.n_key}, c.key_hidden));
    p.Add("key_w1", init.Uniform({c.key_hidden, c.n_dim}, c.n_dim));
    p.Add("key_b1", init.Uniform({c.key_hidden}, c.n_dim));
    p.Add("key_w2", init.Uniform({c.n_key, c.key_hidden}, c.key_hidden));
    p.Add("key_b2", init.Uniform({c.n_key}, c.key_hidden));
    p.Add("eos_key", init.Uniform({c.n_key}, c.n_key));
  } else {
    p.Add("poi_w", init.Uniform({w2 + 1, h}, h));
    p.Add("poi_b", init.Uniform({w2 + 1}, h));
  }
  p.Add("time_w", init.Uniform({c.n_time, h}, h));
  p.Add("time_b", init.Uniform({c.n_time}, h));
  return p;
}

}  // namespace

absl::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kBaseline ? "baseline" : "hrnet";
}

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name) {
  if (name == "baseline") return ModelKind::kBaseline;
  if (name == "hrnet") return ModelKind::kHrnet;
  return absl::InvalidArgumentError(absl::StrCat("unknown model kind '", name, "'"));
}

ArmFlags FlagsOf(Arm arm) {
  switch (arm) {
    case Arm::kBaseline: return {false, false, false};
    case Arm::kBaselinePretrain: return {false, false, true};
    case Arm::kDeconv: return {true, false, false};
    case Arm::kDeconvPretrain: return {true, false, true};
    case Arm::kDeconvMultitask: return {true, true, false};
    case Arm::kFull: return {true, true, true};
  }
  return {};
}

absl::string_view ArmName(Arm arm) {
  for (const auto& [a, name] : kArmNames) {
    if (a == arm) return name;
  }
  return "unknown";
}

absl::StatusOr<Arm> ParseArm(absl::string_view name) {
  for (const auto& [a, arm_name] : kArmNames) {
    if (name == arm_name) return a;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown arm '", name,
      "' (expected baseline, baseline+pretrain, deconv, deconv+pretrain, "
      "deconv+multitask or full)"));
}

std::vector<Arm> AllArms() {
  std::vector<Arm> arms;
  for (const auto& entry : kArmNames) arms.push_back(entry.first);
  return arms;
}

ModelConfig ConfigForArm(Arm arm, const geo::GridSpec& grid, int n_time) {
  const ArmFlags flags = FlagsOf(arm);
  ModelConfig c;
  c.kind = flags.deconv ? ModelKind::kHrnet : ModelKind::kBaseline;
  c.grid = grid;
  c.n_time = n_time;
  c.multitask = flags.multitask;
  return c;
}

absl::StatusOr<Model> Model::Create(const ModelConfig& config, uint64_t seed) {
  RETURN_IF_ERROR(ValidateConfig(config));
  ModelConfig c = config;
  if (c.kind == ModelKind::kBaseline) c.multitask = false;
  return Model(c, InitParams(c, seed));
}

int Model::Index(absl::string_view name) const {
  const std::optional<int> i = params_.Find(name);
  return i.has_value() ? *i : -1;
}

ad::Checkpoint Model::ToCheckpoint() const {
  ad::Checkpoint cp;
  cp.kind = std::string(ModelKindName(config_.kind));
  const geo::BoundingBox& b = config_.grid.bbox();
  cp.metadata.SetDouble("min_lat", b.min_lat);
  cp.metadata.SetDouble("min_lon", b.min_lng);
  cp.metadata.SetDouble("max_lat", b.max_lat);
  cp.metadata.SetDouble("max_lon", b.max_lng);
  cp.metadata.SetInt("w", config_.grid.width());
  cp.metadata.SetInt("n_time", config_.n_time);
  cp.metadata.SetInt("n_dim", config_.n_dim);
  cp.metadata.SetInt("n_hidden", config_.n_hidden);
  cp.metadata.SetInt("n_key", config_.n_key);
  cp.metadata.SetInt("n_time_dim", config_.n_time_dim);
  cp.metadata.SetInt("key_hidden", config_.key_hidden);
  cp.metadata.SetInt("multitask", config_.multitask ? 1 : 0);
  cp.params = params_;
  return cp;
}

absl::StatusOr<Model> Model::FromCheckpoint(const ad::Checkpoint& cp) {
  ModelConfig c;
  ASSIGN_OR_RETURN(c.kind, ParseModelKind(cp.kind));
  const KeyValueBlock& m = cp.metadata;
  geo::BoundingBox b;
  ASSIGN_OR_RETURN(b.min_lat, m.GetDouble("min_lat"));
  ASSIGN_OR_RETURN(b.min_lng, m.GetDouble("min_lon"));
  ASSIGN_OR_RETURN(b.max_lat, m.GetDouble("max_lat"));
  ASSIGN_OR_RETURN(b.max_lng, m.GetDouble("max_lon"));
  ASSIGN_OR_RETURN(const int64_t w, m.GetInt("w"));
  ASSIGN_OR_RETURN(c.grid, geo::GridSpec::Create(b, static_cast<int>(w)));
  auto get_int = [&m](absl::string_view key, int& out) -> absl::Status {
    ASSIGN_OR_RETURN(const int64_t v, m.GetInt(key));
    out = static_cast<int>(v);
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(get_int("n_time", c.n_time));
  RETURN_IF_ERROR(get_int("n_dim", c.n_dim));
  RETURN_IF_ERROR(get_int("n_hidden", c.n_hidden));
  RETURN_IF_ERROR(get_int("n_key", c.n_key));
  RETURN_IF_ERROR(get_int("n_time_dim", c.n_time_dim));
  RETURN_IF_ERROR(get_int("key_hidden", c.key_hidden));
  int multitask = 0;
  RETURN_IF_ERROR(get_int("multitask", multitask));
  c.multitask = multitask != 0;
  ASSIGN_OR_RETURN(Model model, Create(c, 0));
  if (model.params_.size() != cp.params.size()) {
    return absl::DataLossError("checkpoint tensor count does not match its config");
  }
  for (int i = 0; i < cp.params.size(); ++i) {
    if (model.params_.name(i) != cp.params.name(i) ||
        model.params_.tensor(i).shape() != cp.params.tensor(i).shape()) {
      return absl::DataLossError(
          absl::StrCat("checkpoint tensor '", cp.params.name(i),
                       "' does not match the expected layout"));
    }
    model.params_.tensor(i) = cp.params.tensor(i);
  }
  return model;
}

Graph::Graph(const Model& model, ad::Tape& tape,
             std::optional<std::vector<int>> key_resolutions)
    : model_(model), tape_(tape) {
  const ModelConfig& c = model.config();
  const int d = c.depth();
  if (c.kind == ModelKind::kHrnet && c.multitask) {
    for (int r = 1; r <= d; ++r) train_resolutions_.push_back(r);
  } else {
    train_resolutions_.push_back(d);
  }
  for (int i = 0; i < model.params().size(); ++i) {
    params_.push_back(tape_.Param(i));
  }
  const std::vector<double> zeros(std::max(c.n_hidden, c.n_dim), 0.0);
  const double one = 1.0;
  zero_state_ = tape_.Constant(std::span(zeros).first(c.n_hidden), {c.n_hidden});
  zero_location_ = tape_.Constant(std::span(zeros).first(c.n_dim), {c.n_dim});
  channel_off_ = tape_.Constant(std::span(zeros).first(1), {1});
  channel_on_ = tape_.Constant(std::span(&one, 1), {1});
  keys_.resize(d + 1);
  if (c.kind == ModelKind::kHrnet) {
    encodings_.push_back(P("theta_root"));
    for (int r = 1; r <= d; ++r) {
      encodings_.push_back(
          tape_.QuadDeconv(encodings_.back(), P(absl::StrCat("deconv_", r))));
    }
    for (const int r : key_resolutions.value_or(train_resolutions_)) Keys(r);
  }
}

ad::Var Graph::P(absl::string_view name) const {
  const int i = model_.Index(name);
  return i < 0 ? ad::Var{} : params_[i];
}

ad::Var Graph::Encodings(int resolution) const {
  if (resolution < 0 || resolution >= static_cast<int>(encodings_.size())) {
    return {};
  }
  return encodings_[resolution];
}

ad::Var Graph::Keys(int resolution) {
  if (model_.config().kind != ModelKind::kHrnet || resolution < 0 ||
      resolution > config().depth()) {
    return {};
  }
  if (!keys_[resolution].valid()) {
    const ad::Var hidden = tape_.Tanh(tape_.AffineRows(
        encodings_[resolution], P("key_w1"), P("key_b1")));
    keys_[resolution] = tape_.AffineRows(hidden, P("key_w2"), P("key_b2"));
  }
  return keys_[resolution];
}

ad::Var Graph::InitialState() { return zero_state_; }

ad::Var Graph::Encode(const Visit* visit) {
  const ModelConfig& c = config();
  if (visit == nullptr) {
    const ad::Var parts[] = {P("sos_time"), zero_location_, channel_on_};
    return tape_.Concat(parts);
  }
  const ad::Var location =
      c.kind == ModelKind::kHrnet
          ? tape_.Row(encodings_[c.depth()], visit->cell)
          : tape_.Row(P("poi_embedding"), visit->cell);
  const ad::Var parts[] = {tape_.Row(P("time_embedding"), visit->slot), location,
                           channel_off_};
  return tape_.Concat(parts);
}

ad::Var Graph::Step(ad::Var h, ad::Var input) {
  return tape_.GruCell(h, input, P("gru_w_ih"), P("gru_w_hh"), P("gru_b_ih"),
                       P("gru_b_hh"));
}

ad::Var Graph::Query(ad::Var h) {
  const ad::Var hidden = tape_.Tanh(tape_.Affine(P("query_w1"), h, P("query_b1")));
  return tape_.Affine(P("query_w2"), hidden, P("query_b2"));
}

ad::Var Graph::LocationLogitsFromQuery(ad::Var query, int resolution) {
  const ad::Var scores = tape_.MatVec(Keys(resolution), query);
  if (resolution != config().depth()) return scores;
  const ad::Var parts[] = {scores, tape_.Dot(P("eos_key"), query)};
  return tape_.Concat(parts);
}

ad::Var Graph::LocationLogits(ad::Var h, int resolution) {
  if (config().kind == ModelKind::kBaseline) {
    if (resolution != config().depth()) return {};
    return tape_.Affine(P("poi_w"), h, P("poi_b"));
  }
  return LocationLogitsFromQuery(Query(h), resolution);
}

ad::Var Graph::TimeLogits(ad::Var h) {
  return tape_.Affine(P("time_w"), h, P("time_b"));
}

ad::Var Graph::RunPrefix(const Trajectory& prefix) {
  ad::Var h = Step(InitialState(), Encode(nullptr));
  for (const Visit& v : prefix) h = Step(h, Encode(&v));
  return h;
}

ad::Var Graph::Loss(const Trajectory& trajectory) {
  const ModelConfig& c = config();
  const int d = c.depth();
  const bool hrnet = c.kind == ModelKind::kHrnet;
  std::vector<ad::Var> terms;
  ad::Var h = InitialState();
  ad::Var input = Encode(nullptr);
  for (size_t i = 0; i <= trajectory.size(); ++i) {
    h = Step(h, input);
    const ad::Var query = hrnet ? Query(h) : ad::Var{};
    if (i == trajectory.size()) {
      const ad::Var logits =
          hrnet ? LocationLogitsFromQuery(query, d) : LocationLogits(h, d);
      terms.push_back(tape_.SoftmaxCrossEntropy(logits, c.eos_index()));
      break;
    }
    const Visit& v = trajectory[i];
    if (hrnet) {
      for (const int r : train_resolutions_) {
        const int target = static_cast<int>(geo::UpResValue(v.cell, d, r));
        terms.push_back(tape_.SoftmaxCrossEntropy(
            LocationLogitsFromQuery(query, r), target));
      }
    } else {
      terms.push_back(tape_.SoftmaxCrossEntropy(LocationLogits(h, d), v.cell));
    }
    terms.push_back(tape_.SoftmaxCrossEntropy(TimeLogits(h), v.slot));
    input = Encode(&v);
  }
  return tape_.Sum(terms);
}

namespace {

absl::Status CheckCell(const ModelConfig& c, int resolution, int64_t cell) {
  if (resolution < 0 || resolution > c.depth()) {
    return absl::InvalidArgumentError(
        absl::StrCat("resolution ", resolution, " outside [0, ", c.depth(), "]"));
  }
  if (cell < 0 || cell >= (int64_t{1} << (2 * resolution))) {
    return absl::OutOfRangeError(
        absl::StrCat("cell ", cell, " invalid at resolution ", resolution));
  }
  return absl::OkStatus();
}

std::vector<double> Copy(std::span<const double> v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

absl::StatusOr<std::vector<double>> HiEncode(const Model& model, int resolution,
                                             int64_t cell) {
  if (model.config().kind != ModelKind::kHrnet) {
    return absl::FailedPreconditionError("hierarchical encoding needs an HRNet model");
  }
  RETURN_IF_ERROR(CheckCell(model.config(), resolution, cell));
  ad::Tape tape(&model.params());
  Graph graph(model, tape, std::vector<int>{});
  const ad::Var row = tape.Row(graph.Encodings(resolution), static_cast<int>(cell));
  RETURN_IF_ERROR(tape.status());
  return Copy(tape.value(row));
}

absl::StatusOr<std::vector<double>> EncodeVisit(const Model& model,
                                                const Visit& visit) {
  const ModelConfig& c = model.config();
  RETURN_IF_ERROR(CheckCell(c, c.depth(), visit.cell));
  if (visit.slot < 0 || visit.slot >= c.n_time) {
    return absl::OutOfRangeError(absl::StrCat("slot ", visit.slot, " outside [0, ", c.n_time, ")"));
  }
  ad::Tape tape(&model.params());
  Graph graph(model, tape, std::vector<int>{});
  const ad::Var enc = graph.Encode(&visit);
  RETURN_IF_ERROR(tape.status());
  return Copy(tape.value(enc));
}

absl::StatusOr<std::vector<double>> ScoreResolution(const Model& model,
                                                    std::span<const double> h,
                                                    int resolution) {
  const ModelConfig& c = model.config();
  RETURN_IF_ERROR(CheckCell(c, resolution, 0));
  if (static_cast<int>(h.size()) != c.n_hidden) {
    return absl::InvalidArgumentError("hidden state has the wrong size");
  }
  ad::Tape tape(&model.params());
  Graph graph(model, tape, std::vector<int>{resolution});
  const ad::Var logits =
      graph.LocationLogits(tape.Constant(h, {c.n_hidden}), resolution);
  RETURN_IF_ERROR(tape.status());
  if (!logits.valid()) {
    return absl::InvalidArgumentError("the baseline only scores the finest resolution");
  }
  return ad::Softmax(tape.value(logits));
}

absl::StatusOr<NextDistribution> NextDistributionAfter(const Model& model,
                                                       const Trajectory& prefix) {
  const ModelConfig& c = model.config();
  for (const Visit& v : prefix) {
    RETURN_IF_ERROR(ValidateTrajectory({v}, c.num_cells(), c.n_time));
  }
  ad::Tape tape(&model.params());
  Graph graph(model, tape, std::vector<int>{c.depth()});
  const ad::Var h = graph.RunPrefix(prefix);
  const ad::Var loc = graph.LocationLogits(h, c.depth());
  const ad::Var time = graph.TimeLogits(h);
  RETURN_IF_ERROR(tape.status());
  return NextDistribution{ad::Softmax(tape.value(loc)), ad::Softmax(tape.value(time))};
}

absl::StatusOr<double> MultiresLoss(const Model& model,
                                    const Trajectory& trajectory) {
  const ModelConfig& c = model.config();
  RETURN_IF_ERROR(ValidateTrajectory(trajectory, c.num_cells(), c.n_time));
  ad::Tape tape(&model.params());
  Graph graph(model, tape);
  const ad::Var loss = graph.Loss(trajectory);
  RETURN_IF_ERROR(tape.status());
  return tape.scalar(loss);
}

}  // namespace hrnet::model
