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

#include "hrnet/pretrain.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "hrnet/autodiff/optimizer.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/dp.h"
#include "hrnet/key_value.h"
#include "hrnet/status_macros.h"

namespace hrnet::pretrain {
namespace {

using model::Graph;
using model::Model;
using model::ModelKind;

// Distinct (region, next cell) pairs of one trajectory.
std::vector<std::pair<int64_t, int32_t>> DistinctSteps(const Trajectory& v,
                                                       int depth, int i_res) {
  std::vector<std::pair<int64_t, int32_t>> steps;
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    steps.emplace_back(geo::UpResValue(v[i].cell, depth, i_res), v[i + 1].cell);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

absl::Status CheckRatio(std::span<const double> r, int expected) {
  if (static_cast<int>(r.size()) != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("mix ratio has ", r.size(), " entries, expected ", expected));
  }
  double total = 0.0;
  for (const double v : r) {
    if (!(v >= 0.0 && v <= 1.0)) {
      return absl::InvalidArgumentError("mix ratio entries must lie in [0, 1]");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(absl::StrCat("mix ratio sums to ", total));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(const DatasetView& data,
                                                       int i_res) {
  const int depth = data.grid().depth();
  if (i_res < 0 || i_res > depth) {
    return absl::InvalidArgumentError(
        absl::StrCat("transition resolution ", i_res, " outside [0, ", depth, "]"));
  }
  TransitionMatrix m;
  m.i_res = i_res;
  m.n_poi = static_cast<int>(data.grid().num_cells());
  m.values.assign(static_cast<size_t>(m.rows()) * m.n_poi, 0.0);
  for (size_t t = 0; t < data.size(); ++t) {
    const Trajectory& v = data.Read(t);
    if (v.empty()) continue;
    const double weight = 1.0 / static_cast<double>(v.size());
    for (const auto& [region, next] : DistinctSteps(v, depth, i_res)) {
      m.values[static_cast<size_t>(region) * m.n_poi + next] += weight;
    }
  }
  return m;
}

double TrajectoryContribution(const Trajectory& trajectory, int depth, int i_res) {
  if (trajectory.empty()) return 0.0;
  return static_cast<double>(DistinctSteps(trajectory, depth, i_res).size()) /
         static_cast<double>(trajectory.size());
}

void PostProcess(DpTransitionMatrix& m) {
  m.rows.resize(m.noised.size());
  for (int r = 0; r < m.num_rows(); ++r) {
    const size_t off = static_cast<size_t>(r) * m.n_poi;
    double total = 0.0;
    for (int c = 0; c < m.n_poi; ++c) {
      m.rows[off + c] = std::max(m.noised[off + c], 0.0) + m.smoothing;
      total += m.rows[off + c];
    }
    for (int c = 0; c < m.n_poi; ++c) m.rows[off + c] /= total;
  }
}

absl::StatusOr<DpTransitionMatrix> PrivatizeTransition(const TransitionMatrix& tran,
                                                       double epsilon, Rng& rng) {
  DpTransitionMatrix m;
  m.i_res = tran.i_res;
  m.n_poi = tran.n_poi;
  m.epsilon = epsilon;
  ASSIGN_OR_RETURN(m.noised, dp::LaplaceMechanism(tran.values, 1.0, epsilon, rng));
  PostProcess(m);
  return m;
}

std::string FormatDpTransition(const DpTransitionMatrix& m) {
  KeyValueBlock header;
  header.SetInt("i_res", m.i_res);
  header.SetInt("n_poi", m.n_poi);
  header.SetDouble("epsilon", m.epsilon);
  header.SetDouble("smoothing", m.smoothing);
  std::string out = "# hrnet dp transition matrix v1\n" + header.Format() + "---\n";
  for (int r = 0; r < m.num_rows(); ++r) {
    for (int c = 0; c < m.n_poi; ++c) {
      if (c > 0) out += ' ';
      out += FormatDouble(m.noised[static_cast<size_t>(r) * m.n_poi + c]);
    }
    out += '\n';
  }
  return out;
}

absl::StatusOr<DpTransitionMatrix> ParseDpTransition(absl::string_view text) {
  const size_t sep = text.find("\n---\n");
  if (sep == absl::string_view::npos) {
    return absl::InvalidArgumentError("transition file lacks the '---' separator");
  }
  ASSIGN_OR_RETURN(const KeyValueBlock header, KeyValueBlock::Parse(text.substr(0, sep)));
  DpTransitionMatrix m;
  ASSIGN_OR_RETURN(const int64_t i_res, header.GetInt("i_res"));
  ASSIGN_OR_RETURN(const int64_t n_poi, header.GetInt("n_poi"));
  ASSIGN_OR_RETURN(m.epsilon, header.GetDouble("epsilon"));
  ASSIGN_OR_RETURN(m.smoothing, header.GetDouble("smoothing"));
  if (i_res < 0 || i_res > 15 || n_poi < 1 || !(m.smoothing > 0.0)) {
    return absl::InvalidArgumentError("transition header out of range");
  }
  m.i_res = static_cast<int>(i_res);
  m.n_poi = static_cast<int>(n_poi);
  for (absl::string_view line :
       absl::StrSplit(text.substr(sep + 5), '\n', absl::SkipWhitespace())) {
    for (absl::string_view tok : absl::StrSplit(line, ' ', absl::SkipEmpty())) {
      ASSIGN_OR_RETURN(const double v, ParseDouble(tok));
      m.noised.push_back(v);
    }
  }
  if (m.noised.size() != static_cast<size_t>(m.num_rows()) * m.n_poi) {
    return absl::InvalidArgumentError(
        absl::StrCat("transition file has ", m.noised.size(), " values, expected ",
                     static_cast<size_t>(m.num_rows()) * m.n_poi));
  }
  PostProcess(m);
  return m;
}

absl::Status SaveDpTransition(const DpTransitionMatrix& m, const std::string& path) {
  return WriteFile(path, FormatDpTransition(m));
}

absl::StatusOr<DpTransitionMatrix> LoadDpTransition(const std::string& path) {
  ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  return ParseDpTransition(text);
}

absl::StatusOr<std::vector<double>> MixedTarget(const DpTransitionMatrix& m,
                                                std::span<const double> r) {
  RETURN_IF_ERROR(CheckRatio(r, m.num_rows()));
  std::vector<double> out(m.n_poi, 0.0);
  for (int l = 0; l < m.num_rows(); ++l) {
    if (r[l] == 0.0) continue;
    const auto row = m.row(l);
    for (int c = 0; c < m.n_poi; ++c) out[c] += r[l] * row[c];
  }
  return out;
}

absl::StatusOr<std::vector<double>> MixedInput(const Model& model,
                                               std::span<const double> r, int i_res) {
  if (model.config().kind != ModelKind::kHrnet) {
    return absl::FailedPreconditionError("mixed input needs an HRNet model");
  }
  if (i_res < 0 || i_res > model.config().depth()) {
    return absl::InvalidArgumentError("mixing resolution outside the model depth");
  }
  RETURN_IF_ERROR(CheckRatio(r, 1 << (2 * i_res)));
  ad::Tape tape(&model.params());
  Graph graph(model, tape, std::vector<int>{});
  const ad::Var x = tape.WeightedRowSum(graph.Encodings(i_res), r);
  RETURN_IF_ERROR(tape.status());
  const auto v = tape.value(x);
  return std::vector<double>(v.begin(), v.end());
}

std::vector<double> SampleMixRatio(int length, Rng& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> r(length);
  double total = 0.0;
  for (double& v : r) {
    v = gamma(rng);
    total += v;
  }
  for (double& v : r) v /= total;
  return r;
}

namespace {

// Builds the pretraining loss for one mixing vector on `graph`.
ad::Var MixLoss(Graph& graph, int i_res, std::span<const double> r,
                std::span<const double> target) {
  ad::Tape& tape = graph.tape();
  const model::ModelConfig& c = graph.config();
  const bool hrnet = c.kind == ModelKind::kHrnet;
  const ad::Var x = hrnet ? tape.WeightedRowSum(graph.Encodings(i_res), r)
                          : tape.Constant(r, {static_cast<int>(r.size())});
  const ad::Var h =
      tape.Tanh(tape.Affine(graph.P("temp_w"), x, graph.P("temp_b")));
  const ad::Var logits =
      hrnet ? tape.MatVec(graph.Keys(c.depth()), graph.Query(h))
            : tape.Slice(tape.Affine(graph.P("poi_w"), h, graph.P("poi_b")), 0,
                         c.num_cells());
  return tape.SoftmaxKl(target, logits);
}

double MeanOneHotKl(const Model& work, const DpTransitionMatrix& tran) {
  ad::Tape tape(&work.params());
  Graph graph(work, tape, std::vector<int>{work.config().depth()});
  double total = 0.0;
  std::vector<double> r(tran.num_rows(), 0.0);
  for (int l = 0; l < tran.num_rows(); ++l) {
    r.assign(r.size(), 0.0);
    r[l] = 1.0;
    total += tape.scalar(MixLoss(graph, tran.i_res, r, tran.row(l)));
  }
  return total / tran.num_rows();
}

}  // namespace

absl::StatusOr<PretrainResult> Pretrain(Model& model, const DpTransitionMatrix& tran,
                                        const PretrainConfig& config) {
  const model::ModelConfig& c = model.config();
  if (tran.n_poi != c.num_cells()) {
    return absl::InvalidArgumentError("transition matrix does not match the model grid");
  }
  if (tran.i_res < 0 || tran.i_res > c.depth()) {
    return absl::InvalidArgumentError("transition resolution exceeds the model depth");
  }
  if (tran.rows.size() != static_cast<size_t>(tran.num_rows()) * tran.n_poi) {
    return absl::InvalidArgumentError("transition matrix rows are not post-processed");
  }
  if (config.steps < 0 || config.batch < 1 || !(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("pretraining needs steps >= 0, batch >= 1, lr > 0");
  }

  Model work = model;
  const int n_original = work.params().size();
  {
    const int in = c.kind == ModelKind::kHrnet ? c.n_dim : tran.num_rows();
    Rng init(DeriveSeed(config.seed, "pretrain-temp-init"));
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    ad::Tensor w({c.n_hidden, in}), b({c.n_hidden});
    for (double& v : w.values()) v = u(init);
    for (double& v : b.values()) v = u(init);
    work.mutable_params().Add("temp_w", std::move(w));
    work.mutable_params().Add("temp_b", std::move(b));
  }

  PretrainResult result;
  result.initial_kl = MeanOneHotKl(work, tran);
  Rng rng(DeriveSeed(config.seed, "pretrain-mix"));
  ad::Tape tape(&work.params());
  std::vector<ad::Var> terms;
  ad::Optimizer optimizer(config.optimizer, config.learning_rate);
  for (int step = 0; step < config.steps; ++step) {
    tape.Truncate(0);
    Graph graph(work, tape, std::vector<int>{c.depth()});
    terms.clear();
    for (int b = 0; b < config.batch; ++b) {
      const std::vector<double> r = SampleMixRatio(tran.num_rows(), rng);
      ASSIGN_OR_RETURN(const std::vector<double> target, MixedTarget(tran, r));
      terms.push_back(MixLoss(graph, tran.i_res, r, target));
    }
    const ad::Var loss = tape.Scale(tape.Sum(terms), 1.0 / config.batch);
    ASSIGN_OR_RETURN(const ad::GradientSet grads, tape.Backward(loss));
    result.loss_trace.push_back(tape.scalar(loss));
    RETURN_IF_ERROR(optimizer.Step(work.mutable_params(), grads));
  }
  result.final_kl = MeanOneHotKl(work, tran);
  for (int p = 0; p < n_original; ++p) {
    model.mutable_params().tensor(p) = work.params().tensor(p);
  }
  return result;
}

}  // namespace hrnet::pretrain
