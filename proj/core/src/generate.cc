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

#include "hrnet/generate.h"

#include <algorithm>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "hrnet/autodiff/ops.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/status_macros.h"

namespace hrnet::generate {
namespace {

// Index drawn from unnormalized nonnegative weights, or -1 if they sum to 0.
int Draw(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (const double w : weights) total += w;
  if (!(total > 0.0)) return -1;
  const double u = rng.Uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

// Incremental sampler: one tape holds the model prefix, each trajectory is
// built above a mark and discarded afterwards.
class Sampler {
 public:
  explicit Sampler(const model::Model& model)
      : model_(model),
        tape_(&model.params()),
        graph_(model, tape_, std::vector<int>{model.config().depth()}),
        mark_(tape_.Mark()) {}

  absl::StatusOr<Trajectory> Sample(const GenConfig& config, Rng& rng) {
    const model::ModelConfig& c = model_.config();
    const int eos = c.eos_index();
    Trajectory out;
    ad::Var h = graph_.Step(graph_.InitialState(), graph_.Encode(nullptr));
    while (static_cast<int>(out.size()) < config.max_length) {
      const ad::Var loc_logits = graph_.LocationLogits(h, c.depth());
      const ad::Var time_logits = graph_.TimeLogits(h);
      RETURN_IF_ERROR(tape_.status());
      std::vector<double> loc = ad::Softmax(tape_.value(loc_logits));
      if (out.empty()) {
        loc[eos] = 0.0;
      } else if (config.mask_current) {
        loc[out.back().cell] = 0.0;
      }
      int cell = Draw(loc, rng);
      if (cell < 0) {
        if (!out.empty()) break;
        cell = static_cast<int>(rng.Uniform() * c.num_cells());
      }
      if (cell == eos) break;

      std::vector<double> time = ad::Softmax(tape_.value(time_logits));
      const int min_slot = out.empty() ? 0 : out.back().slot;
      std::fill(time.begin(), time.begin() + min_slot, 0.0);
      int slot = Draw(time, rng);
      if (slot < 0) slot = min_slot;

      out.push_back({cell, slot});
      h = graph_.Step(h, graph_.Encode(&out.back()));
    }
    tape_.Truncate(mark_);
    RETURN_IF_ERROR(tape_.status());
    return out;
  }

 private:
  const model::Model& model_;
  ad::Tape tape_;
  model::Graph graph_;
  size_t mark_;
};

absl::Status Validate(const GenConfig& config) {
  if (config.max_length < 1) return absl::InvalidArgumentError("max_length must be >= 1");
  if (config.count < 0) return absl::InvalidArgumentError("count must be >= 0");
  if (config.threads < 1) return absl::InvalidArgumentError("threads must be >= 1");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Trajectory> SampleTrajectory(const model::Model& model,
                                            const GenConfig& config, Rng& rng) {
  RETURN_IF_ERROR(Validate(config));
  Sampler sampler(model);
  return sampler.Sample(config, rng);
}

absl::StatusOr<Dataset> GenerateDataset(const model::Model& model,
                                        const GenConfig& config) {
  RETURN_IF_ERROR(Validate(config));
  Dataset out;
  out.grid = model.config().grid;
  out.n_time = model.config().n_time;
  out.trajectories.resize(config.count);
  const int64_t n = config.count;
  const int workers = static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(config.threads, n)));
  std::vector<absl::Status> status(workers);
  auto work = [&](int w) {
    Sampler sampler(model);
    for (int64_t i = w * n / workers; i < (w + 1) * n / workers; ++i) {
      Rng rng(DeriveSeed(config.seed, static_cast<uint64_t>(i)));
      absl::StatusOr<Trajectory> t = sampler.Sample(config, rng);
      if (!t.ok()) {
        status[w] = t.status();
        return;
      }
      out.trajectories[i] = *std::move(t);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }
  for (const absl::Status& s : status) RETURN_IF_ERROR(s);
  return out;
}

}  // namespace hrnet::generate
