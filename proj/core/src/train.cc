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

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "hrnet/accountant.h"
#include "hrnet/autodiff/optimizer.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"

namespace hrnet::train {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaMin = 0.1;
constexpr double kSigmaRatio = 1.01;
constexpr int kSigmaGridSize = 1000;

double GridSigma(int i) { return kSigmaMin * std::pow(kSigmaRatio, i); }

// Epsilon after `steps` identical steps, computed exactly as the accountant
// does for a single Compose(q, sigma, steps).
double EpsilonAfter(std::span<const double> per_step, int64_t steps, double delta) {
  if (steps == 0) return 0.0;
  const auto orders = dp::RdpOrders();
  const double log_inv_delta = -std::log(delta);
  double best = kInf;
  for (size_t i = 0; i < orders.size(); ++i) {
    best = std::min(best, static_cast<double>(steps) * per_step[i] +
                              log_inv_delta / (orders[i] - 1));
  }
  return std::max(best, 0.0);
}

// Per-example gradients and losses for a batch, split over worker threads in
// contiguous chunks. Each worker owns a tape whose model prefix is shared by
// its examples.
absl::Status PerExample(const model::Model& model, const std::vector<const Trajectory*>& batch,
                        int threads, std::vector<ad::GradientSet>& grads,
                        std::vector<double>& losses) {
  const int n = static_cast<int>(batch.size());
  grads.assign(n, {});
  losses.assign(n, 0.0);
  const int workers = std::max(1, std::min(threads, n));
  std::vector<absl::Status> status(workers);
  auto work = [&](int w) {
    ad::Tape tape(&model.params());
    model::Graph graph(model, tape);
    const int mark = tape.Mark();
    for (int i = w * n / workers; i < (w + 1) * n / workers; ++i) {
      const ad::Var loss = graph.Loss(*batch[i]);
      absl::StatusOr<ad::GradientSet> g = tape.Backward(loss);
      if (!g.ok()) {
        status[w] = g.status();
        return;
      }
      losses[i] = tape.scalar(loss);
      grads[i] = *std::move(g);
      grads[i].example = i;
      tape.Truncate(mark);
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
  return absl::OkStatus();
}

}  // namespace

double SamplingRate(const TrainConfig& config, int64_t dataset_size) {
  if (dataset_size <= 0) return 0.0;
  return std::min(1.0, config.expected_batch / static_cast<double>(dataset_size));
}

int64_t MaxSteps(const TrainConfig& config, int64_t dataset_size) {
  const double q = SamplingRate(config, dataset_size);
  if (q <= 0.0) return 0;
  return static_cast<int64_t>(std::ceil(config.max_epochs / q - 1e-9));
}

absl::StatusOr<double> PlanNoise(double epsilon, double delta, double q,
                                 int64_t max_steps) {
  if (!(epsilon > 0.0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError("sampling rate must lie in (0, 1]");
  }
  if (max_steps < 1) return absl::InvalidArgumentError("max_steps must be >= 1");
  auto fits = [&](int i) -> absl::StatusOr<bool> {
    ASSIGN_OR_RETURN(const double e, dp::AccountantEpsilon(q, GridSigma(i), max_steps, delta));
    return e <= epsilon;
  };
  ASSIGN_OR_RETURN(const bool top_fits, fits(kSigmaGridSize - 1));
  if (!top_fits) {
    return absl::FailedPreconditionError(absl::StrCat(
        "no noise multiplier up to ", GridSigma(kSigmaGridSize - 1), " reaches epsilon ",
        epsilon, " within ", max_steps, " steps at q = ", q));
  }
  // Epsilon decreases in sigma, so the feasible indices form a suffix.
  int lo = -1, hi = kSigmaGridSize - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    ASSIGN_OR_RETURN(const bool ok, fits(mid));
    (ok ? hi : lo) = mid;
  }
  return GridSigma(hi);
}

std::string FormatStepLog(const StepLog& log) {
  return absl::StrFormat("step=%d batch=%d grad_norm=%.6g loss=%.6g epsilon=%.6g",
                         log.step, log.batch_size, log.mean_grad_norm, log.loss,
                         log.epsilon);
}

absl::StatusOr<TrainResult> DpsgdTrain(model::Model& model, const DatasetView& data,
                                       const TrainConfig& config,
                                       const StepCallback& on_step) {
  const int64_t n = static_cast<int64_t>(data.size());
  if (n == 0) return absl::InvalidArgumentError("training dataset is empty");
  if (!(data.grid() == model.config().grid) || data.n_time() != model.config().n_time) {
    return absl::InvalidArgumentError("dataset grid or slot count differs from the model");
  }
  if (!config.non_private && !(config.epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        "DP-SGD needs a positive epsilon; use non_private for noiseless training");
  }
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!(config.expected_batch > 0.0) || !(config.max_epochs >= 0.0) ||
      !(config.learning_rate > 0.0) || config.threads < 1) {
    return absl::InvalidArgumentError(
        "expected_batch, learning_rate and threads must be positive, max_epochs >= 0");
  }
  if (!(config.clip_norm > 0.0)) return absl::InvalidArgumentError("clip_norm must be > 0");

  const double q = SamplingRate(config, n);
  const int64_t max_steps = MaxSteps(config, n);
  double sigma = 0.0;
  if (!config.non_private) {
    if (config.noise_multiplier < 0.0) {
      ASSIGN_OR_RETURN(sigma, PlanNoise(config.epsilon, config.delta, q, std::max<int64_t>(max_steps, 1)));
    } else if (config.noise_multiplier == 0.0) {
      return absl::InvalidArgumentError(
          "sigma = 0 spends infinite epsilon; set non_private to train without noise");
    } else {
      sigma = config.noise_multiplier;
    }
    if (std::isinf(config.clip_norm)) {
      return absl::InvalidArgumentError("private training needs a finite clip norm");
    }
  }

  std::vector<double> per_step_rdp;
  if (!config.non_private) {
    dp::RdpAccountant one;
    one.Compose(q, sigma, 1);
    per_step_rdp.assign(one.rdp().begin(), one.rdp().end());
  }

  TrainResult result;
  Rng sample_rng(DeriveSeed(config.seed, "dpsgd-sampling"));
  Rng noise_rng(DeriveSeed(config.seed, "dpsgd-noise"));
  std::vector<const Trajectory*> batch;
  std::vector<ad::GradientSet> grads;
  std::vector<double> losses;
  ad::Optimizer optimizer(config.optimizer, config.learning_rate);
  int64_t step = 0;
  for (; step < max_steps; ++step) {
    double epsilon_next = kInf;
    if (!config.non_private) {
      epsilon_next = EpsilonAfter(per_step_rdp, step + 1, config.delta);
      if (epsilon_next > config.epsilon) {
        result.stopped_by_budget = true;
        break;
      }
    }
    batch.clear();
    for (int64_t i = 0; i < n; ++i) {
      if (q >= 1.0 || sample_rng.Uniform() < q) batch.push_back(&data.Read(i));
    }
    RETURN_IF_ERROR(PerExample(model, batch, config.threads, grads, losses));

    StepLog log;
    log.step = step + 1;
    log.batch_size = static_cast<int>(batch.size());
    log.epsilon = epsilon_next;
    ad::GradientSet update;
    if (batch.empty()) {
      update = ad::GradientSet::ZerosLike(model.params());
      if (sigma > 0.0) {
        dp::AddGaussianNoise(update, sigma * config.clip_norm / config.expected_batch,
                             noise_rng);
      }
    } else {
      for (size_t i = 0; i < grads.size(); ++i) {
        log.mean_grad_norm += grads[i].Norm() / grads.size();
        log.loss += losses[i] / losses.size();
      }
      ASSIGN_OR_RETURN(update, dp::ClipAndNoise(grads, config.clip_norm, sigma,
                                                config.expected_batch, noise_rng));
    }
    RETURN_IF_ERROR(optimizer.Step(model.mutable_params(), update));
    result.log.push_back(log);
    if (on_step) RETURN_IF_ERROR(on_step(log, model));
  }

  dp::PrivacyReport& report = result.report;
  report.delta = config.delta;
  report.sigma = sigma;
  report.clip_norm = config.clip_norm;
  report.steps = step;
  report.sampling_rate = q;
  if (config.non_private) {
    report.epsilon_sgd = step == 0 ? 0.0 : kInf;
  } else {
    ASSIGN_OR_RETURN(report.epsilon_sgd,
                     dp::AccountantEpsilon(q, sigma, step, config.delta));
  }
  return result;
}

}  // namespace hrnet::train
