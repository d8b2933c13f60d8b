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

#include "hrnet/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "hrnet/audit.h"
#include "hrnet/autodiff/checkpoint.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"

namespace hrnet::pipeline {
namespace {

std::string Bool(bool b) { return b ? "true" : "false"; }

absl::Status Validate(const Dataset& data, const PipelineConfig& config) {
  if (!(config.epsilon_total > 0.0) || !std::isfinite(config.epsilon_total)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (data.size() == 0) return absl::InvalidArgumentError("dataset is empty");
  if (config.checkpoint_every < 0) {
    return absl::InvalidArgumentError("checkpoint interval must be >= 0");
  }
  return ValidateDataset(data);
}

std::string Path(const PipelineConfig& config, absl::string_view name) {
  return (std::filesystem::path(config.out_dir) / std::string(name)).string();
}

absl::Status SaveModel(const model::Model& m, const std::string& path) {
  return ad::SaveCheckpoint(m.ToCheckpoint(), path);
}

}  // namespace

KeyValueBlock ConfigSnapshot(const PipelineConfig& config) {
  KeyValueBlock kv;
  if (!config.data_path.empty()) kv.Set("data", config.data_path);
  kv.Set("arm", std::string(model::ArmName(config.arm)));
  kv.SetDouble("epsilon", config.epsilon_total);
  kv.SetDouble("delta", config.delta);
  kv.Set("seed", std::to_string(config.seed));
  kv.SetInt("n-dim", config.sizes.n_dim);
  kv.SetInt("n-hidden", config.sizes.n_hidden);
  kv.SetInt("n-key", config.sizes.n_key);
  kv.SetInt("key-hidden", config.sizes.key_hidden);
  kv.SetInt("n-time-dim", config.sizes.n_time_dim);
  kv.SetDouble("snr-c", config.snr_constant);
  kv.SetInt("i-res", config.pretrain_resolution);
  kv.SetInt("pretrain-steps", config.pretrain.steps);
  kv.SetInt("pretrain-batch", config.pretrain.batch);
  kv.Set("pretrain-optimizer",
         std::string(ad::OptimizerName(config.pretrain.optimizer)));
  kv.SetDouble("pretrain-lr", config.pretrain.learning_rate);
  kv.SetDouble("clip-norm", config.train.clip_norm);
  kv.SetDouble("sigma", config.train.noise_multiplier);
  kv.SetDouble("batch", config.train.expected_batch);
  kv.SetDouble("epochs", config.train.max_epochs);
  kv.Set("optimizer", std::string(ad::OptimizerName(config.train.optimizer)));
  kv.SetDouble("lr", config.train.learning_rate);
  kv.Set("non-private", Bool(config.train.non_private));
  kv.SetInt("count", config.generate.count);
  kv.SetInt("max-length", config.generate.max_length);
  kv.Set("mask-current", Bool(config.generate.mask_current));
  kv.Set("evaluate", Bool(config.run_evaluation));
  kv.SetInt("n-bin", config.evaluate.n_bin);
  kv.SetDouble("phi", config.evaluate.phi);
  kv.SetInt("n-starts", config.evaluate.n_starts);
  kv.SetInt("n-density-queries", config.evaluate.n_density_queries);
  kv.SetInt("max-patterns", config.evaluate.max_patterns);
  kv.SetInt("min-pattern-length", config.evaluate.min_pattern_length);
  kv.SetInt("checkpoint-every", config.checkpoint_every);
  kv.SetInt("threads", config.threads);
  if (!config.out_dir.empty()) kv.Set("out", config.out_dir);
  return kv;
}

absl::StatusOr<PipelineResult> RunPipeline(const Dataset& data,
                                           const PipelineConfig& config) {
  RETURN_IF_ERROR(Validate(data, config));
  const bool write = !config.out_dir.empty();
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) {
      return absl::InternalError(
          absl::StrCat("cannot create ", config.out_dir, ": ", ec.message()));
    }
    RETURN_IF_ERROR(
        WriteFile(Path(config, "config.txt"), ConfigSnapshot(config).Format()));
  }

  const model::ArmFlags flags = model::FlagsOf(config.arm);
  const int64_t n = static_cast<int64_t>(data.size());
  const int i_res = std::min(config.pretrain_resolution, data.grid.depth());

  // Budget and noise planning use only public metadata (w, |D|).
  PipelineResult result;
  if (flags.pretrain) {
    ASSIGN_OR_RETURN(result.allocation,
                     dp::AllocateBudget(config.epsilon_total, config.delta,
                                        data.grid.width(), n, i_res,
                                        config.snr_constant));
  } else {
    result.allocation.budget = dp::SgdOnlyBudget(config.epsilon_total, config.delta);
  }
  const dp::PrivacyBudget& budget = result.allocation.budget;

  train::TrainConfig tc = config.train;
  tc.epsilon = budget.epsilon_sgd;
  tc.delta = config.delta;
  tc.seed = DeriveSeed(config.seed, "dpsgd");
  tc.threads = config.threads;
  const bool run_sgd = !result.allocation.sgd_skipped;
  if (run_sgd && !tc.non_private && tc.noise_multiplier < 0.0) {
    ASSIGN_OR_RETURN(tc.noise_multiplier,
                     train::PlanNoise(tc.epsilon, tc.delta,
                                      train::SamplingRate(tc, n),
                                      train::MaxSteps(tc, n)));
  }

  model::ModelConfig mc = model::ConfigForArm(config.arm, data.grid, data.n_time);
  mc.n_dim = config.sizes.n_dim;
  mc.n_hidden = config.sizes.n_hidden;
  mc.n_key = config.sizes.n_key;
  mc.key_hidden = config.sizes.key_hidden;
  mc.n_time_dim = config.sizes.n_time_dim;
  ASSIGN_OR_RETURN(model::Model model,
                   model::Model::Create(mc, DeriveSeed(config.seed, "model-init")));

  AccessAudit audit;
  const DatasetView view(data, &audit);

  if (flags.pretrain) {
    audit.BeginPhase("dptran");
    ASSIGN_OR_RETURN(pretrain::TransitionMatrix tran,
                     pretrain::BuildTransitionMatrix(view, i_res));
    Rng noise(DeriveSeed(config.seed, "dptran-noise"));
    ASSIGN_OR_RETURN(
        pretrain::DpTransitionMatrix dptran,
        pretrain::PrivatizeTransition(tran, budget.epsilon_pretrain, noise));
    if (write) {
      RETURN_IF_ERROR(pretrain::SaveDpTransition(dptran, Path(config, "dptran.txt")));
    }

    audit.BeginPhase("pretrain");
    pretrain::PretrainConfig pc = config.pretrain;
    pc.seed = DeriveSeed(config.seed, "pretrain");
    ASSIGN_OR_RETURN(result.pretrain, pretrain::Pretrain(model, dptran, pc));
    if (write) RETURN_IF_ERROR(SaveModel(model, Path(config, "pretrained.ckpt")));
  }

  audit.BeginPhase("dpsgd");
  if (run_sgd) {
    train::StepCallback on_step = nullptr;
    if (write && config.checkpoint_every > 0) {
      on_step = [&](const train::StepLog& log, const model::Model& m) {
        if (log.step % config.checkpoint_every != 0) return absl::OkStatus();
        return SaveModel(m, Path(config, absl::StrCat("step_", log.step, ".ckpt")));
      };
    }
    ASSIGN_OR_RETURN(result.train, train::DpsgdTrain(model, view, tc, on_step));
  }
  result.privacy = result.train.report;
  result.privacy.epsilon_pretrain = budget.epsilon_pretrain;
  result.privacy.delta = config.delta;
  if (write) {
    RETURN_IF_ERROR(SaveModel(model, Path(config, "final.ckpt")));
    std::string log;
    for (const train::StepLog& s : result.train.log) {
      absl::StrAppend(&log, train::FormatStepLog(s), "\n");
    }
    RETURN_IF_ERROR(WriteFile(Path(config, "train_log.txt"), log));
  }

  audit.BeginPhase("generate");
  generate::GenConfig gc = config.generate;
  if (gc.count <= 0) gc.count = n;
  gc.seed = DeriveSeed(config.seed, "generate");
  gc.threads = config.threads;
  ASSIGN_OR_RETURN(result.synthetic, generate::GenerateDataset(model, gc));
  if (write) RETURN_IF_ERROR(SaveDataset(result.synthetic, Path(config, "synthetic.txt")));

  if (config.run_evaluation) {
    // Utility evaluation compares against the raw data and is not part of the
    // private release; its reads are logged under their own phase.
    audit.BeginPhase("evaluate");
    audit.RecordReads(n);
    evaluate::EvalConfig ec = config.evaluate;
    ec.query_seed = DeriveSeed(config.seed, "eval-queries");
    ASSIGN_OR_RETURN(result.metrics,
                     evaluate::FullReport(data, result.synthetic, ec));
    if (write) {
      const evaluate::MetricReport& m = *result.metrics;
      RETURN_IF_ERROR(WriteFile(Path(config, "metrics.csv"),
                                absl::StrCat(m.CsvHeader(), "\n", m.CsvRow(), "\n")));
      RETURN_IF_ERROR(WriteFile(Path(config, "metrics.txt"), m.ToKeyValue().Format()));
    }
  }

  result.reads = audit.Summary();
  for (const char* phase : {"dptran", "pretrain", "dpsgd", "generate"}) {
    result.reads.try_emplace(phase, 0);
  }
  if (write) {
    KeyValueBlock privacy = result.privacy.ToKeyValue();
    privacy.Set("arm", std::string(model::ArmName(config.arm)));
    privacy.SetDouble("allocated_epsilon_total", budget.epsilon_total);
    privacy.SetDouble("allocated_epsilon_sgd", budget.epsilon_sgd);
    privacy.SetDouble("allocated_epsilon_pretrain", budget.epsilon_pretrain);
    RETURN_IF_ERROR(WriteFile(Path(config, "privacy.txt"), privacy.Format()));
    KeyValueBlock reads;
    for (const auto& [phase, count] : result.reads) reads.SetInt(phase, count);
    RETURN_IF_ERROR(WriteFile(Path(config, "audit.txt"), reads.Format()));
  }
  result.model = std::move(model);
  return result;
}

absl::StatusOr<PipelineResult> RunPipelineFromFile(const PipelineConfig& config) {
  ASSIGN_OR_RETURN(const Dataset data, LoadDataset(config.data_path));
  return RunPipeline(data, config);
}

}  // namespace hrnet::pipeline
