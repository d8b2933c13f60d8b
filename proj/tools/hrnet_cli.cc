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

// hrnet: command-line entry points for the private trajectory synthesizer.
//
//   hrnet synth-data --kind straight --w 16 --count 10000 --seed 7 --out d.txt
//   hrnet run --data d.txt --arm full --epsilon 2 --out runs/full
//   hrnet evaluate --real d.txt --gen runs/full/synthetic.txt
//
// Every subcommand accepts --config FILE with key=value lines named after its
// flags. The file is expanded into --key=value arguments placed before the
// command line, and repeated options keep their last value, so explicit flags
// win.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "hrnet/autodiff/checkpoint.h"
#include "hrnet/dp.h"
#include "hrnet/evaluate.h"
#include "hrnet/generate.h"
#include "hrnet/key_value.h"
#include "hrnet/model.h"
#include "hrnet/pipeline.h"
#include "hrnet/preprocess.h"
#include "hrnet/pretrain.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"
#include "hrnet/train.h"

namespace hrnet::cli {
namespace {

namespace fs = std::filesystem;

// Flag storage shared by the subcommands. Enumerations stay strings until
// dispatch so parse errors surface as module diagnostics.
struct Flags {
  std::string config_unused;
  std::string data, out, input, real, gen, model_path, init, dptran, kind;
  std::string arm = "full";
  std::string optimizer = "adam";
  std::string pretrain_optimizer = "adam";
  double epsilon = 2.0;
  double delta = 1e-5;
  uint64_t seed = 0;
  int w = 16;
  int n_time = 24;
  int64_t n_records = 0;
  int64_t count = -1;
  pipeline::PipelineConfig run;
  std::vector<double> bbox;
  preprocess::PreprocessConfig prep;
};

void AddSizeFlags(CLI::App* app, pipeline::ModelSizes& s) {
  app->add_option("--n-dim", s.n_dim, "Location embedding width")->capture_default_str();
  app->add_option("--n-hidden", s.n_hidden, "GRU state width")->capture_default_str();
  app->add_option("--n-key", s.n_key, "Query/key width")->capture_default_str();
  app->add_option("--key-hidden", s.key_hidden, "Query/key hidden width")
      ->capture_default_str();
  app->add_option("--n-time-dim", s.n_time_dim, "Time embedding width")
      ->capture_default_str();
}

void AddPretrainFlags(CLI::App* app, Flags& f) {
  pipeline::PipelineConfig& c = f.run;
  app->add_option("--i-res", c.pretrain_resolution, "Transition matrix resolution")
      ->capture_default_str();
  app->add_option("--snr-c", c.snr_constant, "Budget split constant")->capture_default_str();
  app->add_option("--pretrain-steps", c.pretrain.steps)->capture_default_str();
  app->add_option("--pretrain-batch", c.pretrain.batch)->capture_default_str();
  app->add_option("--pretrain-optimizer", f.pretrain_optimizer, "sgd or adam")
      ->capture_default_str();
  app->add_option("--pretrain-lr", c.pretrain.learning_rate)->capture_default_str();
}

void AddTrainFlags(CLI::App* app, Flags& f) {
  train::TrainConfig& t = f.run.train;
  app->add_option("--clip-norm", t.clip_norm, "Per-example L2 clip")->capture_default_str();
  app->add_option("--sigma", t.noise_multiplier,
                  "Noise multiplier; negative plans it from the budget")
      ->capture_default_str();
  app->add_option("--batch", t.expected_batch, "Expected Poisson batch size")
      ->capture_default_str();
  app->add_option("--epochs", t.max_epochs)->capture_default_str();
  app->add_option("--optimizer", f.optimizer, "sgd or adam")->capture_default_str();
  app->add_option("--lr", t.learning_rate)->capture_default_str();
  app->add_flag("--non-private", t.non_private, "Disable clipping noise and accounting");
}

void AddGenerateFlags(CLI::App* app, generate::GenConfig& g) {
  app->add_option("--max-length", g.max_length)->capture_default_str();
  app->add_option("--mask-current", g.mask_current,
                  "Forbid staying in the current cell")
      ->capture_default_str();
}

void AddEvalFlags(CLI::App* app, evaluate::EvalConfig& e) {
  app->add_option("--n-bin", e.n_bin)->capture_default_str();
  app->add_option("--phi", e.phi, "Relative error floor")->capture_default_str();
  app->add_option("--n-starts", e.n_starts)->capture_default_str();
  app->add_option("--n-density-queries", e.n_density_queries)->capture_default_str();
  app->add_option("--max-patterns", e.max_patterns)->capture_default_str();
  app->add_option("--min-pattern-length", e.min_pattern_length)->capture_default_str();
}

void AddCommon(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_unused, "key=value file named after the flags");
  app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app->add_option("--threads", f.run.threads)->capture_default_str()->check(
      CLI::PositiveNumber);
}

// argv with every "--config FILE" of the subcommand replaced by the file's
// entries as --key=value arguments.
absl::StatusOr<std::vector<std::string>> ExpandConfig(int argc, char** argv) {
  std::vector<std::string> head, tail;
  std::vector<std::string> files;
  for (int i = 0; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i < 2) {
      head.push_back(arg);
    } else if (arg == "--config" && i + 1 < argc) {
      files.push_back(argv[++i]);
    } else if (arg.rfind("--config=", 0) == 0) {
      files.push_back(arg.substr(9));
    } else {
      tail.push_back(arg);
    }
  }
  for (const std::string& file : files) {
    ASSIGN_OR_RETURN(const std::string text, ReadFile(file));
    ASSIGN_OR_RETURN(const KeyValueBlock kv, KeyValueBlock::Parse(text));
    for (const auto& [key, value] : kv.entries()) {
      head.push_back(absl::StrCat("--", key, "=", value));
    }
  }
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

absl::Status MakeDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::InternalError(absl::StrCat("cannot create ", dir, ": ", ec.message()));
  return absl::OkStatus();
}

std::string Join(const std::string& dir, absl::string_view name) {
  return (fs::path(dir) / std::string(name)).string();
}

absl::Status ResolveEnums(Flags& f) {
  ASSIGN_OR_RETURN(f.run.arm, model::ParseArm(f.arm));
  ASSIGN_OR_RETURN(f.run.train.optimizer, ad::ParseOptimizer(f.optimizer));
  ASSIGN_OR_RETURN(f.run.pretrain.optimizer, ad::ParseOptimizer(f.pretrain_optimizer));
  return absl::OkStatus();
}

model::ModelConfig SizedConfig(const Flags& f, const geo::GridSpec& grid, int n_time) {
  model::ModelConfig mc = model::ConfigForArm(f.run.arm, grid, n_time);
  mc.n_dim = f.run.sizes.n_dim;
  mc.n_hidden = f.run.sizes.n_hidden;
  mc.n_key = f.run.sizes.n_key;
  mc.key_hidden = f.run.sizes.key_hidden;
  mc.n_time_dim = f.run.sizes.n_time_dim;
  return mc;
}

// --- subcommands -----------------------------------------------------------

absl::Status Preprocess(const Flags& f) {
  ASSIGN_OR_RETURN(const std::vector<preprocess::RawTrajectory> raw,
                   preprocess::ReadRawCsv(f.input));
  geo::BoundingBox box;
  if (f.bbox.size() == 4) {
    box = {f.bbox[0], f.bbox[1], f.bbox[2], f.bbox[3]};
  } else {
    box = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& t : raw) {
      for (const auto& p : t.points) {
        box.min_lat = std::min(box.min_lat, p.lat);
        box.min_lng = std::min(box.min_lng, p.lng);
        box.max_lat = std::max(box.max_lat, p.lat);
        box.max_lng = std::max(box.max_lng, p.lng);
      }
    }
  }
  ASSIGN_OR_RETURN(const geo::GridSpec grid, geo::GridSpec::Create(box, f.w));
  preprocess::PreprocessConfig pc = f.prep;
  pc.n_time = f.n_time;
  ASSIGN_OR_RETURN(const Dataset d, preprocess::BuildDataset(raw, grid, pc));
  RETURN_IF_ERROR(SaveDataset(d, f.out));
  std::cout << "trajectories=" << d.size() << "\n";
  return absl::OkStatus();
}

absl::Status SynthData(const Flags& f) {
  absl::StatusOr<Dataset> d;
  if (f.kind == "straight") {
    d = preprocess::GenStraightDataset(f.w, f.count, f.seed);
  } else if (f.kind == "random") {
    d = preprocess::GenRandomDataset(f.w, f.count, f.seed);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown dataset kind '", f.kind, "'"));
  }
  if (!d.ok()) return d.status();
  return SaveDataset(*d, f.out);
}

absl::Status Budget(const Flags& f) {
  ASSIGN_OR_RETURN(const dp::Allocation a,
                   dp::AllocateBudget(f.epsilon, f.delta, f.w, f.n_records,
                                      f.run.pretrain_resolution, f.run.snr_constant));
  KeyValueBlock kv;
  kv.SetDouble("epsilon_total", a.budget.epsilon_total);
  kv.SetDouble("epsilon_pretrain", a.budget.epsilon_pretrain);
  kv.SetDouble("epsilon_sgd", a.budget.epsilon_sgd);
  kv.SetDouble("delta", a.budget.delta);
  if (!a.sgd_skipped) {
    const train::TrainConfig& t = f.run.train;
    const double q = train::SamplingRate(t, f.n_records);
    const int64_t steps = train::MaxSteps(t, f.n_records);
    kv.SetDouble("sampling_rate", q);
    kv.SetInt("steps", steps);
    const absl::StatusOr<double> sigma =
        train::PlanNoise(a.budget.epsilon_sgd, f.delta, q, steps);
    if (sigma.ok()) {
      kv.SetDouble("sigma", *sigma);
    } else {
      kv.Set("sigma", "infeasible");
    }
  }
  std::cout << kv.Format();
  return absl::OkStatus();
}

absl::Status Pretrain(const Flags& f) {
  RETURN_IF_ERROR(MakeDir(f.out));
  pretrain::DpTransitionMatrix tran;
  geo::GridSpec grid;
  int n_time = f.n_time;
  if (!f.dptran.empty()) {
    ASSIGN_OR_RETURN(tran, pretrain::LoadDpTransition(f.dptran));
    ASSIGN_OR_RETURN(grid, geo::GridSpec::Create(preprocess::SyntheticBoundingBox(), f.w));
  } else {
    if (f.data.empty()) return absl::InvalidArgumentError("pretrain needs --data or --dptran");
    ASSIGN_OR_RETURN(const Dataset data, LoadDataset(f.data));
    grid = data.grid;
    n_time = data.n_time;
    const int i_res = std::min(f.run.pretrain_resolution, grid.depth());
    ASSIGN_OR_RETURN(const pretrain::TransitionMatrix raw,
                     pretrain::BuildTransitionMatrix(DatasetView(data), i_res));
    Rng noise(DeriveSeed(f.seed, "dptran-noise"));
    ASSIGN_OR_RETURN(tran, pretrain::PrivatizeTransition(raw, f.epsilon, noise));
    RETURN_IF_ERROR(pretrain::SaveDpTransition(tran, Join(f.out, "dptran.txt")));
  }
  if (tran.n_poi != grid.num_cells()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "transition matrix has ", tran.n_poi, " columns but the grid has ",
        grid.num_cells(), " cells (set --w)"));
  }
  ASSIGN_OR_RETURN(model::Model m,
                   model::Model::Create(SizedConfig(f, grid, n_time),
                                        DeriveSeed(f.seed, "model-init")));
  pretrain::PretrainConfig pc = f.run.pretrain;
  pc.seed = DeriveSeed(f.seed, "pretrain");
  ASSIGN_OR_RETURN(const pretrain::PretrainResult r, pretrain::Pretrain(m, tran, pc));
  RETURN_IF_ERROR(ad::SaveCheckpoint(m.ToCheckpoint(), Join(f.out, "pretrained.ckpt")));
  std::cout << "initial_kl=" << FormatDouble(r.initial_kl)
            << "\nfinal_kl=" << FormatDouble(r.final_kl) << "\n";
  return absl::OkStatus();
}

absl::Status Train(const Flags& f) {
  RETURN_IF_ERROR(MakeDir(f.out));
  ASSIGN_OR_RETURN(const Dataset data, LoadDataset(f.data));
  absl::StatusOr<model::Model> m;
  if (!f.init.empty()) {
    ASSIGN_OR_RETURN(const ad::Checkpoint ckpt, ad::LoadCheckpoint(f.init));
    m = model::Model::FromCheckpoint(ckpt);
  } else {
    m = model::Model::Create(SizedConfig(f, data.grid, data.n_time),
                             DeriveSeed(f.seed, "model-init"));
  }
  if (!m.ok()) return m.status();
  train::TrainConfig t = f.run.train;
  t.epsilon = f.epsilon;
  t.delta = f.delta;
  t.seed = DeriveSeed(f.seed, "dpsgd");
  t.threads = f.run.threads;
  ASSIGN_OR_RETURN(const train::TrainResult r, train::DpsgdTrain(*m, DatasetView(data), t));
  RETURN_IF_ERROR(ad::SaveCheckpoint(m->ToCheckpoint(), Join(f.out, "final.ckpt")));
  std::string log;
  for (const train::StepLog& s : r.log) absl::StrAppend(&log, train::FormatStepLog(s), "\n");
  RETURN_IF_ERROR(WriteFile(Join(f.out, "train_log.txt"), log));
  const std::string privacy = r.report.ToKeyValue().Format();
  RETURN_IF_ERROR(WriteFile(Join(f.out, "privacy.txt"), privacy));
  std::cout << privacy;
  return absl::OkStatus();
}

absl::Status Generate(const Flags& f) {
  ASSIGN_OR_RETURN(const ad::Checkpoint ckpt, ad::LoadCheckpoint(f.model_path));
  ASSIGN_OR_RETURN(const model::Model m, model::Model::FromCheckpoint(ckpt));
  generate::GenConfig g = f.run.generate;
  g.count = f.count < 0 ? g.count : f.count;
  g.seed = DeriveSeed(f.seed, "generate");
  g.threads = f.run.threads;
  ASSIGN_OR_RETURN(const Dataset d, generate::GenerateDataset(m, g));
  return SaveDataset(d, f.out);
}

absl::Status Evaluate(const Flags& f) {
  ASSIGN_OR_RETURN(const Dataset real, LoadDataset(f.real));
  ASSIGN_OR_RETURN(const Dataset gen, LoadDataset(f.gen));
  evaluate::EvalConfig e = f.run.evaluate;
  e.query_seed = DeriveSeed(f.seed, "eval-queries");
  ASSIGN_OR_RETURN(const evaluate::MetricReport m, evaluate::FullReport(real, gen, e));
  if (!f.out.empty()) {
    RETURN_IF_ERROR(MakeDir(f.out));
    RETURN_IF_ERROR(WriteFile(Join(f.out, "metrics.csv"),
                              absl::StrCat(m.CsvHeader(), "\n", m.CsvRow(), "\n")));
    RETURN_IF_ERROR(WriteFile(Join(f.out, "metrics.txt"), m.ToKeyValue().Format()));
  }
  std::cout << m.ToKeyValue().Format();
  return absl::OkStatus();
}

absl::Status Run(Flags& f) {
  pipeline::PipelineConfig c = f.run;
  c.data_path = f.data;
  c.epsilon_total = f.epsilon;
  c.delta = f.delta;
  c.seed = f.seed;
  c.out_dir = f.out;
  if (f.count >= 0) c.generate.count = f.count;
  ASSIGN_OR_RETURN(const pipeline::PipelineResult r, pipeline::RunPipelineFromFile(c));
  KeyValueBlock privacy = r.privacy.ToKeyValue();
  privacy.SetDouble("allocated_epsilon_sgd", r.allocation.budget.epsilon_sgd);
  std::cout << privacy.Format();
  if (r.metrics.has_value()) {
    const std::vector<std::string> names = evaluate::MetricReport::MetricNames();
    const std::vector<double> values = r.metrics->Values();
    for (size_t i = 0; i < names.size(); ++i) {
      std::cout << names[i] << "=" << FormatDouble(values[i]) << "\n";
    }
  }
  return absl::OkStatus();
}

}  // namespace

int Main(int argc, char** argv) {
  Flags f;
  f.run.generate.count = 0;  // pipeline default: as many as the real data
  CLI::App app{"Differentially private trajectory synthesis with hierarchical location encodings"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CLI::App* prep = app.add_subcommand("preprocess", "Raw GPS CSV to a discretized dataset");
  AddCommon(prep, f);
  prep->add_option("--input", f.input, "CSV with traj_id,lat,lon,unix_timestamp")
      ->required()->check(CLI::ExistingFile);
  prep->add_option("--out", f.out, "Dataset file to write")->required();
  prep->add_option("--w", f.w, "Grid width (power of two)")->capture_default_str();
  prep->add_option("--n-time", f.n_time, "Time slots per horizon")->capture_default_str();
  prep->add_option("--bbox", f.bbox, "min_lat min_lon max_lat max_lon (default: data extent)")
      ->expected(4);
  prep->add_option("--radius", f.prep.stay.radius_m, "Stay radius in meters")
      ->capture_default_str();
  prep->add_option("--min-duration", f.prep.stay.min_duration_minutes, "Minutes")
      ->capture_default_str();
  prep->add_option("--horizon-start", f.prep.horizon.start)->capture_default_str();
  prep->add_option("--horizon-end", f.prep.horizon.end)->capture_default_str();

  CLI::App* synth = app.add_subcommand("synth-data", "Random or Straight ablation dataset");
  AddCommon(synth, f);
  synth->add_option("--kind", f.kind, "random or straight")->required();
  synth->add_option("--w", f.w)->capture_default_str();
  synth->add_option("--count", f.count)->required()->check(CLI::NonNegativeNumber);
  synth->add_option("--out", f.out)->required();

  CLI::App* budget = app.add_subcommand("budget", "Split a total epsilon and plan the noise");
  AddCommon(budget, f);
  budget->add_option("--epsilon", f.epsilon)->capture_default_str();
  budget->add_option("--delta", f.delta)->capture_default_str();
  budget->add_option("--w", f.w)->capture_default_str();
  budget->add_option("--n-records", f.n_records, "Dataset size")->required();
  budget->add_option("--i-res", f.run.pretrain_resolution)->capture_default_str();
  budget->add_option("--snr-c", f.run.snr_constant)->capture_default_str();
  budget->add_option("--batch", f.run.train.expected_batch)->capture_default_str();
  budget->add_option("--epochs", f.run.train.max_epochs)->capture_default_str();

  CLI::App* pre = app.add_subcommand("pretrain", "Private transition matrix and pretraining");
  AddCommon(pre, f);
  pre->add_option("--data", f.data, "Dataset to count transitions from");
  pre->add_option("--dptran", f.dptran, "Existing private transition matrix");
  pre->add_option("--epsilon", f.epsilon, "Budget for the transition matrix")
      ->capture_default_str();
  pre->add_option("--w", f.w, "Grid width when using --dptran")->capture_default_str();
  pre->add_option("--n-time", f.n_time, "Time slots when using --dptran")
      ->capture_default_str();
  pre->add_option("--arm", f.arm)->capture_default_str();
  pre->add_option("--out", f.out, "Output directory")->required();
  AddSizeFlags(pre, f.run.sizes);
  AddPretrainFlags(pre, f);

  CLI::App* tr = app.add_subcommand("train", "DP-SGD training");
  AddCommon(tr, f);
  tr->add_option("--data", f.data)->required()->check(CLI::ExistingFile);
  tr->add_option("--init", f.init, "Checkpoint to start from");
  tr->add_option("--arm", f.arm, "Architecture when starting fresh")->capture_default_str();
  tr->add_option("--epsilon", f.epsilon, "DP-SGD budget")->capture_default_str();
  tr->add_option("--delta", f.delta)->capture_default_str();
  tr->add_option("--out", f.out, "Output directory")->required();
  AddSizeFlags(tr, f.run.sizes);
  AddTrainFlags(tr, f);

  CLI::App* gen = app.add_subcommand("generate", "Sample synthetic trajectories");
  AddCommon(gen, f);
  gen->add_option("--model", f.model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
  gen->add_option("--count", f.count)->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--out", f.out)->required();
  AddGenerateFlags(gen, f.run.generate);

  CLI::App* ev = app.add_subcommand("evaluate", "Compare a generated dataset with a real one");
  AddCommon(ev, f);
  ev->add_option("--real", f.real)->required()->check(CLI::ExistingFile);
  ev->add_option("--gen", f.gen)->required()->check(CLI::ExistingFile);
  ev->add_option("--out", f.out, "Optional output directory");
  AddEvalFlags(ev, f.run.evaluate);

  CLI::App* run = app.add_subcommand("run", "Full private pipeline");
  AddCommon(run, f);
  run->add_option("--data", f.data)->required()->check(CLI::ExistingFile);
  run->add_option("--arm", f.arm)->capture_default_str();
  run->add_option("--epsilon", f.epsilon, "Total budget")->capture_default_str();
  run->add_option("--delta", f.delta)->capture_default_str();
  run->add_option("--out", f.out, "Output directory");
  run->add_option("--count", f.count, "Trajectories to generate (0: |D|)");
  run->add_option("--evaluate", f.run.run_evaluation)->capture_default_str();
  run->add_option("--checkpoint-every", f.run.checkpoint_every)->capture_default_str();
  AddSizeFlags(run, f.run.sizes);
  AddPretrainFlags(run, f);
  AddTrainFlags(run, f);
  AddGenerateFlags(run, f.run.generate);
  AddEvalFlags(run, f.run.evaluate);

  const absl::StatusOr<std::vector<std::string>> args = ExpandConfig(argc, argv);
  if (!args.ok()) {
    std::cerr << "error: " << args.status() << "\n";
    return 2;
  }
  try {
    std::vector<std::string> reversed(args->rbegin(), args->rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  absl::Status status = ResolveEnums(f);
  if (status.ok()) {
    if (prep->parsed()) status = Preprocess(f);
    if (synth->parsed()) status = SynthData(f);
    if (budget->parsed()) status = Budget(f);
    if (pre->parsed()) status = Pretrain(f);
    if (tr->parsed()) status = Train(f);
    if (gen->parsed()) status = Generate(f);
    if (ev->parsed()) status = Evaluate(f);
    if (run->parsed()) status = Run(f);
  }
  if (!status.ok()) {
    std::cerr << "error: " << status << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hrnet::cli

int main(int argc, char** argv) { return hrnet::cli::Main(argc, argv); }
