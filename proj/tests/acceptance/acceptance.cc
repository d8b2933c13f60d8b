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

// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
//   acceptance [--only N[,N...]] [--data DIR]

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "hrnet/accountant.h"
#include "hrnet/audit.h"
#include "hrnet/autodiff/ops.h"
#include "hrnet/autodiff/tape.h"
#include "hrnet/dp.h"
#include "hrnet/evaluate.h"
#include "hrnet/generate.h"
#include "hrnet/geo.h"
#include "hrnet/key_value.h"
#include "hrnet/model.h"
#include "hrnet/pipeline.h"
#include "hrnet/preprocess.h"
#include "hrnet/pretrain.h"
#include "hrnet/rng.h"

namespace hrnet::acceptance {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_data_dir = HRNET_TEST_DATA_DIR;

geo::GridSpec Grid(int w) {
  return *geo::GridSpec::Create(preprocess::SyntheticBoundingBox(), w);
}

// 1 -------------------------------------------------------------------------

Outcome GradientCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  model::ModelConfig c;
  c.kind = model::ModelKind::kHrnet;
  c.grid = Grid(8);
  c.n_time = 4;
  c.n_dim = 8;
  c.n_hidden = 16;
  c.n_key = 8;
  c.key_hidden = 8;
  c.n_time_dim = 4;
  model::Model m = *model::Model::Create(c, 2024);
  const Trajectory traj{{9, 0}, {18, 1}, {27, 1}, {36, 3}};

  ad::ParameterSet& params = m.mutable_params();
  ad::Tape tape(&params);
  model::Graph graph(m, tape);
  const ad::GradientSet grads = *tape.Backward(graph.Loss(traj));

  // Sample (tensor, index) pairs uniformly over all scalar parameters.
  std::vector<std::pair<int, size_t>> all;
  for (int p = 0; p < params.size(); ++p) {
    for (size_t i = 0; i < params.tensor(p).size(); ++i) all.emplace_back(p, i);
  }
  Rng rng(31);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min<size_t>(all.size(), 200));

  const double h = 1e-5;
  double worst = 0.0;
  int failures = 0;
  for (const auto& [p, i] : all) {
    double& x = params.tensor(p)[i];
    const double saved = x;
    x = saved + h;
    const double up = *model::MultiresLoss(m, traj);
    x = saved - h;
    const double down = *model::MultiresLoss(m, traj);
    x = saved;
    const double numeric = (up - down) / (2 * h);
    const double analytic = grads.grads[p][i];
    const double rel = std::abs(numeric - analytic) /
                       std::max({std::abs(numeric), std::abs(analytic), 1e-5});
    worst = std::max(worst, rel);
    failures += rel >= 1e-4;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && all.size() >= 100 && secs < 60.0,
          absl::StrFormat("%d parameters, max relative error %.2e, %.1f s", all.size(),
                          worst, secs)};
}

// 2 -------------------------------------------------------------------------

Outcome DeconvExactness() {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int s = 1 << (trial % 4), n_in = dim(rng), n_out = dim(rng);
    ad::Tensor m({s, s, n_in}), k({n_out, 2, 2, n_in});
    for (double& v : m.values()) v = u(rng);
    for (double& v : k.values()) v = u(rng);
    const ad::Tensor out = *ad::QuadDeconv(m, k);
    for (int x = 0; x < s; ++x)
      for (int y = 0; y < s; ++y)
        for (int dx = 0; dx < 2; ++dx)
          for (int dy = 0; dy < 2; ++dy)
            for (int co = 0; co < n_out; ++co) {
              double acc = 0.0;
              for (int ci = 0; ci < n_in; ++ci) {
                acc += k[((co * 2 + dx) * 2 + dy) * n_in + ci] * m[(x * s + y) * n_in + ci];
              }
              const double got = out[((2 * x + dx) * 2 * s + 2 * y + dy) * n_out + co];
              worst = std::max(worst, std::abs(got - acc));
            }
  }
  return {worst <= 1e-12, absl::StrFormat("100 instances, max abs diff %.2e", worst)};
}

// 3 -------------------------------------------------------------------------

Outcome ParameterScaling() {
  auto count = [](model::ModelKind kind, int w) {
    model::ModelConfig c;
    c.kind = kind;
    c.grid = Grid(w);
    c.n_time = 24;
    c.n_dim = 16;
    c.n_hidden = 32;
    c.n_key = 16;
    c.key_hidden = 32;
    c.n_time_dim = 8;
    return static_cast<double>(model::Model::Create(c, 0)->NumParameters());
  };
  const double hr8 = count(model::ModelKind::kHrnet, 8);
  const double hr64 = count(model::ModelKind::kHrnet, 64);
  const double b8 = count(model::ModelKind::kBaseline, 8);
  const double b64 = count(model::ModelKind::kBaseline, 64);
  return {hr64 / hr8 <= 2.0 && b64 / b8 >= 15.0,
          absl::StrFormat("HRNet %.0f -> %.0f (x%.2f), baseline %.0f -> %.0f (x%.2f)", hr8,
                          hr64, hr64 / hr8, b8, b64, b64 / b8)};
}

// 4 -------------------------------------------------------------------------

Outcome SensitivityInvariant() {
  constexpr int kW = 16, kDepth = 4, kRes = 2;
  Rng rng(4);
  std::uniform_int_distribution<int> len(1, 20);
  // Narrow cell range so repeated transitions occur.
  std::uniform_int_distribution<int> cell(0, 23);
  Dataset all;
  all.grid = Grid(kW);
  all.n_time = 1;
  double worst = 0.0;
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    Trajectory t;
    const int n = len(rng);
    while (static_cast<int>(t.size()) < n) {
      const int c = cell(rng);
      if (t.empty() || t.back().cell != c) t.push_back({c, 0});
    }
    std::set<std::pair<int64_t, int>> pairs;
    for (size_t j = 0; j + 1 < t.size(); ++j) {
      const int64_t row = t[j].cell / kW, col = t[j].cell % kW;
      pairs.insert({(row >> (kDepth - kRes)) * 4 + (col >> (kDepth - kRes)), t[j + 1].cell});
    }
    const double expected = static_cast<double>(pairs.size()) / t.size();
    const double got = pretrain::TrajectoryContribution(t, kDepth, kRes);
    mismatches += got != expected || !(got < 1.0);
    worst = std::max(worst, got);

    Dataset one = all;
    one.trajectories = {t};
    const pretrain::TransitionMatrix m = *pretrain::BuildTransitionMatrix(DatasetView(one), kRes);
    const double sum = std::accumulate(m.values.begin(), m.values.end(), 0.0);
    mismatches += std::abs(sum - expected) > 1e-12;
  }
  return {mismatches == 0,
          absl::StrFormat("10000 trajectories, max contribution %.4f, %d mismatches", worst,
                          mismatches)};
}

// 5 -------------------------------------------------------------------------

Outcome LaplaceCalibration() {
  Rng rng(5);
  const std::vector<double> zeros(1000000, 0.0);
  const std::vector<double> noisy = *dp::LaplaceMechanism(zeros, 1.0, 1.0, rng);
  double mean = 0.0;
  for (const double x : noisy) mean += x;
  mean /= noisy.size();
  double var = 0.0;
  for (const double x : noisy) var += (x - mean) * (x - mean);
  var /= noisy.size() - 1;
  return {std::abs(var - 2.0) <= 0.04, absl::StrFormat("variance %.4f (target 2)", var)};
}

// 6 -------------------------------------------------------------------------

Outcome Accountant() {
  const double eps = *dp::AccountantEpsilon(1.0, 1.0, 1, 1e-5);
  const bool closed_form = std::abs(eps - 5.30) <= 0.053;
  // 100-point grid: 5 q x 5 sigma x 4 T, each probed in every direction.
  const double qs[] = {0.001, 0.01, 0.05, 0.2, 1.0};
  const double sigmas[] = {0.6, 0.9, 1.3, 2.0, 4.0};
  const int64_t steps[] = {1, 10, 100, 1000};
  int violations = 0, points = 0;
  for (const double q : qs) {
    for (const double s : sigmas) {
      for (const int64_t t : steps) {
        ++points;
        const double e = *dp::AccountantEpsilon(q, s, t, 1e-5);
        violations += *dp::AccountantEpsilon(q, s, t * 2, 1e-5) < e;
        violations += *dp::AccountantEpsilon(q, s * 1.25, t, 1e-5) > e;
        if (q < 1.0) violations += *dp::AccountantEpsilon(std::min(1.0, q * 2), s, t, 1e-5) < e;
      }
    }
  }
  return {closed_form && violations == 0 && points == 100,
          absl::StrFormat("q=1 sigma=1 T=1: eps %.4f; %d grid points, %d violations", eps,
                          points, violations)};
}

// 7 -------------------------------------------------------------------------

Outcome BudgetAllocation() {
  const dp::Allocation a = *dp::AllocateBudget(2.0, 1e-5, 32, 10000, 2, 0.018);
  const double closed = 0.018 * 32 * 32 * 16 * std::log(32.0) / 10000;
  bool ok = std::abs(a.budget.epsilon_pretrain - closed) <= 1e-6 &&
            std::abs(closed - 0.1022) < 1e-4;
  Rng rng(7);
  int inexact = 0;
  for (int i = 0; i < 10000; ++i) {
    const double eps = 0.01 + 10 * rng.Uniform();
    const int w = 1 << (1 + i % 7);
    const int64_t n = 100 + static_cast<int64_t>(rng.Uniform() * 1e6);
    const dp::Allocation b = *dp::AllocateBudget(eps, 1e-5, w, n);
    dp::PrivacyReport report;
    report.epsilon_sgd = b.budget.epsilon_sgd;
    report.epsilon_pretrain = b.budget.epsilon_pretrain;
    inexact += report.epsilon_total() != eps ||
               b.budget.epsilon_sgd + b.budget.epsilon_pretrain != eps;
  }
  ok = ok && inexact == 0;
  return {ok, absl::StrFormat("eps2 %.7f vs closed form %.7f; 10000 random splits, %d inexact",
                              a.budget.epsilon_pretrain, closed, inexact)};
}

// 8 -------------------------------------------------------------------------

// The pretraining entry point only accepts the privatized matrix.
static_assert(!std::is_invocable_v<decltype(&pretrain::Pretrain), model::Model&,
                                   const Dataset&, const pretrain::PretrainConfig&>);
static_assert(!std::is_invocable_v<decltype(&pretrain::Pretrain), model::Model&,
                                   const DatasetView&, const pretrain::PretrainConfig&>);

Outcome PretrainingIdentity() {
  const Dataset data = *preprocess::GenStraightDataset(8, 2000, 8);
  const pretrain::TransitionMatrix tran =
      *pretrain::BuildTransitionMatrix(DatasetView(data), 2);
  Rng rng(8);
  const pretrain::DpTransitionMatrix dp = *pretrain::PrivatizeTransition(tran, 1.0, rng);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> r = pretrain::SampleMixRatio(dp.num_rows(), rng);
    const std::vector<double> got = *pretrain::MixedTarget(dp, r);
    for (int c = 0; c < dp.n_poi; ++c) {
      double expected = 0.0;
      for (int l = 0; l < dp.num_rows(); ++l) expected += r[l] * dp.row(l)[c];
      worst = std::max(worst, std::abs(got[c] - expected));
    }
  }
  pipeline::PipelineConfig c;
  c.arm = model::Arm::kFull;
  c.epsilon_total = 4.0;
  c.sizes = {.n_dim = 8, .n_hidden = 16, .n_key = 8, .key_hidden = 16, .n_time_dim = 4};
  c.pretrain.steps = 20;
  c.train.max_epochs = 1;
  c.generate.count = 100;
  c.run_evaluation = false;
  const auto run = pipeline::RunPipeline(data, c);
  const int64_t pretrain_reads = run.ok() ? run->reads.at("pretrain") : -1;
  return {worst <= 1e-12 && pretrain_reads == 0,
          absl::StrFormat("1000 mixes, max diff %.2e; raw reads during pretraining: %d", worst,
                          pretrain_reads)};
}

// 9 -------------------------------------------------------------------------

// Exhaustive minimum over injective POI -> cell maps, enumerated as ordered
// choices of distinct cells with a running partial sum.
double BruteForce(const std::vector<double>& cost, int rows, int cols) {
  double best = kInf;
  std::vector<bool> used(cols, false);
  std::function<void(int, double)> go = [&](int r, double acc) {
    if (acc >= best) return;
    if (r == rows) {
      best = acc;
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = true;
      go(r + 1, acc + cost[r * cols + c]);
      used[c] = false;
    }
  };
  go(0, 0.0);
  return best;
}

Outcome LinearAssignment() {
  const geo::GridSpec grid = Grid(4);
  const geo::BoundingBox box = grid.bbox();
  Rng rng(9);
  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    std::vector<geo::LatLng> pois;
    for (int i = 0; i < n; ++i) {
      pois.push_back({box.min_lat + rng.Uniform() * (box.max_lat - box.min_lat),
                      box.min_lng + rng.Uniform() * (box.max_lng - box.min_lng)});
    }
    // Integer meters keep every total exactly representable.
    std::vector<double> cost(n * 16);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 16; ++c) {
        cost[i * 16 + c] =
            std::round(geo::DistanceMeters(pois[i], *geo::CellCenter(grid, geo::CellId(c, 2))));
      }
    }
    const geo::Assignment a = *geo::SolveLinearAssignment(cost, n, 16);
    mismatches += a.total_cost != BruteForce(cost, n, 16);

    const geo::PoiAssignment pa = *geo::AssignScatteredPois(pois, grid);
    std::vector<double> exact(n * 16);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 16; ++c) {
        exact[i * 16 + c] =
            geo::DistanceMeters(pois[i], *geo::CellCenter(grid, geo::CellId(c, 2)));
      }
    }
    worst = std::max(worst, std::abs(pa.total_cost - BruteForce(exact, n, 16)));
  }
  return {mismatches == 0 && worst <= 1e-6,
          absl::StrFormat("100 instances (1-8 POIs, 16 cells): %d integer-cost mismatches, "
                          "max metric-cost diff %.2e m",
                          mismatches, worst)};
}

// 10 ------------------------------------------------------------------------

Outcome MetricOracle() {
  const std::string dir = g_data_dir + "/";
  const auto real = LoadDataset(dir + "toy_real.txt");
  const auto gen = LoadDataset(dir + "toy_gen.txt");
  const auto queries = ReadFile(dir + "toy_density_queries.txt");
  if (!real.ok() || !gen.ok() || !queries.ok()) return {false, "toy pair not found"};
  const evaluate::EvalConfig config;
  evaluate::QuerySet qs = *evaluate::BuildQuerySet(*real, config);
  qs.density_queries = *evaluate::ParseCellLists(*queries);
  const evaluate::MetricReport r = *evaluate::FullReport(*real, *gen, config, &qs);
  // Frozen output of tests/oracles/metrics_oracle.py.
  const double oracle[] = {0.348082081578679,   0.8550727161601975,  0.6098169311626218,
                           0.28954310545973616, 0.2964572637480926,  0.35935597413326764,
                           0.6623884024210223,  0.37471139971139966, 0.24307692307692277};
  const std::vector<double> got = r.Values();
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - oracle[i]));
  const evaluate::MetricReport self = *evaluate::FullReport(*real, *real, config, &qs);
  double self_max = 0.0;
  for (const double v : self.Values()) self_max = std::max(self_max, std::abs(v));
  return {worst <= 1e-9 && self_max == 0.0,
          absl::StrFormat("9 metrics, max diff %.2e; self-comparison max %.1f", worst,
                          self_max)};
}

// 11 ------------------------------------------------------------------------

pipeline::PipelineConfig ArmConfig(model::Arm arm, uint64_t seed) {
  pipeline::PipelineConfig c;
  c.arm = arm;
  c.epsilon_total = 2.0;
  c.delta = 1e-5;
  c.seed = seed;
  c.sizes = {.n_dim = 16, .n_hidden = 32, .n_key = 16, .key_hidden = 32, .n_time_dim = 8};
  c.pretrain.steps = 1000;
  c.train.expected_batch = 256;
  c.train.max_epochs = 5;
  c.generate.count = 0;
  return c;
}

Outcome EndToEnd() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kSeeds = 5;
  int full_wins = 0, pretrain_wins = 0, multitask_hurts = 0;
  std::string trace;
  for (int s = 0; s < kSeeds; ++s) {
    const uint64_t seed = 100 + s;
    const Dataset straight = *preprocess::GenStraightDataset(16, 10000, seed);
    const Dataset random = *preprocess::GenRandomDataset(16, 10000, seed);
    auto metrics = [&](const Dataset& d, model::Arm arm) {
      const auto r = pipeline::RunPipeline(d, ArmConfig(arm, seed));
      if (!r.ok()) {
        std::fprintf(stderr, "  %s: %s\n", std::string(model::ArmName(arm)).c_str(),
                     r.status().ToString().c_str());
        return evaluate::MetricReport{.waypoint = kInf, .destination = kInf, .transition = kInf};
      }
      return *r->metrics;
    };
    const auto full = metrics(straight, model::Arm::kFull);
    const auto base = metrics(straight, model::Arm::kBaseline);
    const auto dpre = metrics(straight, model::Arm::kDeconvPretrain);
    const auto dec = metrics(straight, model::Arm::kDeconv);
    const auto rmt = metrics(random, model::Arm::kDeconvMultitask);
    const auto rdec = metrics(random, model::Arm::kDeconv);
    full_wins += full.transition < base.transition;
    pretrain_wins += dpre.destination < dec.destination;
    multitask_hurts += rmt.transition >= rdec.transition;
    const std::string line = absl::StrFormat(
        "seed %d: transition full %.4f baseline %.4f | destination deconv+pretrain %.4f "
        "deconv %.4f | random transition deconv+multitask %.4f deconv %.4f",
        seed, full.transition, base.transition, dpre.destination, dec.destination,
        rmt.transition, rdec.transition);
    std::fprintf(stderr, "  %s\n", line.c_str());
  }
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60;
  return {full_wins >= 4 && pretrain_wins >= 4 && multitask_hurts >= 4 && minutes <= 30,
          absl::StrFormat("(a) %d/5 (b) %d/5 (c) %d/5 seeds, %.1f min", full_wins,
                          pretrain_wins, multitask_hurts, minutes)};
}

// 12 ------------------------------------------------------------------------

Outcome GenerationValidity() {
  const Dataset data = *preprocess::GenStraightDataset(8, 1000, 12);
  pipeline::PipelineConfig c;
  c.arm = model::Arm::kFull;
  c.sizes = {.n_dim = 8, .n_hidden = 16, .n_key = 8, .key_hidden = 16, .n_time_dim = 4};
  c.pretrain.steps = 50;
  c.train.max_epochs = 1;
  c.generate.count = 10000;
  c.generate.max_length = 20;
  c.run_evaluation = false;
  const auto trained = pipeline::RunPipeline(data, c);
  if (!trained.ok()) return {false, trained.status().ToString()};

  // An untrained model spreads mass everywhere, which exercises the masks.
  model::ModelConfig mc = model::ConfigForArm(model::Arm::kFull, Grid(8), 6);
  mc.n_dim = 8;
  mc.n_hidden = 16;
  mc.n_key = 8;
  mc.key_hidden = 16;
  mc.n_time_dim = 4;
  const model::Model fresh = *model::Model::Create(mc, 12);
  generate::GenConfig gc;
  gc.count = 10000;
  gc.seed = 12;
  const Dataset untrained = *generate::GenerateDataset(fresh, gc);

  int violations = 0;
  size_t longest = 0;
  for (const Dataset* d : {&trained->synthetic, &untrained}) {
    for (const Trajectory& t : d->trajectories) {
      violations += !ValidateTrajectory(t, d->grid.num_cells(), d->n_time).ok() ||
                    t.size() > 20;
      longest = std::max(longest, t.size());
    }
  }
  const size_t total = trained->synthetic.size() + untrained.size();
  return {violations == 0 && total == 20000,
          absl::StrFormat("%d samples (trained and untrained models), %d violations, longest %d",
                          total, violations, longest)};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "gradient correctness", GradientCorrectness},
    {2, "deconvolution exactness", DeconvExactness},
    {3, "parameter scaling", ParameterScaling},
    {4, "transition sensitivity", SensitivityInvariant},
    {5, "Laplace calibration", LaplaceCalibration},
    {6, "RDP accountant", Accountant},
    {7, "budget allocation", BudgetAllocation},
    {8, "pretraining identity and isolation", PretrainingIdentity},
    {9, "linear assignment", LinearAssignment},
    {10, "metric oracle", MetricOracle},
    {11, "end-to-end ablation ordering", EndToEnd},
    {12, "generation validity", GenerationValidity},
};

}  // namespace

int Main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      for (absl::string_view part : absl::StrSplit(argv[++i], ',')) {
        int id;
        if (!absl::SimpleAtoi(part, &id)) {
          std::fprintf(stderr, "bad criterion id '%s'\n", std::string(part).c_str());
          return 2;
        }
        only.insert(id);
      }
    } else if (arg == "--data" && i + 1 < argc) {
      g_data_dir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only N[,N...]] [--data DIR]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const Outcome o = c.run();
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace hrnet::acceptance

int main(int argc, char** argv) { return hrnet::acceptance::Main(argc, argv); }
