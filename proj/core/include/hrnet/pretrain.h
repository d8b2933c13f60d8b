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

#ifndef HRNET_PRETRAIN_H_
#define HRNET_PRETRAIN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hrnet/audit.h"
#include "hrnet/autodiff/optimizer.h"
#include "hrnet/model.h"
#include "hrnet/rng.h"

namespace hrnet::pretrain {

// Coarse-region -> finest-cell first-order transition weights. Each
// trajectory v adds 1/|v| to entry (up(a), b) for every distinct step a -> b
// it contains, so one trajectory contributes less than 1 in total.
struct TransitionMatrix {
  int i_res = 0;
  int n_poi = 0;
  std::vector<double> values;  // row-major (4^i_res, n_poi)

  int rows() const { return 1 << (2 * i_res); }
  std::span<const double> row(int r) const {
    return std::span(values).subspan(static_cast<size_t>(r) * n_poi, n_poi);
  }
};

absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(const DatasetView& data,
                                                       int i_res);

// The total weight a single trajectory adds to the matrix.
double TrajectoryContribution(const Trajectory& trajectory, int depth, int i_res);

inline constexpr double kSmoothing = 1e-4;

// Laplace-noised transition matrix and its post-processed rows.
struct DpTransitionMatrix {
  int i_res = 0;
  int n_poi = 0;
  double epsilon = 0.0;
  double smoothing = kSmoothing;
  std::vector<double> noised;  // raw matrix plus Laplace(1/epsilon) noise
  std::vector<double> rows;    // clamp at 0, add smoothing, normalize rows

  int num_rows() const { return 1 << (2 * i_res); }
  std::span<const double> row(int r) const {
    return std::span(rows).subspan(static_cast<size_t>(r) * n_poi, n_poi);
  }
};

absl::StatusOr<DpTransitionMatrix> PrivatizeTransition(const TransitionMatrix& tran,
                                                       double epsilon, Rng& rng);

// Recomputes `rows` from `noised`.
void PostProcess(DpTransitionMatrix& m);

// Text file: key=value header (i_res, n_poi, epsilon, smoothing), "---", then
// one line per row of noised values. Rows are recomputed on load.
std::string FormatDpTransition(const DpTransitionMatrix& m);
absl::StatusOr<DpTransitionMatrix> ParseDpTransition(absl::string_view text);
absl::Status SaveDpTransition(const DpTransitionMatrix& m, const std::string& path);
absl::StatusOr<DpTransitionMatrix> LoadDpTransition(const std::string& path);

// sum_l r_l * row_l.
absl::StatusOr<std::vector<double>> MixedTarget(const DpTransitionMatrix& m,
                                                std::span<const double> r);

// sum_l r_l * hiencode_{i_res}(l).
absl::StatusOr<std::vector<double>> MixedInput(const model::Model& model,
                                               std::span<const double> r, int i_res);

// Dirichlet(1, ..., 1) sample of the given length.
std::vector<double> SampleMixRatio(int length, Rng& rng);

struct PretrainConfig {
  int steps = 3000;
  int batch = 32;
  ad::OptimizerKind optimizer = ad::OptimizerKind::kAdam;
  double learning_rate = 0.01;
  uint64_t seed = 0;
};

struct PretrainResult {
  // Mean KL(row_l || model) over all one-hot mixing vectors, before and
  // after training.
  double initial_kl = 0.0;
  double final_kl = 0.0;
  std::vector<double> loss_trace;  // mean batch KL per step
};

// Trains the encoding and scoring path of `model` (root vector, deconvolution
// kernels, query and key networks; for the baseline, the POI scoring head)
// against Dirichlet-mixed rows of `tran` through a temporary one-layer tanh
// network standing in for the GRU. The temporary network is discarded. The
// matrix is already private, so this is post-processing. No dataset is consulted.
absl::StatusOr<PretrainResult> Pretrain(model::Model& model,
                                        const DpTransitionMatrix& tran,
                                        const PretrainConfig& config);

}  // namespace hrnet::pretrain

#endif  // HRNET_PRETRAIN_H_
