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

#ifndef HRNET_DP_H_
#define HRNET_DP_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "hrnet/autodiff/tensor.h"
#include "hrnet/key_value.h"
#include "hrnet/rng.h"

namespace hrnet::dp {

// One draw from Laplace(0, scale) by inverse CDF.
double SampleLaplace(double scale, Rng& rng);

// Adds i.i.d. Laplace(sensitivity / epsilon) noise to every value.
absl::StatusOr<std::vector<double>> LaplaceMechanism(
    std::span<const double> values, double sensitivity, double epsilon, Rng& rng);

// Rescales `grads` in place to L2 norm at most clip_norm (which may be
// +infinity) and returns the norm before clipping.
double ClipToNorm(ad::GradientSet& grads, double clip_norm);

// Adds N(0, stddev^2) to every coordinate.
void AddGaussianNoise(ad::GradientSet& grads, double stddev, Rng& rng);

// Clips each example's gradient to clip_norm, sums, divides by batch_size and
// adds Gaussian noise of standard deviation sigma * clip_norm / batch_size
// per coordinate. batch_size is the normalizer, which for Poisson sampling is
// the expected batch size rather than the realized one. With sigma = 0 the
// result is the plain clipped mean and the rng is not advanced.
absl::StatusOr<ad::GradientSet> ClipAndNoise(
    std::span<const ad::GradientSet> per_example, double clip_norm, double sigma,
    double batch_size, Rng& rng);

// (epsilon_sgd, delta) for DP-SGD plus epsilon_pretrain for the noised
// transition matrix. The two phases compose to
// (epsilon_sgd + epsilon_pretrain, delta).
struct PrivacyBudget {
  double epsilon_total = 0.0;
  double epsilon_sgd = 0.0;
  double epsilon_pretrain = 0.0;
  double delta = 0.0;
};

struct Allocation {
  PrivacyBudget budget;
  // Set when the pretraining share consumed the whole budget, leaving
  // nothing for DP-SGD; training must then be skipped.
  bool sgd_skipped = false;
};

inline constexpr double kDefaultSnrConstant = 0.018;
inline constexpr int kDefaultPretrainResolution = 2;

// epsilon_pretrain = min(c * w^2 * 4^i_res * ln(w) / |D|, epsilon_total),
// epsilon_sgd = epsilon_total - epsilon_pretrain, adjusted by at most a few
// ulps so that the two shares sum to epsilon_total exactly.
absl::StatusOr<Allocation> AllocateBudget(
    double epsilon_total, double delta, int w, int64_t dataset_size,
    int i_res = kDefaultPretrainResolution, double c = kDefaultSnrConstant);

// Budget in which one phase receives everything.
PrivacyBudget SgdOnlyBudget(double epsilon_total, double delta);

struct PrivacyReport {
  double epsilon_sgd = 0.0;       // spent by DP-SGD
  double epsilon_pretrain = 0.0;  // spent on the transition matrix
  double delta = 0.0;
  double sigma = 0.0;
  double clip_norm = 0.0;
  int64_t steps = 0;
  double sampling_rate = 0.0;

  double epsilon_total() const { return epsilon_sgd + epsilon_pretrain; }
  KeyValueBlock ToKeyValue() const;
};

// The composed guarantee of the two phases.
struct Guarantee {
  double epsilon = 0.0;
  double delta = 0.0;
};
Guarantee TotalPrivacy(double epsilon_sgd, double epsilon_pretrain, double delta);

}  // namespace hrnet::dp

#endif  // HRNET_DP_H_
