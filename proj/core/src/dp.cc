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

#include "hrnet/dp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace hrnet::dp {

double SampleLaplace(double scale, Rng& rng) {
  const double u = rng.UniformOpen() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0 ? -magnitude : magnitude;
}

absl::StatusOr<std::vector<double>> LaplaceMechanism(
    std::span<const double> values, double sensitivity, double epsilon, Rng& rng) {
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("Laplace epsilon must be > 0, got ", epsilon));
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError("Laplace sensitivity must be positive and finite");
  }
  const double scale = sensitivity / epsilon;
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v += SampleLaplace(scale, rng);
  return out;
}

double ClipToNorm(ad::GradientSet& grads, double clip_norm) {
  const double norm = grads.Norm();
  if (norm > clip_norm) grads.Scale(clip_norm / norm);
  return norm;
}

void AddGaussianNoise(ad::GradientSet& grads, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (ad::Tensor& t : grads.grads) {
    for (double& v : t.values()) v += normal(rng);
  }
}

absl::StatusOr<ad::GradientSet> ClipAndNoise(
    std::span<const ad::GradientSet> per_example, double clip_norm, double sigma,
    double batch_size, Rng& rng) {
  if (!(clip_norm > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("clip norm must be > 0, got ", clip_norm));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError("noise multiplier must be finite and >= 0");
  }
  if (sigma > 0.0 && std::isinf(clip_norm)) {
    return absl::InvalidArgumentError("noise requires a finite clip norm");
  }
  if (!(batch_size > 0.0)) {
    return absl::InvalidArgumentError("batch size must be > 0");
  }
  if (per_example.empty()) {
    return absl::InvalidArgumentError("no per-example gradients to aggregate");
  }
  ad::GradientSet total;
  total.grads = per_example.front().grads;
  for (ad::Tensor& t : total.grads) {
    for (double& v : t.values()) v = 0.0;
  }
  for (const ad::GradientSet& g : per_example) {
    const double norm = g.Norm();
    const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
    total.AddScaled(g, factor);
  }
  total.Scale(1.0 / batch_size);
  if (sigma > 0.0) AddGaussianNoise(total, sigma * clip_norm / batch_size, rng);
  return total;
}

namespace {

// Searches a few ulps around (first, second) for a pair whose floating-point
// sum is exactly `total`. Round-half-even ties can make every neighbor of
// `first` miss, in which case `second` shrinks by one ulp (it stays within
// its formula bound) and the search repeats.
void ExactSplit(double total, double& first, double& second) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 64; ++outer) {
    double down = first, up = first;
    for (int i = 0; i < 16; ++i) {
      if (down + second == total) {
        first = down;
        return;
      }
      if (up + second == total) {
        first = up;
        return;
      }
      down = std::nextafter(down, -kInf);
      up = std::nextafter(up, kInf);
    }
    second = std::max(0.0, std::nextafter(second, -kInf));
    first = total - second;
  }
}

}  // namespace

absl::StatusOr<Allocation> AllocateBudget(double epsilon_total, double delta,
                                          int w, int64_t dataset_size, int i_res,
                                          double c) {
  if (!(epsilon_total > 0.0) || !std::isfinite(epsilon_total)) {
    return absl::InvalidArgumentError("total epsilon must be positive and finite");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1]");
  }
  if (w < 1 || dataset_size < 1 || i_res < 0 || !(c > 0.0)) {
    return absl::InvalidArgumentError(
        "budget allocation needs w >= 1, |D| >= 1, i_res >= 0 and c > 0");
  }
  const double w2 = static_cast<double>(w) * w;
  const double formula = c * w2 * std::pow(4.0, i_res) * std::log(static_cast<double>(w)) /
                         static_cast<double>(dataset_size);
  Allocation out;
  PrivacyBudget& b = out.budget;
  b.epsilon_total = epsilon_total;
  b.delta = delta;
  b.epsilon_pretrain = std::min(formula, epsilon_total);
  b.epsilon_sgd = epsilon_total - b.epsilon_pretrain;
  if (b.epsilon_sgd + b.epsilon_pretrain != epsilon_total) {
    ExactSplit(epsilon_total, b.epsilon_sgd, b.epsilon_pretrain);
  }
  out.sgd_skipped = !(b.epsilon_sgd > 0.0);
  return out;
}

PrivacyBudget SgdOnlyBudget(double epsilon_total, double delta) {
  return PrivacyBudget{epsilon_total, epsilon_total, 0.0, delta};
}

KeyValueBlock PrivacyReport::ToKeyValue() const {
  KeyValueBlock kv;
  kv.SetDouble("epsilon_total", epsilon_total());
  kv.SetDouble("epsilon_sgd", epsilon_sgd);
  kv.SetDouble("epsilon_pretrain", epsilon_pretrain);
  kv.SetDouble("delta", delta);
  kv.SetDouble("sigma", sigma);
  kv.SetDouble("clip_norm", clip_norm);
  kv.SetInt("steps", steps);
  kv.SetDouble("sampling_rate", sampling_rate);
  kv.Set("accountant", "rdp");
  return kv;
}

Guarantee TotalPrivacy(double epsilon_sgd, double epsilon_pretrain, double delta) {
  return Guarantee{epsilon_sgd + epsilon_pretrain, delta};
}

}  // namespace hrnet::dp
