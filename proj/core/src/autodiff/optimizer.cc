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

#include "hrnet/autodiff/optimizer.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace hrnet::ad {
namespace {

absl::Status CheckLayout(const ParameterSet& params, const GradientSet& grads) {
  if (static_cast<int>(grads.grads.size()) != params.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "gradient set has ", grads.grads.size(), " tensors for ", params.size(),
        " parameters"));
  }
  for (int p = 0; p < params.size(); ++p) {
    if (grads.grads[p].size() != params.tensor(p).size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("gradient size mismatch for ", params.name(p)));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status SgdStep(ParameterSet& params, const GradientSet& grads,
                     double learning_rate) {
  if (absl::Status s = CheckLayout(params, grads); !s.ok()) return s;
  for (int p = 0; p < params.size(); ++p) {
    auto dst = params.tensor(p).values();
    const auto g = grads.grads[p].values();
    for (size_t i = 0; i < dst.size(); ++i) dst[i] -= learning_rate * g[i];
  }
  return absl::OkStatus();
}

absl::Status Adam::Step(ParameterSet& params, const GradientSet& grads) {
  if (absl::Status s = CheckLayout(params, grads); !s.ok()) return s;
  if (t_ == 0) {
    m_ = GradientSet::ZerosLike(params).grads;
    v_ = m_;
  } else if (static_cast<int>(m_.size()) != params.size()) {
    return absl::FailedPreconditionError("parameter layout changed between steps");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (int p = 0; p < params.size(); ++p) {
    auto dst = params.tensor(p).values();
    auto m = m_[p].values();
    auto v = v_[p].values();
    const auto g = grads.grads[p].values();
    for (size_t i = 0; i < dst.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      dst[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
  return absl::OkStatus();
}

std::string OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

absl::StatusOr<OptimizerKind> ParseOptimizer(absl::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown optimizer '", name, "' (expected sgd or adam)"));
}

}  // namespace hrnet::ad
