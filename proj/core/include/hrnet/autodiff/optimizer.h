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

#ifndef HRNET_AUTODIFF_OPTIMIZER_H_
#define HRNET_AUTODIFF_OPTIMIZER_H_

#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "hrnet/autodiff/tensor.h"

namespace hrnet::ad {

// params -= lr * grads.
absl::Status SgdStep(ParameterSet& params, const GradientSet& grads,
                     double learning_rate);

// Adam with bias correction. State is sized lazily on the first step and is
// tied to the parameter layout seen then.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  absl::Status Step(ParameterSet& params, const GradientSet& grads);
  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

enum class OptimizerKind { kSgd, kAdam };

std::string OptimizerName(OptimizerKind kind);
absl::StatusOr<OptimizerKind> ParseOptimizer(absl::string_view name);

// Either update rule behind one interface.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate)
      : kind_(kind), learning_rate_(learning_rate), adam_(learning_rate) {}

  absl::Status Step(ParameterSet& params, const GradientSet& grads) {
    return kind_ == OptimizerKind::kAdam ? adam_.Step(params, grads)
                                         : SgdStep(params, grads, learning_rate_);
  }

 private:
  OptimizerKind kind_;
  double learning_rate_;
  Adam adam_;
};

}  // namespace hrnet::ad

#endif  // HRNET_AUTODIFF_OPTIMIZER_H_
