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

#ifndef HRNET_ACCOUNTANT_H_
#define HRNET_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace hrnet::dp {

// Renyi orders 1.25, 1.5, ..., 64.
std::span<const double> RdpOrders();

// Renyi divergence of order alpha for one step of the Poisson-subsampled
// Gaussian mechanism with sampling rate q and noise multiplier sigma.
// Returns +infinity when sigma is 0 or the fractional-order series fails to
// converge.
double SubsampledGaussianRdp(double q, double sigma, double alpha);

// Accumulated RDP curve over RdpOrders().
class RdpAccountant {
 public:
  RdpAccountant();

  // Records `steps` applications of the subsampled Gaussian mechanism.
  void Compose(double q, double sigma, int64_t steps = 1);

  // min over orders of rdp(alpha) + ln(1/delta) / (alpha - 1).
  double Epsilon(double delta) const;

  std::span<const double> rdp() const { return rdp_; }
  int64_t steps() const { return steps_; }

 private:
  std::vector<double> rdp_;
  int64_t steps_ = 0;
};

// Epsilon after `steps` steps at rate q and multiplier sigma. sigma = 0
// yields +infinity.
absl::StatusOr<double> AccountantEpsilon(double q, double sigma, int64_t steps,
                                         double delta);

}  // namespace hrnet::dp

#endif  // HRNET_ACCOUNTANT_H_
