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

#include "hrnet/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"

namespace hrnet::dp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxFracTerms = 1000;

std::vector<double> MakeOrders() {
  std::vector<double> orders;
  for (int i = 5; i <= 256; ++i) orders.push_back(0.25 * i);
  return orders;
}

double LogAdd(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log |binom(n, k)| for real n.
double LogComb(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double LogErfc(double x) {
  const double r = std::erfc(x);
  if (r > 0.0) return std::log(r);
  // Asymptotic expansion of log erfc at +infinity.
  const double x2 = x * x;
  return -0.5 * std::log(M_PI) - std::log(x) - x2 - 0.5 / x2 +
         0.625 / (x2 * x2) - 37.0 / 24.0 / (x2 * x2 * x2) +
         353.0 / 64.0 / (x2 * x2 * x2 * x2);
}

double LogAInt(double q, double sigma, int alpha) {
  double log_a = -kInf;
  const double log_q = std::log(q), log_1mq = std::log1p(-q);
  for (int i = 0; i <= alpha; ++i) {
    const double term = LogComb(alpha, i) + i * log_q + (alpha - i) * log_1mq +
                        (static_cast<double>(i) * i - i) / (2 * sigma * sigma);
    log_a = LogAdd(log_a, term);
  }
  return log_a;
}

// Splits the integral at z0 and sums both tails as series in i.
double LogAFrac(double q, double sigma, double alpha) {
  double log_a0 = -kInf, log_a1 = -kInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double log_q = std::log(q), log_1mq = std::log1p(-q);
  double last_s0 = -kInf, last_s1 = -kInf;
  for (int i = 0; i < kMaxFracTerms; ++i) {
    const double log_coef = LogComb(alpha, i);
    const double j = alpha - i;
    const double log_t0 = log_coef + i * log_q + j * log_1mq;
    const double log_t1 = log_coef + j * log_q + i * log_1mq;
    const double log_e0 = std::log(0.5) + LogErfc((i - z0) / (M_SQRT2 * sigma));
    const double log_e1 = std::log(0.5) + LogErfc((z0 - j) / (M_SQRT2 * sigma));
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / (2 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2 * sigma * sigma) + log_e1;
    log_a0 = LogAdd(log_a0, log_s0);
    log_a1 = LogAdd(log_a1, log_s1);
    const double total = LogAdd(log_a0, log_a1);
    if (log_s0 < last_s0 && log_s1 < last_s1 &&
        std::max(log_s0, log_s1) < total - 30) {
      return total;
    }
    last_s0 = log_s0;
    last_s1 = log_s1;
  }
  return kInf;
}

}  // namespace

std::span<const double> RdpOrders() {
  static const std::vector<double> orders = MakeOrders();
  return orders;
}

double SubsampledGaussianRdp(double q, double sigma, double alpha) {
  if (q == 0.0) return 0.0;
  if (sigma == 0.0) return kInf;
  if (q == 1.0) return alpha / (2 * sigma * sigma);
  if (std::isinf(alpha)) return kInf;
  const double log_a = alpha == std::floor(alpha)
                           ? LogAInt(q, sigma, static_cast<int>(alpha))
                           : LogAFrac(q, sigma, alpha);
  return log_a / (alpha - 1);
}

RdpAccountant::RdpAccountant() : rdp_(RdpOrders().size(), 0.0) {}

void RdpAccountant::Compose(double q, double sigma, int64_t steps) {
  if (steps <= 0) return;
  const auto orders = RdpOrders();
  for (size_t i = 0; i < orders.size(); ++i) {
    rdp_[i] += static_cast<double>(steps) * SubsampledGaussianRdp(q, sigma, orders[i]);
  }
  steps_ += steps;
}

double RdpAccountant::Epsilon(double delta) const {
  const auto orders = RdpOrders();
  const double log_inv_delta = -std::log(delta);
  double best = kInf;
  for (size_t i = 0; i < orders.size(); ++i) {
    best = std::min(best, rdp_[i] + log_inv_delta / (orders[i] - 1));
  }
  return std::max(best, 0.0);
}

absl::StatusOr<double> AccountantEpsilon(double q, double sigma, int64_t steps,
                                         double delta) {
  if (!(q >= 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError("sampling rate must lie in [0, 1]");
  }
  if (!(sigma >= 0.0)) return absl::InvalidArgumentError("sigma must be >= 0");
  if (steps < 0) return absl::InvalidArgumentError("steps must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (steps == 0 || q == 0.0) return 0.0;
  RdpAccountant accountant;
  accountant.Compose(q, sigma, steps);
  return accountant.Epsilon(delta);
}

}  // namespace hrnet::dp
