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

#ifndef HRNET_AUTODIFF_OPS_H_
#define HRNET_AUTODIFF_OPS_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "hrnet/autodiff/tensor.h"

namespace hrnet::ad {

// Raw numeric kernels shared by the tape and by forward-only evaluation.
// Sizes are trusted; callers validate shapes.
namespace kernels {

// Numerically stable softmax (max subtraction).
void Softmax(std::span<const double> logits, std::span<double> out);
double LogSumExp(std::span<const double> logits);

// in: (side, side, n_in); kernel: (n_out, 2, 2, n_in); out: (2 side, 2 side,
// n_out) with out[2x+dx, 2y+dy, k] = sum_k' kernel[k, dx, dy, k'] in[x, y, k'].
void QuadDeconvForward(std::span<const double> in, int side, int n_in,
                       std::span<const double> kernel, int n_out,
                       std::span<double> out);
// Accumulates into grad_in and grad_kernel (either may be empty to skip).
void QuadDeconvBackward(std::span<const double> in, int side, int n_in,
                        std::span<const double> kernel, int n_out,
                        std::span<const double> grad_out,
                        std::span<double> grad_in,
                        std::span<double> grad_kernel);

// GRU cell with gate blocks ordered [reset; update; candidate]:
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
// `saved` (4 * hidden) receives r, z, n and W_hn h + b_hn for the backward.
void GruForward(std::span<const double> h, std::span<const double> x,
                std::span<const double> w_ih, std::span<const double> w_hh,
                std::span<const double> b_ih, std::span<const double> b_hh,
                int hidden, int input, std::span<double> out,
                std::span<double> saved);
struct GruGrads {
  std::span<double> h, x, w_ih, w_hh, b_ih, b_hh;  // empty spans are skipped
};
void GruBackward(std::span<const double> h, std::span<const double> x,
                 std::span<const double> w_ih, std::span<const double> w_hh,
                 int hidden, int input, std::span<const double> saved,
                 std::span<const double> grad_out, const GruGrads& grads);

}  // namespace kernels

// Shape-checked standalone operators.

// M: (s, s, n_dim), kernel: (n_dim_out, 2, 2, n_dim) -> (2s, 2s, n_dim_out).
absl::StatusOr<Tensor> QuadDeconv(const Tensor& m, const Tensor& kernel);

struct GruWeights {
  Tensor w_ih;  // (3 hidden, input)
  Tensor w_hh;  // (3 hidden, hidden)
  Tensor b_ih;  // (3 hidden)
  Tensor b_hh;  // (3 hidden)
};
absl::StatusOr<Tensor> GruCell(const Tensor& h_prev, const Tensor& x,
                               const GruWeights& weights);

std::vector<double> Softmax(std::span<const double> logits);

// -log softmax(logits)[target].
absl::StatusOr<double> CrossEntropy(std::span<const double> logits, int target);

// sum p log(p / q) with 0 log 0 = 0. Both inputs must be distributions
// (nonnegative, summing to 1 within 1e-9). Returns +infinity when q has a
// zero where p is positive.
absl::StatusOr<double> KlDivergence(std::span<const double> p,
                                    std::span<const double> q);

}  // namespace hrnet::ad

#endif  // HRNET_AUTODIFF_OPS_H_
