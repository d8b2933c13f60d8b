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

#include "hrnet/autodiff/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace hrnet::ad {
namespace kernels {

void Softmax(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (size_t i = 0; i < logits.size(); ++i) out[i] *= inv;
}

double LogSumExp(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (const double z : logits) total += std::exp(z - m);
  return m + std::log(total);
}

void QuadDeconvForward(std::span<const double> in, int side, int n_in,
                       std::span<const double> kernel, int n_out,
                       std::span<double> out) {
  const int out_side = 2 * side;
  for (int x = 0; x < side; ++x) {
    for (int y = 0; y < side; ++y) {
      const double* src = in.data() + (static_cast<size_t>(x) * side + y) * n_in;
      for (int dx = 0; dx < 2; ++dx) {
        for (int dy = 0; dy < 2; ++dy) {
          double* dst = out.data() +
                        (static_cast<size_t>(2 * x + dx) * out_side + (2 * y + dy)) * n_out;
          for (int k = 0; k < n_out; ++k) {
            const double* w = kernel.data() + ((static_cast<size_t>(k) * 2 + dx) * 2 + dy) * n_in;
            double acc = 0.0;
            for (int kp = 0; kp < n_in; ++kp) acc += w[kp] * src[kp];
            dst[k] = acc;
          }
        }
      }
    }
  }
}

void QuadDeconvBackward(std::span<const double> in, int side, int n_in,
                        std::span<const double> kernel, int n_out,
                        std::span<const double> grad_out,
                        std::span<double> grad_in,
                        std::span<double> grad_kernel) {
  const int out_side = 2 * side;
  for (int x = 0; x < side; ++x) {
    for (int y = 0; y < side; ++y) {
      const size_t cell = static_cast<size_t>(x) * side + y;
      const double* src = in.data() + cell * n_in;
      for (int dx = 0; dx < 2; ++dx) {
        for (int dy = 0; dy < 2; ++dy) {
          const double* g = grad_out.data() +
                            (static_cast<size_t>(2 * x + dx) * out_side + (2 * y + dy)) * n_out;
          for (int k = 0; k < n_out; ++k) {
            const double gk = g[k];
            if (gk == 0.0) continue;
            const size_t w_off = ((static_cast<size_t>(k) * 2 + dx) * 2 + dy) * n_in;
            if (!grad_in.empty()) {
              double* gi = grad_in.data() + cell * n_in;
              const double* w = kernel.data() + w_off;
              for (int kp = 0; kp < n_in; ++kp) gi[kp] += gk * w[kp];
            }
            if (!grad_kernel.empty()) {
              double* gw = grad_kernel.data() + w_off;
              for (int kp = 0; kp < n_in; ++kp) gw[kp] += gk * src[kp];
            }
          }
        }
      }
    }
  }
}

namespace {

inline double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// out[i] = sum_j w[i, j] v[j] + b[i] for a row-major (rows, cols) matrix.
void MatVecBias(std::span<const double> w, std::span<const double> v,
                std::span<const double> b, int rows, int cols, double* out) {
  for (int i = 0; i < rows; ++i) {
    const double* row = w.data() + static_cast<size_t>(i) * cols;
    double acc = b.empty() ? 0.0 : b[i];
    for (int j = 0; j < cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
}

}  // namespace

void GruForward(std::span<const double> h, std::span<const double> x,
                std::span<const double> w_ih, std::span<const double> w_hh,
                std::span<const double> b_ih, std::span<const double> b_hh,
                int hidden, int input, std::span<double> out,
                std::span<double> saved) {
  std::vector<double> gi(3 * hidden), gh(3 * hidden);
  MatVecBias(w_ih, x, b_ih, 3 * hidden, input, gi.data());
  MatVecBias(w_hh, h, b_hh, 3 * hidden, hidden, gh.data());
  for (int i = 0; i < hidden; ++i) {
    const double r = Sigmoid(gi[i] + gh[i]);
    const double z = Sigmoid(gi[hidden + i] + gh[hidden + i]);
    const double hn = gh[2 * hidden + i];
    const double n = std::tanh(gi[2 * hidden + i] + r * hn);
    out[i] = (1.0 - z) * n + z * h[i];
    if (!saved.empty()) {
      saved[i] = r;
      saved[hidden + i] = z;
      saved[2 * hidden + i] = n;
      saved[3 * hidden + i] = hn;
    }
  }
}

void GruBackward(std::span<const double> h, std::span<const double> x,
                 std::span<const double> w_ih, std::span<const double> w_hh,
                 int hidden, int input, std::span<const double> saved,
                 std::span<const double> grad_out, const GruGrads& grads) {
  std::vector<double> d_gi(3 * hidden), d_gh(3 * hidden);
  for (int i = 0; i < hidden; ++i) {
    const double r = saved[i];
    const double z = saved[hidden + i];
    const double n = saved[2 * hidden + i];
    const double hn = saved[3 * hidden + i];
    const double g = grad_out[i];
    const double dn_pre = g * (1.0 - z) * (1.0 - n * n);
    const double dz_pre = g * (h[i] - n) * z * (1.0 - z);
    const double dr_pre = dn_pre * hn * r * (1.0 - r);
    d_gi[i] = dr_pre;
    d_gi[hidden + i] = dz_pre;
    d_gi[2 * hidden + i] = dn_pre;
    d_gh[i] = dr_pre;
    d_gh[hidden + i] = dz_pre;
    d_gh[2 * hidden + i] = dn_pre * r;
    if (!grads.h.empty()) grads.h[i] += g * z;
  }
  for (int row = 0; row < 3 * hidden; ++row) {
    const double a = d_gi[row];
    const double b = d_gh[row];
    if (!grads.b_ih.empty()) grads.b_ih[row] += a;
    if (!grads.b_hh.empty()) grads.b_hh[row] += b;
    const size_t off_i = static_cast<size_t>(row) * input;
    const size_t off_h = static_cast<size_t>(row) * hidden;
    if (!grads.w_ih.empty()) {
      for (int j = 0; j < input; ++j) grads.w_ih[off_i + j] += a * x[j];
    }
    if (!grads.x.empty()) {
      for (int j = 0; j < input; ++j) grads.x[j] += a * w_ih[off_i + j];
    }
    if (!grads.w_hh.empty()) {
      for (int j = 0; j < hidden; ++j) grads.w_hh[off_h + j] += b * h[j];
    }
    if (!grads.h.empty()) {
      for (int j = 0; j < hidden; ++j) grads.h[j] += b * w_hh[off_h + j];
    }
  }
}

}  // namespace kernels

absl::StatusOr<Tensor> QuadDeconv(const Tensor& m, const Tensor& kernel) {
  if (m.rank() != 3 || m.dim(0) != m.dim(1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("deconv input must be (s, s, n), got ", ShapeString(m.shape())));
  }
  if (kernel.rank() != 4 || kernel.dim(1) != 2 || kernel.dim(2) != 2 ||
      kernel.dim(3) != m.dim(2)) {
    return absl::InvalidArgumentError(
        absl::StrCat("kernel shape ", ShapeString(kernel.shape()),
                     " incompatible with input ", ShapeString(m.shape())));
  }
  const int side = m.dim(0);
  Tensor out({2 * side, 2 * side, kernel.dim(0)});
  kernels::QuadDeconvForward(m.values(), side, m.dim(2), kernel.values(),
                             kernel.dim(0), out.values());
  return out;
}

absl::StatusOr<Tensor> GruCell(const Tensor& h_prev, const Tensor& x,
                               const GruWeights& weights) {
  if (h_prev.rank() != 1 || x.rank() != 1) {
    return absl::InvalidArgumentError("GRU state and input must be vectors");
  }
  const int hidden = h_prev.dim(0);
  const int input = x.dim(0);
  const std::vector<int> w_ih{3 * hidden, input}, w_hh{3 * hidden, hidden},
      bias{3 * hidden};
  if (weights.w_ih.shape() != w_ih || weights.w_hh.shape() != w_hh ||
      weights.b_ih.shape() != bias || weights.b_hh.shape() != bias) {
    return absl::InvalidArgumentError("GRU weight shapes do not match state/input");
  }
  Tensor out({hidden});
  kernels::GruForward(h_prev.values(), x.values(), weights.w_ih.values(),
                      weights.w_hh.values(), weights.b_ih.values(),
                      weights.b_hh.values(), hidden, input, out.values(), {});
  return out;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (!logits.empty()) kernels::Softmax(logits, out);
  return out;
}

absl::StatusOr<double> CrossEntropy(std::span<const double> logits, int target) {
  if (target < 0 || target >= static_cast<int>(logits.size())) {
    return absl::OutOfRangeError(absl::StrCat("target ", target, " out of range"));
  }
  return kernels::LogSumExp(logits) - logits[target];
}

namespace {

absl::Status CheckDistribution(std::span<const double> p, const char* name) {
  double total = 0.0;
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      return absl::InvalidArgumentError(absl::StrCat(name, " has a negative or non-finite entry"));
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(absl::StrCat(name, " sums to ", total));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> KlDivergence(std::span<const double> p,
                                    std::span<const double> q) {
  if (p.size() != q.size()) {
    return absl::InvalidArgumentError("distribution sizes differ");
  }
  if (absl::Status s = CheckDistribution(p, "p"); !s.ok()) return s;
  if (absl::Status s = CheckDistribution(q, "q"); !s.ok()) return s;
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

}  // namespace hrnet::ad
