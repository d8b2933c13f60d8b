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

#ifndef HRNET_AUTODIFF_TAPE_H_
#define HRNET_AUTODIFF_TAPE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hrnet/autodiff/tensor.h"

namespace hrnet::ad {

// Handle to a node on a Tape. Default-constructed handles are invalid.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Append-only computation graph with reverse-mode differentiation.
//
// Parameters are referenced, not copied, so the ParameterSet must outlive the
// tape and stay unmodified while it is in use. Every builder validates shapes;
// the first failure is recorded in status() and all later builders return
// invalid handles, so a sequence of calls can be checked once at the end.
//
// Mark()/Truncate() support reusing a shared prefix: build the
// example-independent part of the graph once, Mark(), then for each example
// build its suffix, call Backward(), and Truncate() back to the mark.
//
// Shapes: vectors are rank 1, matrices rank 2, scalars have shape {}.
class Tape {
 public:
  explicit Tape(const ParameterSet* params);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  const absl::Status& status() const { return status_; }

  Var Param(int index);
  Var Constant(std::span<const double> values, std::vector<int> shape);

  // w (out, in), x (in), optional b (out) -> w x + b.
  Var Affine(Var w, Var x, Var b);
  // x (..., in) viewed as rows, w (out, in), optional b (out) ->
  // (rows, out) with each row = w x_row + b.
  Var AffineRows(Var x, Var w, Var b);
  Var Tanh(Var x);
  Var Sigmoid(Var x);
  Var Add(Var a, Var b);
  Var Scale(Var x, double factor);
  // Flattens and concatenates; the result is a vector.
  Var Concat(std::span<const Var> parts);
  Var Slice(Var x, int begin, int length);
  // Row r of x viewed as (size / last_dim, last_dim).
  Var Row(Var x, int r);
  // sum_r weights[r] * Row(x, r).
  Var WeightedRowSum(Var x, std::span<const double> weights);
  // m viewed as (rows, k) times v (k) -> (rows).
  Var MatVec(Var m, Var v);
  Var Dot(Var a, Var b);
  Var QuadDeconv(Var m, Var kernel);
  Var GruCell(Var h, Var x, Var w_ih, Var w_hh, Var b_ih, Var b_hh);
  // -log softmax(logits)[target].
  Var SoftmaxCrossEntropy(Var logits, int target);
  // KL(target || softmax(logits)); target must be a distribution with the
  // logits' size and full support wherever the model may put zero mass.
  Var SoftmaxKl(std::span<const double> target, Var logits);
  // Sum of scalars.
  Var Sum(std::span<const Var> terms);

  std::span<const double> value(Var v) const;
  const std::vector<int>& shape(Var v) const;
  double scalar(Var v) const { return value(v)[0]; }

  // Gradient of the scalar `loss` with respect to every parameter.
  absl::StatusOr<GradientSet> Backward(Var loss);

  size_t Mark() const { return size_; }
  void Truncate(size_t mark);
  size_t size() const { return size_; }

 private:
  enum class Op {
    kParam, kConstant, kAffine, kAffineRows, kTanh, kSigmoid, kAdd, kScale,
    kConcat, kSlice, kRow, kWeightedRowSum, kMatVec, kDot, kQuadDeconv,
    kGruCell, kSoftmaxCe, kSoftmaxKl, kSum,
  };

  struct Node {
    Op op = Op::kConstant;
    std::vector<int> inputs;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> aux;
    const Tensor* external = nullptr;
    double factor = 0.0;
    int index = 0;
    bool requires_grad = false;
  };

  bool Check(bool condition, const char* op, const char* what);
  bool Usable(std::initializer_list<Var> vars);
  // Appends a node, reusing pooled storage; inputs must be valid.
  Node& NewNode(Op op, std::initializer_list<int> inputs);
  std::span<const double> Value(int id) const;
  Var Finish();
  void BackwardNode(int id);

  const ParameterSet* params_;
  absl::Status status_;
  std::vector<Node> nodes_;
  size_t size_ = 0;
  std::vector<std::vector<double>> grads_;
  std::vector<char> has_grad_;
};

}  // namespace hrnet::ad

#endif  // HRNET_AUTODIFF_TAPE_H_
