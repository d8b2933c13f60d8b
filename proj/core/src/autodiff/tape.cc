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

#include "hrnet/autodiff/tape.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "hrnet/autodiff/ops.h"

namespace hrnet::ad {
namespace {

int LastDim(const std::vector<int>& shape) {
  return shape.empty() ? 1 : shape.back();
}

}  // namespace

Tape::Tape(const ParameterSet* params) : params_(params) {}

bool Tape::Check(bool condition, const char* op, const char* what) {
  if (!condition && status_.ok()) {
    status_ = absl::InvalidArgumentError(absl::StrCat(op, ": ", what));
  }
  return condition && status_.ok();
}

bool Tape::Usable(std::initializer_list<Var> vars) {
  if (!status_.ok()) return false;
  for (const Var v : vars) {
    if (!v.valid() || static_cast<size_t>(v.id) >= size_) {
      status_ = absl::InvalidArgumentError("invalid variable handle");
      return false;
    }
  }
  return true;
}

Tape::Node& Tape::NewNode(Op op, std::initializer_list<int> inputs) {
  if (size_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[size_++];
  n.op = op;
  n.inputs.assign(inputs.begin(), inputs.end());
  n.shape.clear();
  n.value.clear();
  n.aux.clear();
  n.external = nullptr;
  n.factor = 0.0;
  n.index = 0;
  n.requires_grad = false;
  for (const int in : n.inputs) {
    if (in >= 0 && nodes_[in].requires_grad) n.requires_grad = true;
  }
  return n;
}

std::span<const double> Tape::Value(int id) const {
  const Node& n = nodes_[id];
  if (n.external != nullptr) return n.external->values();
  return n.value;
}

Var Tape::Finish() { return Var{static_cast<int>(size_) - 1}; }

std::span<const double> Tape::value(Var v) const { return Value(v.id); }

const std::vector<int>& Tape::shape(Var v) const { return nodes_[v.id].shape; }

void Tape::Truncate(size_t mark) { size_ = std::min(size_, mark); }

Var Tape::Param(int index) {
  if (!Check(params_ != nullptr && index >= 0 && index < params_->size(),
             "Param", "index out of range")) {
    return {};
  }
  Node& n = NewNode(Op::kParam, {});
  n.external = &params_->tensor(index);
  n.shape = n.external->shape();
  n.index = index;
  n.requires_grad = true;
  return Finish();
}

Var Tape::Constant(std::span<const double> values, std::vector<int> shape) {
  if (!Check(ShapeSize(shape) == values.size(), "Constant",
             "value count does not match shape")) {
    return {};
  }
  Node& n = NewNode(Op::kConstant, {});
  n.shape = std::move(shape);
  n.value.assign(values.begin(), values.end());
  return Finish();
}

Var Tape::Affine(Var w, Var x, Var b) {
  if (!Usable({w, x})) return {};
  if (b.valid() && !Usable({b})) return {};
  const auto& ws = nodes_[w.id].shape;
  if (!Check(ws.size() == 2 && nodes_[x.id].shape.size() == 1 &&
                 nodes_[x.id].shape[0] == ws[1],
             "Affine", "weight/input shape mismatch")) {
    return {};
  }
  const int out = ws[0], in = ws[1];
  if (b.valid() && !Check(nodes_[b.id].shape == std::vector<int>{out},
                          "Affine", "bias shape mismatch")) {
    return {};
  }
  Node& n = NewNode(Op::kAffine, {w.id, x.id, b.valid() ? b.id : -1});
  n.shape = {out};
  n.value.resize(out);
  const auto wv = Value(w.id), xv = Value(x.id);
  for (int i = 0; i < out; ++i) {
    double acc = b.valid() ? Value(b.id)[i] : 0.0;
    const double* row = wv.data() + static_cast<size_t>(i) * in;
    for (int j = 0; j < in; ++j) acc += row[j] * xv[j];
    n.value[i] = acc;
  }
  return Finish();
}

Var Tape::AffineRows(Var x, Var w, Var b) {
  if (!Usable({x, w})) return {};
  if (b.valid() && !Usable({b})) return {};
  const auto& ws = nodes_[w.id].shape;
  if (!Check(ws.size() == 2 && LastDim(nodes_[x.id].shape) == ws[1],
             "AffineRows", "weight/input shape mismatch")) {
    return {};
  }
  const int out = ws[0], in = ws[1];
  if (b.valid() && !Check(nodes_[b.id].shape == std::vector<int>{out},
                          "AffineRows", "bias shape mismatch")) {
    return {};
  }
  const int rows = static_cast<int>(Value(x.id).size() / in);
  Node& n = NewNode(Op::kAffineRows, {x.id, w.id, b.valid() ? b.id : -1});
  n.shape = {rows, out};
  n.value.resize(static_cast<size_t>(rows) * out);
  const auto xv = Value(x.id), wv = Value(w.id);
  for (int r = 0; r < rows; ++r) {
    const double* xr = xv.data() + static_cast<size_t>(r) * in;
    double* dst = n.value.data() + static_cast<size_t>(r) * out;
    for (int i = 0; i < out; ++i) {
      const double* wr = wv.data() + static_cast<size_t>(i) * in;
      double acc = b.valid() ? Value(b.id)[i] : 0.0;
      for (int j = 0; j < in; ++j) acc += wr[j] * xr[j];
      dst[i] = acc;
    }
  }
  return Finish();
}

Var Tape::Tanh(Var x) {
  if (!Usable({x})) return {};
  Node& n = NewNode(Op::kTanh, {x.id});
  n.shape = nodes_[x.id].shape;
  const auto xv = Value(x.id);
  n.value.resize(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) n.value[i] = std::tanh(xv[i]);
  return Finish();
}

Var Tape::Sigmoid(Var x) {
  if (!Usable({x})) return {};
  Node& n = NewNode(Op::kSigmoid, {x.id});
  n.shape = nodes_[x.id].shape;
  const auto xv = Value(x.id);
  n.value.resize(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) {
    n.value[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  }
  return Finish();
}

Var Tape::Add(Var a, Var b) {
  if (!Usable({a, b})) return {};
  if (!Check(Value(a.id).size() == Value(b.id).size(), "Add", "size mismatch")) {
    return {};
  }
  Node& n = NewNode(Op::kAdd, {a.id, b.id});
  n.shape = nodes_[a.id].shape;
  const auto av = Value(a.id), bv = Value(b.id);
  n.value.resize(av.size());
  for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
  return Finish();
}

Var Tape::Scale(Var x, double factor) {
  if (!Usable({x})) return {};
  Node& n = NewNode(Op::kScale, {x.id});
  n.shape = nodes_[x.id].shape;
  n.factor = factor;
  const auto xv = Value(x.id);
  n.value.resize(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) n.value[i] = factor * xv[i];
  return Finish();
}

Var Tape::Concat(std::span<const Var> parts) {
  if (!Check(!parts.empty(), "Concat", "no inputs")) return {};
  for (const Var p : parts) {
    if (!Usable({p})) return {};
  }
  Node& n = NewNode(Op::kConcat, {});
  for (const Var p : parts) {
    n.inputs.push_back(p.id);
    if (nodes_[p.id].requires_grad) n.requires_grad = true;
  }
  for (const Var p : parts) {
    const auto pv = Value(p.id);
    n.value.insert(n.value.end(), pv.begin(), pv.end());
  }
  n.shape = {static_cast<int>(n.value.size())};
  return Finish();
}

Var Tape::Slice(Var x, int begin, int length) {
  if (!Usable({x})) return {};
  if (!Check(begin >= 0 && length >= 0 &&
                 static_cast<size_t>(begin) + length <= Value(x.id).size(),
             "Slice", "range out of bounds")) {
    return {};
  }
  Node& n = NewNode(Op::kSlice, {x.id});
  n.shape = {length};
  n.index = begin;
  const auto xv = Value(x.id).subspan(begin, length);
  n.value.assign(xv.begin(), xv.end());
  return Finish();
}

Var Tape::Row(Var x, int r) {
  if (!Usable({x})) return {};
  const int cols = LastDim(nodes_[x.id].shape);
  const int rows = static_cast<int>(Value(x.id).size() / std::max(cols, 1));
  if (!Check(r >= 0 && r < rows, "Row", "row index out of range")) return {};
  Node& n = NewNode(Op::kRow, {x.id});
  n.shape = {cols};
  n.index = r;
  const auto xv = Value(x.id).subspan(static_cast<size_t>(r) * cols, cols);
  n.value.assign(xv.begin(), xv.end());
  return Finish();
}

Var Tape::WeightedRowSum(Var x, std::span<const double> weights) {
  if (!Usable({x})) return {};
  const int cols = LastDim(nodes_[x.id].shape);
  const size_t rows = Value(x.id).size() / std::max(cols, 1);
  if (!Check(weights.size() == rows, "WeightedRowSum",
             "weight count does not match row count")) {
    return {};
  }
  Node& n = NewNode(Op::kWeightedRowSum, {x.id});
  n.shape = {cols};
  n.aux.assign(weights.begin(), weights.end());
  n.value.assign(cols, 0.0);
  const auto xv = Value(x.id);
  for (size_t r = 0; r < rows; ++r) {
    const double wr = weights[r];
    if (wr == 0.0) continue;
    const double* row = xv.data() + r * cols;
    for (int j = 0; j < cols; ++j) n.value[j] += wr * row[j];
  }
  return Finish();
}

Var Tape::MatVec(Var m, Var v) {
  if (!Usable({m, v})) return {};
  const int k = static_cast<int>(Value(v.id).size());
  if (!Check(nodes_[v.id].shape.size() == 1 &&
                 LastDim(nodes_[m.id].shape) == k,
             "MatVec", "matrix/vector shape mismatch")) {
    return {};
  }
  const int rows = static_cast<int>(Value(m.id).size() / k);
  Node& n = NewNode(Op::kMatVec, {m.id, v.id});
  n.shape = {rows};
  n.value.resize(rows);
  const auto mv = Value(m.id), vv = Value(v.id);
  for (int r = 0; r < rows; ++r) {
    const double* row = mv.data() + static_cast<size_t>(r) * k;
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += row[j] * vv[j];
    n.value[r] = acc;
  }
  return Finish();
}

Var Tape::Dot(Var a, Var b) {
  if (!Usable({a, b})) return {};
  if (!Check(Value(a.id).size() == Value(b.id).size(), "Dot", "size mismatch")) {
    return {};
  }
  Node& n = NewNode(Op::kDot, {a.id, b.id});
  const auto av = Value(a.id), bv = Value(b.id);
  double acc = 0.0;
  for (size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  n.value.assign(1, acc);
  return Finish();
}

Var Tape::QuadDeconv(Var m, Var kernel) {
  if (!Usable({m, kernel})) return {};
  const auto& ms = nodes_[m.id].shape;
  const auto& ks = nodes_[kernel.id].shape;
  if (!Check(ms.size() == 3 && ms[0] == ms[1] && ks.size() == 4 &&
                 ks[1] == 2 && ks[2] == 2 && ks[3] == ms[2],
             "QuadDeconv", "input/kernel shape mismatch")) {
    return {};
  }
  const int side = ms[0], n_in = ms[2], n_out = ks[0];
  Node& n = NewNode(Op::kQuadDeconv, {m.id, kernel.id});
  n.shape = {2 * side, 2 * side, n_out};
  n.value.resize(ShapeSize(n.shape));
  kernels::QuadDeconvForward(Value(m.id), side, n_in, Value(kernel.id), n_out,
                             n.value);
  return Finish();
}

Var Tape::GruCell(Var h, Var x, Var w_ih, Var w_hh, Var b_ih, Var b_hh) {
  if (!Usable({h, x, w_ih, w_hh, b_ih, b_hh})) return {};
  const int hidden = static_cast<int>(Value(h.id).size());
  const int input = static_cast<int>(Value(x.id).size());
  if (!Check(nodes_[w_ih.id].shape == std::vector<int>{3 * hidden, input} &&
                 nodes_[w_hh.id].shape == std::vector<int>{3 * hidden, hidden} &&
                 nodes_[b_ih.id].shape == std::vector<int>{3 * hidden} &&
                 nodes_[b_hh.id].shape == std::vector<int>{3 * hidden},
             "GruCell", "weight shapes do not match state/input")) {
    return {};
  }
  Node& n = NewNode(Op::kGruCell,
                    {h.id, x.id, w_ih.id, w_hh.id, b_ih.id, b_hh.id});
  n.shape = {hidden};
  n.value.resize(hidden);
  n.aux.resize(4 * static_cast<size_t>(hidden));
  kernels::GruForward(Value(h.id), Value(x.id), Value(w_ih.id), Value(w_hh.id),
                      Value(b_ih.id), Value(b_hh.id), hidden, input, n.value,
                      n.aux);
  return Finish();
}

Var Tape::SoftmaxCrossEntropy(Var logits, int target) {
  if (!Usable({logits})) return {};
  const auto lv = Value(logits.id);
  if (!Check(target >= 0 && static_cast<size_t>(target) < lv.size(),
             "SoftmaxCrossEntropy", "target out of range")) {
    return {};
  }
  Node& n = NewNode(Op::kSoftmaxCe, {logits.id});
  n.index = target;
  n.aux.resize(lv.size());
  kernels::Softmax(lv, n.aux);
  n.value.assign(1, kernels::LogSumExp(lv) - lv[target]);
  return Finish();
}

Var Tape::SoftmaxKl(std::span<const double> target, Var logits) {
  if (!Usable({logits})) return {};
  const auto lv = Value(logits.id);
  if (!Check(target.size() == lv.size(), "SoftmaxKl", "size mismatch")) {
    return {};
  }
  Node& n = NewNode(Op::kSoftmaxKl, {logits.id});
  // aux = [softmax | target]
  n.aux.resize(2 * lv.size());
  kernels::Softmax(lv, std::span<double>(n.aux).first(lv.size()));
  std::copy(target.begin(), target.end(), n.aux.begin() + lv.size());
  const double lse = kernels::LogSumExp(lv);
  double kl = 0.0;
  for (size_t i = 0; i < lv.size(); ++i) {
    if (target[i] > 0.0) kl += target[i] * (std::log(target[i]) - (lv[i] - lse));
  }
  n.value.assign(1, kl);
  return Finish();
}

Var Tape::Sum(std::span<const Var> terms) {
  for (const Var t : terms) {
    if (!Usable({t})) return {};
    if (!Check(Value(t.id).size() == 1, "Sum", "terms must be scalars")) {
      return {};
    }
  }
  Node& n = NewNode(Op::kSum, {});
  double acc = 0.0;
  for (const Var t : terms) {
    n.inputs.push_back(t.id);
    if (nodes_[t.id].requires_grad) n.requires_grad = true;
    acc += Value(t.id)[0];
  }
  n.value.assign(1, acc);
  return Finish();
}

absl::StatusOr<GradientSet> Tape::Backward(Var loss) {
  if (!status_.ok()) return status_;
  if (!loss.valid() || static_cast<size_t>(loss.id) >= size_ ||
      Value(loss.id).size() != 1) {
    return absl::InvalidArgumentError("Backward needs a scalar loss node");
  }
  GradientSet out = GradientSet::ZerosLike(*params_);
  const size_t count = static_cast<size_t>(loss.id) + 1;
  if (grads_.size() < count) grads_.resize(count);
  has_grad_.assign(count, 0);
  grads_[loss.id].assign(1, 1.0);
  has_grad_[loss.id] = 1;
  for (int id = loss.id; id >= 0; --id) {
    if (!has_grad_[id] || !nodes_[id].requires_grad) continue;
    const Node& n = nodes_[id];
    if (n.op == Op::kParam) {
      auto& g = out.grads[n.index];
      const auto& src = grads_[id];
      for (size_t i = 0; i < src.size(); ++i) g[i] += src[i];
      continue;
    }
    BackwardNode(id);
  }
  return out;
}

void Tape::BackwardNode(int id) {
  const Node& n = nodes_[id];
  const std::vector<double>& g = grads_[id];

  // Returns the gradient buffer of input `in`, zero-initialized on first use,
  // or an empty span when the input needs no gradient.
  auto grad_of = [&](int in) -> std::span<double> {
    if (in < 0 || !nodes_[in].requires_grad) return {};
    std::vector<double>& buf = grads_[in];
    if (!has_grad_[in]) {
      buf.assign(Value(in).size(), 0.0);
      has_grad_[in] = 1;
    }
    return buf;
  };

  switch (n.op) {
    case Op::kParam:
    case Op::kConstant:
      break;
    case Op::kAffine: {
      const int w = n.inputs[0], x = n.inputs[1], b = n.inputs[2];
      const int out = nodes_[w].shape[0], in = nodes_[w].shape[1];
      const auto wv = Value(w), xv = Value(x);
      auto gw = grad_of(w);
      auto gx = grad_of(x);
      auto gb = grad_of(b);
      for (int i = 0; i < out; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        if (!gb.empty()) gb[i] += gi;
        const size_t off = static_cast<size_t>(i) * in;
        if (!gw.empty()) {
          for (int j = 0; j < in; ++j) gw[off + j] += gi * xv[j];
        }
        if (!gx.empty()) {
          for (int j = 0; j < in; ++j) gx[j] += gi * wv[off + j];
        }
      }
      break;
    }
    case Op::kAffineRows: {
      const int x = n.inputs[0], w = n.inputs[1], b = n.inputs[2];
      const int out = nodes_[w].shape[0], in = nodes_[w].shape[1];
      const int rows = n.shape[0];
      const auto wv = Value(w), xv = Value(x);
      auto gx = grad_of(x);
      auto gw = grad_of(w);
      auto gb = grad_of(b);
      for (int r = 0; r < rows; ++r) {
        const double* gr = g.data() + static_cast<size_t>(r) * out;
        const double* xr = xv.data() + static_cast<size_t>(r) * in;
        double* gxr = gx.empty() ? nullptr : gx.data() + static_cast<size_t>(r) * in;
        for (int i = 0; i < out; ++i) {
          const double gi = gr[i];
          if (gi == 0.0) continue;
          if (!gb.empty()) gb[i] += gi;
          const size_t off = static_cast<size_t>(i) * in;
          if (!gw.empty()) {
            for (int j = 0; j < in; ++j) gw[off + j] += gi * xr[j];
          }
          if (gxr != nullptr) {
            for (int j = 0; j < in; ++j) gxr[j] += gi * wv[off + j];
          }
        }
      }
      break;
    }
    case Op::kTanh: {
      auto gx = grad_of(n.inputs[0]);
      for (size_t i = 0; i < g.size(); ++i) {
        gx[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      }
      break;
    }
    case Op::kSigmoid: {
      auto gx = grad_of(n.inputs[0]);
      for (size_t i = 0; i < g.size(); ++i) {
        gx[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      }
      break;
    }
    case Op::kAdd: {
      for (const int in : n.inputs) {
        auto gi = grad_of(in);
        for (size_t i = 0; i < gi.size(); ++i) gi[i] += g[i];
      }
      break;
    }
    case Op::kScale: {
      auto gx = grad_of(n.inputs[0]);
      for (size_t i = 0; i < g.size(); ++i) gx[i] += n.factor * g[i];
      break;
    }
    case Op::kConcat: {
      size_t offset = 0;
      for (const int in : n.inputs) {
        const size_t len = Value(in).size();
        auto gi = grad_of(in);
        for (size_t i = 0; i < gi.size(); ++i) gi[i] += g[offset + i];
        offset += len;
      }
      break;
    }
    case Op::kSlice: {
      auto gx = grad_of(n.inputs[0]);
      for (size_t i = 0; i < g.size(); ++i) gx[n.index + i] += g[i];
      break;
    }
    case Op::kRow: {
      auto gx = grad_of(n.inputs[0]);
      const size_t off = static_cast<size_t>(n.index) * g.size();
      for (size_t i = 0; i < g.size(); ++i) gx[off + i] += g[i];
      break;
    }
    case Op::kWeightedRowSum: {
      auto gx = grad_of(n.inputs[0]);
      const size_t cols = g.size();
      for (size_t r = 0; r < n.aux.size(); ++r) {
        const double wr = n.aux[r];
        if (wr == 0.0) continue;
        for (size_t j = 0; j < cols; ++j) gx[r * cols + j] += wr * g[j];
      }
      break;
    }
    case Op::kMatVec: {
      const int m = n.inputs[0], v = n.inputs[1];
      const auto mv = Value(m), vv = Value(v);
      const size_t k = vv.size();
      auto gm = grad_of(m);
      auto gv = grad_of(v);
      for (size_t r = 0; r < g.size(); ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        if (!gm.empty()) {
          for (size_t j = 0; j < k; ++j) gm[r * k + j] += gr * vv[j];
        }
        if (!gv.empty()) {
          for (size_t j = 0; j < k; ++j) gv[j] += gr * mv[r * k + j];
        }
      }
      break;
    }
    case Op::kDot: {
      const int a = n.inputs[0], b = n.inputs[1];
      const auto av = Value(a), bv = Value(b);
      auto ga = grad_of(a);
      auto gb = grad_of(b);
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * bv[i];
      for (size_t i = 0; i < gb.size(); ++i) gb[i] += g[0] * av[i];
      break;
    }
    case Op::kQuadDeconv: {
      const int m = n.inputs[0], k = n.inputs[1];
      const auto& ms = nodes_[m].shape;
      auto gm = grad_of(m);
      auto gk = grad_of(k);
      kernels::QuadDeconvBackward(Value(m), ms[0], ms[2], Value(k),
                                  nodes_[k].shape[0], g, gm, gk);
      break;
    }
    case Op::kGruCell: {
      const int h = n.inputs[0], x = n.inputs[1];
      const int hidden = n.shape[0];
      const int input = static_cast<int>(Value(x).size());
      kernels::GruGrads grads{grad_of(h), grad_of(x), grad_of(n.inputs[2]),
                              grad_of(n.inputs[3]), grad_of(n.inputs[4]),
                              grad_of(n.inputs[5])};
      kernels::GruBackward(Value(h), Value(x), Value(n.inputs[2]),
                           Value(n.inputs[3]), hidden, input, n.aux, g, grads);
      break;
    }
    case Op::kSoftmaxCe: {
      auto gx = grad_of(n.inputs[0]);
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * n.aux[i];
      gx[n.index] -= g[0];
      break;
    }
    case Op::kSoftmaxKl: {
      auto gx = grad_of(n.inputs[0]);
      const size_t len = gx.size();
      double mass = 0.0;
      for (size_t i = 0; i < len; ++i) mass += n.aux[len + i];
      for (size_t i = 0; i < len; ++i) {
        gx[i] += g[0] * (mass * n.aux[i] - n.aux[len + i]);
      }
      break;
    }
    case Op::kSum: {
      for (const int in : n.inputs) {
        auto gi = grad_of(in);
        if (!gi.empty()) gi[0] += g[0];
      }
      break;
    }
  }
}

}  // namespace hrnet::ad
