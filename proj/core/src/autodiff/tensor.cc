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

#include "hrnet/autodiff/tensor.h"

#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/string_view.h"

namespace hrnet::ad {

size_t ShapeSize(std::span<const int> shape) {
  size_t n = 1;
  for (const int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::string ShapeString(std::span<const int> shape) {
  return absl::StrCat("(", absl::StrJoin(shape, ", "), ")");
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), 0.0) {}

absl::StatusOr<Tensor> Tensor::Create(std::vector<int> shape,
                                      std::vector<double> values) {
  if (shape.size() > 4) {
    return absl::InvalidArgumentError("tensors have at most four axes");
  }
  for (const int d : shape) {
    if (d < 0) return absl::InvalidArgumentError("negative dimension");
  }
  if (ShapeSize(shape) != values.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("shape ", ShapeString(shape), " needs ", ShapeSize(shape),
                     " values, got ", values.size()));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::FromVector(std::vector<double> values) {
  Tensor t;
  t.shape_ = {static_cast<int>(values.size())};
  t.data_ = std::move(values);
  return t;
}

bool Tensor::AllFinite() const {
  for (const double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int ParameterSet::Add(std::string name, Tensor value) {
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return size() - 1;
}

std::optional<int> ParameterSet::Find(absl::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

size_t ParameterSet::TotalSize() const {
  size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

GradientSet GradientSet::ZerosLike(const ParameterSet& params) {
  GradientSet g;
  g.grads.reserve(params.size());
  for (int i = 0; i < params.size(); ++i) g.grads.emplace_back(params.tensor(i).shape());
  return g;
}

double GradientSet::SquaredNorm() const {
  double s = 0.0;
  for (const Tensor& t : grads) {
    for (const double v : t.values()) s += v * v;
  }
  return s;
}

double GradientSet::Norm() const { return std::sqrt(SquaredNorm()); }

void GradientSet::Scale(double factor) {
  for (Tensor& t : grads) {
    for (double& v : t.values()) v *= factor;
  }
}

void GradientSet::AddScaled(const GradientSet& other, double factor) {
  for (size_t i = 0; i < grads.size(); ++i) {
    std::span<double> dst = grads[i].values();
    std::span<const double> src = other.grads[i].values();
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += factor * src[k];
  }
}

}  // namespace hrnet::ad
