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

#ifndef HRNET_AUTODIFF_TENSOR_H_
#define HRNET_AUTODIFF_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace hrnet::ad {

size_t ShapeSize(std::span<const int> shape);
std::string ShapeString(std::span<const int> shape);

// Dense row-major float64 tensor with up to four axes.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  static absl::StatusOr<Tensor> Create(std::vector<int> shape,
                                       std::vector<double> values);
  static Tensor FromVector(std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_[axis]; }
  size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  bool AllFinite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// Named, ordered collection of trainable tensors.
class ParameterSet {
 public:
  int Add(std::string name, Tensor value);

  int size() const { return static_cast<int>(tensors_.size()); }
  const std::string& name(int i) const { return names_[i]; }
  Tensor& tensor(int i) { return tensors_[i]; }
  const Tensor& tensor(int i) const { return tensors_[i]; }
  std::optional<int> Find(absl::string_view name) const;
  size_t TotalSize() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

// Gradients aligned with a ParameterSet, tagged with the example that
// produced them (-1 for aggregates).
struct GradientSet {
  int64_t example = -1;
  std::vector<Tensor> grads;

  static GradientSet ZerosLike(const ParameterSet& params);

  double SquaredNorm() const;
  double Norm() const;
  void Scale(double factor);
  // this += factor * other; shapes must match.
  void AddScaled(const GradientSet& other, double factor);
};

}  // namespace hrnet::ad

#endif  // HRNET_AUTODIFF_TENSOR_H_
