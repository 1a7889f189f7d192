// Copyright 2026 The BRAN Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bran/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bran/error.h"

namespace bran {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimensionError("negative dimension in " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)),
      values_(static_cast<size_t>(NumElements(shape_)), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (NumElements(shape_) != static_cast<int64_t>(values_.size())) {
    throw DimensionError("tensor of shape " + ShapeToString(shape_) +
                         " given " + std::to_string(values_.size()) +
                         " values");
  }
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)),
      values_(static_cast<size_t>(NumElements(shape_)), fill) {}

Tensor Tensor::Scalar(double value) { return Tensor({}, {value}); }

int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         ShapeToString(shape_));
  }
  return shape_[static_cast<size_t>(axis)];
}

int64_t Tensor::Offset(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw DimensionError("index of rank " + std::to_string(index.size()) +
                         " into " + ShapeToString(shape_));
  }
  int64_t offset = 0;
  size_t axis = 0;
  for (int64_t i : index) {
    if (i < 0 || i >= shape_[axis]) {
      throw DimensionError("index " + std::to_string(i) + " out of range on axis " +
                           std::to_string(axis) + " of " + ShapeToString(shape_));
    }
    offset = offset * shape_[axis] + i;
    ++axis;
  }
  return offset;
}

double& Tensor::at(std::initializer_list<int64_t> index) {
  return values_[static_cast<size_t>(Offset(index))];
}

double Tensor::at(std::initializer_list<int64_t> index) const {
  return values_[static_cast<size_t>(Offset(index))];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + ShapeToString(shape_));
  }
  return values_[0];
}

void Tensor::Fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Tensor Tensor::Reshaped(Shape shape) const {
  if (NumElements(shape) != size()) {
    throw DimensionError("cannot reshape " + ShapeToString(shape_) + " to " +
                         ShapeToString(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.values_ = values_;
  return out;
}

bool Tensor::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace bran
