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

#ifndef BRAN_TENSOR_H_
#define BRAN_TENSOR_H_

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace bran {

using Shape = std::vector<int64_t>;

// Over-aligned storage: Eigen's vectorized loops pick their split points from
// the buffer address, so malloc's 16-byte alignment would make summation order
// (and the last bits of results) depend on where the heap put each tensor.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}  // NOLINT

  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

std::string ShapeToString(const Shape& shape);
int64_t NumElements(const Shape& shape);

// Dense row-major array of doubles. Plain value type: copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);
  Tensor(Shape shape, double fill);

  static Tensor Scalar(double value);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const;
  int64_t size() const { return static_cast<int64_t>(values_.size()); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](int64_t i) { return values_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const {
    return values_[static_cast<size_t>(i)];
  }

  // Multi-index access; bounds are checked.
  double& at(std::initializer_list<int64_t> index);
  double at(std::initializer_list<int64_t> index) const;

  // Scalar value of a single-element tensor.
  double item() const;

  void Fill(double value);
  // Returns a copy with a new shape of the same element count.
  Tensor Reshaped(Shape shape) const;

  bool AllFinite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  int64_t Offset(std::initializer_list<int64_t> index) const;

  Shape shape_;
  std::vector<double, AlignedAllocator<double>> values_;
};

}  // namespace bran

#endif  // BRAN_TENSOR_H_
