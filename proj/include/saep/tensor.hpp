// saep/tensor.hpp


// Copyright 2026  The SAEP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SAEP_TENSOR_HPP_
#define SAEP_TENSOR_HPP_

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace saep {

using Shape = std::vector<std::size_t>;

// 64-byte aligned storage. Vectorised reductions peel a different prefix
// depending on the start address, so without a fixed alignment the same
// computation could round differently from one allocation to the next.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

std::string ShapeToString(const Shape& shape);
std::size_t NumElements(const Shape& shape);

// Dense row-major float32 array. Plain value type; gradients live on the
// autodiff tape and on Parameter, not here.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  // Throws kDimension if data.size() != product(shape).
  Tensor(Shape shape, std::vector<float> data);

  static Tensor Scalar(float value) { return Tensor({}, {value}); }
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<float> data) {
    return Tensor({rows, cols}, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float* ptr() { return data_.data(); }
  const float* ptr() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  // Rank-2 element access.
  float& at(std::size_t r, std::size_t c) { return data_[r * shape_.back() + c]; }
  float at(std::size_t r, std::size_t c) const {
    return data_[r * shape_.back() + c];
  }

  // Same data, new shape of equal element count.
  Tensor Reshaped(Shape shape) const;
  void Fill(float value);
  // Rows [begin, end) along axis 0.
  Tensor SliceRows(std::size_t begin, std::size_t end) const;

  bool AllFinite() const;
  // Throws kNonFinite naming `what` and the first offending index.
  void CheckFinite(const std::string& what) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  FloatBuffer data_;
};

}  // namespace saep

#endif  // SAEP_TENSOR_HPP_
