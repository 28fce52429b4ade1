// src/tensor.cc


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

#include "saep/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saep/error.hpp"

namespace saep {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (NumElements(shape_) != data_.size())
    Fail(ErrorCode::kDimension,
         "tensor shape " + ShapeToString(shape_) + " needs " +
             std::to_string(NumElements(shape_)) + " values, got " +
             std::to_string(data_.size()));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size())
    Fail(ErrorCode::kDimension, "axis " + std::to_string(axis) +
                                    " out of range for shape " +
                                    ShapeToString(shape_));
  return shape_[axis];
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (NumElements(shape) != data_.size())
    Fail(ErrorCode::kDimension, "cannot reshape " + ShapeToString(shape_) +
                                    " to " + ShapeToString(shape));
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

void Tensor::Fill(float value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::SliceRows(std::size_t begin, std::size_t end) const {
  if (shape_.empty() || begin > end || end > shape_[0])
    Fail(ErrorCode::kIndex, "row slice [" + std::to_string(begin) + ", " +
                                std::to_string(end) + ") of " +
                                ShapeToString(shape_));
  Shape out_shape = shape_;
  out_shape[0] = end - begin;
  const std::size_t stride = shape_[0] ? data_.size() / shape_[0] : 0;
  return Tensor(std::move(out_shape),
                std::vector<float>(data_.begin() + begin * stride,
                                   data_.begin() + end * stride));
}

bool Tensor::AllFinite() const {
  return Eigen::Map<const Eigen::ArrayXf>(data_.data(),
                                          static_cast<Eigen::Index>(data_.size()))
      .allFinite();
}

void Tensor::CheckFinite(const std::string& what) const {
  if (AllFinite()) return;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      Fail(ErrorCode::kNonFinite, what + ": non-finite value " +
                                      std::to_string(data_[i]) +
                                      " at flat index " + std::to_string(i) +
                                      " of " + ShapeToString(shape_));
  }
}

}  // namespace saep
