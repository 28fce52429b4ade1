// saep/ops.hpp


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

#ifndef SAEP_OPS_HPP_
#define SAEP_OPS_HPP_

#include <cstddef>
#include <span>

#include "saep/autograd.hpp"
#include "saep/random.hpp"

namespace saep {

// Differentiable primitives. Every op records its output on the tape of its
// first argument and throws kDimension on shape disagreement.

// [M x K] . [K x N] -> [M x N]
Var MatMul(Var a, Var b);
// [B x M x K] . [B x K x N] -> [B x M x N]
Var BatchMatMul(Var a, Var b);
// Swaps the last two axes of a rank-2 or rank-3 tensor.
Var Transpose(Var x);
Var Add(Var a, Var b);
// x[..., d] + bias[d]
Var AddBias(Var x, Var bias);
Var Scale(Var x, float factor);
Var Relu(Var x);
// Softmax over the last axis, max-subtracted.
Var SoftmaxRows(Var x);
// Normalises over the last axis with population variance, then applies
// gain[d] and bias[d].
Var LayerNorm(Var x, Var gain, Var bias, float eps = 1e-5f);
// Inverted dropout: scales kept units by 1/(1 - rate). Identity when
// !training or rate == 0.
Var Dropout(Var x, float rate, bool training, Rng& rng);
Var Reshape(Var x, Shape shape);
// Mean over the batch of -log softmax(logits)[label].
Var CrossEntropy(Var logits, std::span<const int> labels);
Var Sum(Var x);
// Divides each row (last axis) by its L2 norm.
Var L2NormalizeRows(Var x);
// Divides each column of a rank-2 tensor by its L2 norm.
Var L2NormalizeColumns(Var w);

// Row-wise softmax on a plain tensor; shared with non-differentiable code.
void SoftmaxInPlace(std::span<float> row);

}  // namespace saep

#endif  // SAEP_OPS_HPP_
