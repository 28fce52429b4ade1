// saep/adam.hpp


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

#ifndef SAEP_ADAM_HPP_
#define SAEP_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "saep/autograd.hpp"

namespace saep {

struct AdamOptions {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;

  bool operator==(const AdamOptions&) const = default;
};

// First/second moment buffers, aligned index-for-index with the
// ParameterSet they were created for.
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  AdamState() = default;
  AdamState(const ParameterSet& params, AdamOptions opts);
};

// One bias-corrected Adam update over every parameter, then zeroes the
// gradients. Throws kContract if any parameter lacks a gradient or the
// moment buffers do not match the parameter shapes.
void AdamStep(ParameterSet& params, AdamState& state);

}  // namespace saep

#endif  // SAEP_ADAM_HPP_
