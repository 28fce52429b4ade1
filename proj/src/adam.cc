// src/adam.cc


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

#include "saep/adam.hpp"

#include <cmath>

#include "saep/error.hpp"

namespace saep {

AdamState::AdamState(const ParameterSet& params, AdamOptions opts)
    : options(opts) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m.emplace_back(params[i].value.shape());
    v.emplace_back(params[i].value.shape());
  }
}

void AdamStep(ParameterSet& params, AdamState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    Fail(ErrorCode::kContract, "adam state tracks " +
                                   std::to_string(state.m.size()) +
                                   " parameters, set has " +
                                   std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (!p.has_grad)
      Fail(ErrorCode::kContract, "parameter " + p.name + " has no gradient");
    if (state.m[i].shape() != p.value.shape() ||
        state.v[i].shape() != p.value.shape())
      Fail(ErrorCode::kContract, "adam moments for " + p.name +
                                     " do not match shape " +
                                     ShapeToString(p.value.shape()));
  }

  const AdamOptions& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const float bc1 = static_cast<float>(1.0 - std::pow(double(o.beta1), t));
  const float bc2 = static_cast<float>(1.0 - std::pow(double(o.beta2), t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    float* w = p.value.ptr();
    const float* g = p.grad.ptr();
    float* m = state.m[i].ptr();
    float* v = state.v[i].ptr();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = o.beta1 * m[k] + (1.0f - o.beta1) * g[k];
      v[k] = o.beta2 * v[k] + (1.0f - o.beta2) * g[k] * g[k];
      const float m_hat = m[k] / bc1;
      const float v_hat = v[k] / bc2;
      w[k] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
    p.ZeroGrad();
  }
}

}  // namespace saep
