// saep/gradcheck.hpp


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

#ifndef SAEP_GRADCHECK_HPP_
#define SAEP_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <string>

#include "saep/autograd.hpp"

namespace saep {

struct GradCheckOptions {
  float step = 1e-3f;
  double rel_tol = 1e-2;
  // The scalar f is float32, so the central difference is quantised in
  // steps of ulp(f) / (2 * step). An element passes when
  //   |analytic - numeric| <= rel_tol * max(|analytic|, |numeric|)
  //                           + noise_ulps * ulp(max(|f|, 1)) / (2 * step)
  //                           + abs_tol.
  double noise_ulps = 8.0;
  double abs_tol = 0.0;
  // When positive, an element that fails at `step` is probed again at this
  // step and the better of the two is kept. A ReLU kink inside the first
  // interval rarely lies inside a smaller one, but a wrong gradient fails
  // at both.
  float retry_step = 0.0f;
  // When positive, an element that still fails is probed with second-order
  // one-sided differences over [x, x + h] and [x - h, x], for h and 2h. At a
  // ReLU kink the reverse-mode gradient is the derivative of one branch, so
  // it has to match one side; a wrong gradient matches neither.
  float one_sided_step = 0.0f;
};

struct GradCheckReport {
  bool passed = true;
  std::size_t checked = 0;
  std::size_t failures = 0;
  // |analytic - numeric| divided by the allowance above; an element fails
  // when this exceeds 1.
  double worst_error = 0.0;
  std::string worst_name;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  std::string Describe() const;
};

// Builds a scalar on the tape from the supplied input variable.
using ScalarFn = std::function<Var(Tape&, Var)>;
// Builds a scalar on the tape, reading parameters through Tape::Param.
using ParamScalarFn = std::function<Var(Tape&)>;

// Reverse-mode gradient of f at x against central differences.
GradCheckReport GradientCheck(const ScalarFn& f, const Tensor& x,
                              const GradCheckOptions& options = {});

// Same check over every element of every parameter in `params`. f must be
// deterministic (e.g. reseed any dropout generator inside f).
GradCheckReport GradientCheckParams(const ParamScalarFn& f,
                                    ParameterSet& params,
                                    const GradCheckOptions& options = {});

}  // namespace saep

#endif  // SAEP_GRADCHECK_HPP_
