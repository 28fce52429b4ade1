// src/gradcheck.cc


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

#include "saep/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "saep/error.hpp"

namespace saep {
namespace {

float ScalarOf(Var v) {
  if (v.value().size() != 1)
    Fail(ErrorCode::kContract, "gradient check needs a scalar function");
  return v.value()[0];
}

struct Difference {
  double derivative;
  // Size of one float32 quantisation step of f, in derivative units.
  double quantum;
};

// Perturbs `slot` by +-step, evaluates, restores. Uses the float-rounded
// step actually taken.
template <typename Eval>
Difference CentralDifference(float& slot, float step, Eval&& eval) {
  const float original = slot;
  const float up = original + step;
  const float down = original - step;
  slot = up;
  const float f_up = eval();
  slot = down;
  const float f_down = eval();
  slot = original;
  const double width = double(up) - double(down);
  // Intermediate terms are O(1) even when f cancels to something small, so
  // rounding is measured at no less than unit scale.
  const float mag = std::max({std::abs(f_up), std::abs(f_down), 1.0f});
  const double ulp =
      double(std::nextafter(mag, std::numeric_limits<float>::infinity())) -
      double(mag);
  return {(double(f_up) - double(f_down)) / width, ulp / width};
}

// Quadratic through f(x), f(x + d1), f(x + d2) with d2 = 2 d1, evaluated
// for its slope at x. `sign` picks the side.
template <typename Eval>
Difference OneSidedDifference(float& slot, float step, float sign, Eval&& eval) {
  const float original = slot;
  const float near = original + sign * 0.5f * step;
  const float far = original + sign * step;
  const float f0 = eval();
  slot = near;
  const float f1 = eval();
  slot = far;
  const float f2 = eval();
  slot = original;
  const double d1 = double(near) - double(original);
  const double d2 = double(far) - double(original);
  const double c1 = d2 / (d1 * (d2 - d1));
  const double c2 = -d1 / (d2 * (d2 - d1));
  const double c0 = -(c1 + c2);
  const float mag = std::max({std::abs(f0), std::abs(f1), std::abs(f2), 1.0f});
  const double ulp =
      double(std::nextafter(mag, std::numeric_limits<float>::infinity())) -
      double(mag);
  return {c0 * f0 + c1 * f1 + c2 * f2,
          0.5 * ulp * (std::abs(c0) + std::abs(c1) + std::abs(c2))};
}

double ErrorRatio(const GradCheckOptions& options, double analytic,
                  const Difference& d) {
  const double allowed =
      options.rel_tol * std::max(std::abs(analytic), std::abs(d.derivative)) +
      options.noise_ulps * d.quantum + options.abs_tol;
  return std::abs(analytic - d.derivative) / allowed;
}

template <typename Eval>
void Probe(GradCheckReport& report, const GradCheckOptions& options,
           const std::string& name, std::size_t index, double analytic,
           float& slot, Eval&& eval) {
  Difference d = CentralDifference(slot, options.step, eval);
  double err = ErrorRatio(options, analytic, d);
  if (err > 1.0 && options.retry_step > 0.0f) {
    const Difference retry = CentralDifference(slot, options.retry_step, eval);
    const double retry_err = ErrorRatio(options, analytic, retry);
    if (retry_err < err) {
      d = retry;
      err = retry_err;
    }
  }
  if (err > 1.0 && options.one_sided_step > 0.0f) {
    for (float h : {options.one_sided_step, 2.0f * options.one_sided_step}) {
      for (float sign : {1.0f, -1.0f}) {
        const Difference side = OneSidedDifference(slot, h, sign, eval);
        const double side_err = ErrorRatio(options, analytic, side);
        if (side_err < err) {
          d = side;
          err = side_err;
        }
      }
    }
  }
  const double numeric = d.derivative;
  ++report.checked;
  if (err > 1.0) {
    ++report.failures;
    report.passed = false;
  }
  if (err > report.worst_error || report.checked == 1) {
    report.worst_error = err;
    report.worst_name = name;
    report.worst_index = index;
    report.worst_analytic = analytic;
    report.worst_numeric = numeric;
  }
}

}  // namespace

std::string GradCheckReport::Describe() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << ": " << checked << " elements, "
     << failures << " over tolerance; worst " << worst_name << "["
     << worst_index << "] analytic=" << worst_analytic
     << " numeric=" << worst_numeric << " err/allowed=" << worst_error;
  return os.str();
}

GradCheckReport GradientCheck(const ScalarFn& f, const Tensor& x,
                              const GradCheckOptions& options) {
  Tensor analytic;
  {
    Tape tape;
    Var xv = tape.Leaf(x, true);
    Var y = f(tape, xv);
    ScalarOf(y);
    tape.Backward(y);
    analytic = xv.grad();
  }
  Tensor probe = x;
  auto eval = [&] {
    Tape tape;
    tape.set_grad_enabled(false);
    return ScalarOf(f(tape, tape.Constant(probe)));
  };
  GradCheckReport report;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    Probe(report, options, "x", i, analytic[i], probe[i], eval);
  }
  return report;
}

GradCheckReport GradientCheckParams(const ParamScalarFn& f,
                                    ParameterSet& params,
                                    const GradCheckOptions& options) {
  params.ZeroGrad();
  {
    Tape tape;
    Var y = f(tape);
    ScalarOf(y);
    tape.Backward(y);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    analytic.push_back(params[p].has_grad ? params[p].grad
                                          : Tensor(params[p].value.shape()));
  }
  params.ZeroGrad();
  auto eval = [&] {
    Tape tape;
    tape.set_grad_enabled(false);
    return ScalarOf(f(tape));
  };
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& param = params[p];
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      Probe(report, options, param.name, i, analytic[p][i], param.value[i],
            eval);
    }
  }
  return report;
}

}  // namespace saep
