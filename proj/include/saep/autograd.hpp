// saep/autograd.hpp


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

#ifndef SAEP_AUTOGRAD_HPP_
#define SAEP_AUTOGRAD_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "saep/tensor.hpp"

namespace saep {

// A named trainable tensor. `grad` is populated by Tape::Backward and
// cleared (zeroed, has_grad = false) by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool has_grad = false;

  void ZeroGrad();
};

// Owns parameters at stable addresses; names are unique and non-empty.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  Parameter& Add(const std::string& name, Tensor value);
  Parameter* Find(const std::string& name);
  const Parameter* Find(const std::string& name) const;
  Parameter& Get(const std::string& name);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }
  std::size_t NumElements() const;
  void ZeroGrad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient after Tape::Backward; zeros if nothing flowed here.
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Dynamically recorded reverse-mode tape. One tape per forward pass; nodes
// are appended in evaluation order and Backward walks them in reverse.
class Tape {
 public:
  // Receives the op's output value and gradient; accumulates into inputs
  // via GradFor.
  using BackwardFn = std::function<void(const Tensor& out_value,
                                        const Tensor& out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // With gradients disabled no backward closures are kept; used for
  // inference.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  Var Constant(Tensor value);
  Var Leaf(Tensor value, bool requires_grad = true);
  // References p.value without copying; p must outlive the tape.
  Var Param(Parameter& p);

  // Records an op output. `fn` is dropped when no input requires grad.
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must have one element.
  // Parameter gradients are accumulated into Parameter::grad.
  void Backward(Var loss);

  const Tensor& ValueOf(Var v) const;
  bool RequiresGrad(Var v) const;
  // Gradient accumulator for v, zero-initialised on first use; nullptr when
  // v does not require grad.
  Tensor* GradFor(Var v);
  // Zeros when nothing flowed to v.
  const Tensor& GradOf(Var v);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool grad_allocated = false;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;

    const Tensor& value() const { return ref ? *ref : owned; }
  };

  Node& NodeOf(Var v);
  const Node& NodeOf(Var v) const;

  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace saep

#endif  // SAEP_AUTOGRAD_HPP_
