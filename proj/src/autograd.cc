// src/autograd.cc


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

#include "saep/autograd.hpp"

#include <algorithm>

#include "saep/error.hpp"

namespace saep {

void Parameter::ZeroGrad() {
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  else grad.Fill(0.0f);
  has_grad = false;
}

Parameter& ParameterSet::Add(const std::string& name, Tensor value) {
  if (name.empty()) Fail(ErrorCode::kInvalidArgument, "empty parameter name");
  if (Find(name))
    Fail(ErrorCode::kInvalidArgument, "duplicate parameter name " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(value.shape());
  p->value = std::move(value);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterSet::Find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const Parameter* ParameterSet::Find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

Parameter& ParameterSet::Get(const std::string& name) {
  Parameter* p = Find(name);
  if (!p) Fail(ErrorCode::kUnresolvedId, "no parameter named " + name);
  return *p;
}

std::size_t ParameterSet::NumElements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto& p : params_) p->ZeroGrad();
}

const Tensor& Var::value() const { return tape_->ValueOf(*this); }
const Tensor& Var::grad() const { return tape_->GradOf(*this); }
bool Var::requires_grad() const { return tape_->RequiresGrad(*this); }

Tape::Node& Tape::NodeOf(Var v) {
  if (v.tape_ != this || v.id_ >= nodes_.size())
    Fail(ErrorCode::kContract, "variable does not belong to this tape");
  return nodes_[v.id_];
}

const Tape::Node& Tape::NodeOf(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size())
    Fail(ErrorCode::kContract, "variable does not belong to this tape");
  return nodes_[v.id_];
}

Var Tape::Constant(Tensor value) { return Leaf(std::move(value), false); }

Var Tape::Leaf(Tensor value, bool requires_grad) {
  value.CheckFinite("leaf tensor");
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  return Var(this, nodes_.size() - 1);
}

Var Tape::Param(Parameter& p) {
  Node& n = nodes_.emplace_back();
  n.ref = &p.value;
  n.requires_grad = grad_enabled_;
  n.param = grad_enabled_ ? &p : nullptr;
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::initializer_list<Var> inputs,
                 BackwardFn fn) {
  value.CheckFinite("op output");
  bool any = false;
  for (Var in : inputs) any = any || NodeOf(in).requires_grad;
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = any && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(fn);
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(Var loss) {
  Node& root = NodeOf(loss);
  if (root.value().size() != 1)
    Fail(ErrorCode::kContract, "backward needs a scalar loss, got shape " +
                                   ShapeToString(root.value().shape()));
  if (!root.requires_grad)
    Fail(ErrorCode::kContract, "loss does not depend on any gradient leaf");
  GradFor(loss)->Fill(1.0f);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backward && n.grad_allocated) n.backward(n.value(), n.grad, *this);
  }
  for (std::size_t i = 0; i <= loss.id_; ++i) {
    Node& n = nodes_[i];
    if (!n.param) continue;
    Parameter& p = *n.param;
    if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
    if (n.grad_allocated) {
      float* dst = p.grad.ptr();
      const float* src = n.grad.ptr();
      for (std::size_t k = 0; k < p.grad.size(); ++k) dst[k] += src[k];
    }
    p.has_grad = true;
  }
}

const Tensor& Tape::ValueOf(Var v) const { return NodeOf(v).value(); }

bool Tape::RequiresGrad(Var v) const { return NodeOf(v).requires_grad; }

Tensor* Tape::GradFor(Var v) {
  Node& n = NodeOf(v);
  if (!n.requires_grad) return nullptr;
  if (!n.grad_allocated) {
    n.grad = Tensor(n.value().shape());
    n.grad_allocated = true;
  }
  return &n.grad;
}

const Tensor& Tape::GradOf(Var v) {
  Node& n = NodeOf(v);
  if (!n.grad_allocated) {
    n.grad = Tensor(n.value().shape());
    n.grad_allocated = true;
  }
  return n.grad;
}

}  // namespace saep
