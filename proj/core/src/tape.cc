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

#include "bran/tape.h"

#include "bran/error.h"

namespace bran {

ParamSet::ParamSet(const ParamSet& other) { *this = other; }

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this == &other) return *this;
  params_.clear();
  index_ = other.index_;
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) {
    params_.push_back(std::make_unique<Parameter>(*p));
  }
  return *this;
}

Parameter& ParamSet::Add(std::string name, Tensor init) {
  if (index_.count(name) != 0) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  index_.emplace(name, params_.size());
  params_.push_back(
      std::make_unique<Parameter>(Parameter{std::move(name), std::move(init), {}}));
  return *params_.back();
}

bool ParamSet::Contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

Parameter& ParamSet::Get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw LookupError("no parameter named '" + std::string(name) + "'");
  }
  return *params_[it->second];
}

const Parameter& ParamSet::Get(std::string_view name) const {
  return const_cast<ParamSet*>(this)->Get(name);
}

int64_t ParamSet::NumScalars() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamSet::ZeroGrad() {
  for (auto& p : params_) {
    if (p->grad.shape() != p->value.shape()) {
      p->grad = Tensor(p->value.shape());
    } else {
      p->grad.Fill(0.0);
    }
  }
}

void ParamSet::CopyValuesFrom(const ParamSet& other) {
  if (other.size() != size()) {
    throw ContractError("parameter sets differ in size");
  }
  for (size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = other[i];
    Parameter& dst = *params_[i];
    if (src.name != dst.name || src.value.shape() != dst.value.shape()) {
      throw ContractError("parameter mismatch at '" + dst.name + "'");
    }
    dst.value = src.value;
  }
}

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->nodes_[static_cast<size_t>(index_)].value;
}

Var Tape::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Param(Parameter& param) {
  auto it = param_leaves_.find(&param);
  if (it != param_leaves_.end()) return Var(this, it->second);
  nodes_.push_back(Node{param.value, {}, {}, &param, record_gradients_});
  int index = static_cast<int>(nodes_.size()) - 1;
  param_leaves_.emplace(&param, index);
  return Var(this, index);
}

Var Tape::Record(Tensor value, bool needs_grad, BackwardFn backward) {
  needs_grad = needs_grad && record_gradients_;
  nodes_.push_back(Node{std::move(value), {}, needs_grad ? std::move(backward) : BackwardFn{},
                        nullptr, needs_grad});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

bool Tape::NeedsGrad(Var v) const {
  return nodes_[static_cast<size_t>(v.index())].needs_grad;
}

bool Tape::NeedsGrad(std::initializer_list<Var> vars) const {
  for (Var v : vars) {
    if (NeedsGrad(v)) return true;
  }
  return false;
}

Tensor& Tape::Grad(Var v) {
  Node& node = nodes_[static_cast<size_t>(v.index())];
  if (node.grad.shape() != node.value.shape() || node.grad.size() != node.value.size()) {
    node.grad = Tensor(node.value.shape());
  }
  return node.grad;
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw ContractError("loss is not on this tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        ShapeToString(loss.shape()));
  }
  if (!NeedsGrad(loss)) return;
  Grad(loss)[0] += 1.0;
  for (int i = loss.index(); i >= 0; --i) {
    Node& node = nodes_[static_cast<size_t>(i)];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (node.param != nullptr) {
      Tensor& dst = node.param->grad;
      if (dst.shape() != node.value.shape()) dst = Tensor(node.value.shape());
      auto g = node.grad.values();
      auto d = dst.values();
      for (size_t k = 0; k < g.size(); ++k) d[k] += g[k];
    } else if (node.backward) {
      node.backward(node.grad);
    }
  }
}

}  // namespace bran
