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

#ifndef BRAN_TAPE_H_
#define BRAN_TAPE_H_

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bran/tensor.h"

namespace bran {

// A named learnable array plus its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value once ZeroGrad() has run
};

// Ordered collection of parameters. Insertion order is the canonical order
// used by the optimizer, the checkpoint writer and gradient checking.
// Parameter addresses are stable for the lifetime of the set.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  Parameter& Add(std::string name, Tensor init);
  bool Contains(std::string_view name) const;
  Parameter& Get(std::string_view name);
  const Parameter& Get(std::string_view name) const;

  size_t size() const { return params_.size(); }
  Parameter& operator[](size_t i) { return *params_[i]; }
  const Parameter& operator[](size_t i) const { return *params_[i]; }

  // Total number of scalar entries across all parameters.
  int64_t NumScalars() const;
  void ZeroGrad();
  // Copies values (not gradients) from a set with identical names/shapes.
  void CopyValuesFrom(const ParamSet& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, size_t> index_;
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  int index_ = -1;
};

// Records executed primitives for reverse-mode differentiation. Nodes are
// appended in execution order, so every node's inputs precede it and a
// reverse sweep visits each node after all of its consumers.
class Tape {
 public:
  // Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(const Tensor& grad_out)>;

  // With record_gradients = false no backward closures are kept; useful for
  // evaluation passes.
  explicit Tape(bool record_gradients = true)
      : record_gradients_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // Leaf bound to a parameter; Backward() accumulates into param.grad.
  // Repeated calls with the same parameter return the same leaf.
  Var Param(Parameter& param);

  // Appends a computed node. `backward` is dropped when no input needs a
  // gradient.
  Var Record(Tensor value, bool needs_grad, BackwardFn backward);

  bool NeedsGrad(Var v) const;
  bool NeedsGrad(std::initializer_list<Var> vars) const;
  // Gradient buffer of `v`, allocated as zeros on first access.
  Tensor& Grad(Var v);

  // Reverse sweep from a single-element loss. Parameter gradients are
  // accumulated (+=), so call ParamSet::ZeroGrad() between steps.
  void Backward(Var loss);

  bool recording() const { return record_gradients_; }
  size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_leaves_;
  bool record_gradients_;
};

}  // namespace bran

#endif  // BRAN_TAPE_H_
