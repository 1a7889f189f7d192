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

#ifndef BRAN_OPS_H_
#define BRAN_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bran/tape.h"
#include "bran/tensor.h"

// Differentiable primitives. Every function records one node on the tape of
// its inputs and throws DimensionError when operand shapes do not fit.

namespace bran {

// [n,k] x [k,m] -> [n,m]
Var MatMul(Var a, Var b);
// [b,n,k] x [b,k,m] -> [b,n,m]
Var BatchedMatMul(Var a, Var b);
// [n,m] -> [m,n]
Var Transpose(Var a);

Var Add(Var a, Var b);
// Adds a [m] bias to every trailing row of `a` ([..., m]).
Var AddBias(Var a, Var bias);
// Elementwise product.
Var Multiply(Var a, Var b);
Var Scale(Var a, double factor);
Var Relu(Var a);

// Numerically stable softmax along `axis` (max-shifted).
Var Softmax(Var a, int axis);
// Stable log(sum(exp(.))) reducing `axis`; the reduced axis is removed.
Var LogSumExp(Var a, int axis);

// Normalizes every vector along the last axis to zero mean and unit
// variance, then applies gain and bias ([d] each).
inline constexpr double kLayerNormEpsilon = 1e-6;
Var LayerNorm(Var x, Var gain, Var bias, double epsilon = kLayerNormEpsilon);

// Same-length 1-D convolution over a [n, c_in] sequence with a
// [width, c_in, c_out] kernel and a [c_out] bias. Width must be odd; the
// input is zero padded by width/2 on each side.
Var Conv1d(Var x, Var kernel, Var bias);

// Concatenates along `axis`; all other dimensions must agree.
Var Concat(std::span<const Var> parts, int axis);
// Stacks equally shaped tensors along a new trailing axis.
Var Stack(std::span<const Var> parts);

// Rows of a [V, d] table -> [ids.size(), d]. Throws LookupError on a bad id.
Var EmbeddingLookup(Var table, std::span<const int> ids);
// Rows of a [R, C] tensor (repeats allowed) -> [rows.size(), C].
Var GatherRows(Var a, std::span<const int64_t> rows);
// Slice a[index] along axis 0.
Var Select(Var a, int64_t index);
Var Reshape(Var a, Shape shape);

// Elementwise product with a constant mask (dropout keep/scale masks and
// padding masks).
Var ApplyMask(Var a, const Tensor& mask);

// Sum of all entries -> scalar.
Var Sum(Var a);

// Softmax cross-entropy of [n, C] logits against `labels`, summed over the
// rows whose mask entry is non-zero and divided by `normalizer` (the number
// of such rows when normalizer <= 0). An all-zero mask is a ContractError.
Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels,
                        std::span<const uint8_t> mask,
                        double normalizer = 0.0);

}  // namespace bran

#endif  // BRAN_OPS_H_
