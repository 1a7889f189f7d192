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

#ifndef BRAN_RELSCORE_H_
#define BRAN_RELSCORE_H_

#include <random>
#include <span>
#include <utility>
#include <vector>

#include "bran/tape.h"

// Head/tail projections, the bi-affine affinity tensor and LogSumExp
// pooling of mention-pair cells into entity-pair scores.
//
//   e_head = W1 relu(W0 b + c0) + c1        (tail: independent weights)
//   A[i, j, r] = e_head_i' L_r e_tail_j + e_head_i' lb_r
//   score_r(pair) = log sum_{(i, j) in cells} exp(A[i, j, r])

namespace bran {

// Parameters: rel.{head,tail}.{hidden,out}.{weight,bias} ([d, d] / [d]),
// rel.bilinear ([l, d, d], the per-relation L_r) and rel.bias ([l, d], the
// per-relation lb_r). The bilinear tensor and its bias start at zero.
void AddRelScoreParams(int dim, int num_relations, ParamSet& params,
                       std::mt19937_64& rng);
int64_t RelScoreParamCount(int dim, int num_relations);

struct HeadTail {
  Var head;  // [n, d]
  Var tail;  // [n, d]
};

HeadTail ProjectHeadTail(Tape& tape, ParamSet& params, Var encoded);

// [n, n, l] affinity tensor.
Var Biaffine(Tape& tape, ParamSet& params, Var head, Var tail);

// Per-relation LogSumExp over the given (head token, tail token) cells of
// an [n, n, l] tensor -> [l]. Empty cells are a ContractError.
Var PoolEntityPair(Var affinity, std::span<const std::pair<int, int>> cells);

// Softmax of pooled [l] scores.
std::vector<double> RelationProbabilities(const Tensor& pooled);

}  // namespace bran

#endif  // BRAN_RELSCORE_H_
