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

#include "bran/relscore.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bran/encoder.h"
#include "bran/error.h"
#include "bran/ops.h"

namespace bran {

void AddRelScoreParams(int dim, int num_relations, ParamSet& params, std::mt19937_64& rng) {
  if (num_relations < 1) throw ConfigError("need at least one relation");
  for (const char* side : {"head", "tail"}) {
    for (const char* layer : {"hidden", "out"}) {
      const std::string prefix = std::string("rel.") + side + "." + layer + ".";
      params.Add(prefix + "weight", GlorotUniform({dim, dim}, dim, dim, rng));
      params.Add(prefix + "bias", Tensor({dim}));
    }
  }
  params.Add("rel.bilinear", Tensor({num_relations, dim, dim}));
  params.Add("rel.bias", Tensor({num_relations, dim}));
}

int64_t RelScoreParamCount(int dim, int num_relations) {
  const int64_t d = dim;
  return 4 * (d * d + d) + int64_t{num_relations} * d * d + int64_t{num_relations} * d;
}

HeadTail ProjectHeadTail(Tape& tape, ParamSet& params, Var encoded) {
  auto mlp = [&](const std::string& side) {
    auto affine = [&](Var x, const std::string& layer) {
      const std::string prefix = "rel." + side + "." + layer + ".";
      return AddBias(MatMul(x, tape.Param(params.Get(prefix + "weight"))),
                     tape.Param(params.Get(prefix + "bias")));
    };
    return affine(Relu(affine(encoded, "hidden")), "out");
  };
  return {mlp("head"), mlp("tail")};
}

Var Biaffine(Tape& tape, ParamSet& params, Var head, Var tail) {
  if (head.shape() != tail.shape() || head.value().rank() != 2) {
    throw DimensionError("biaffine operands " + ShapeToString(head.shape()) + " and " +
                         ShapeToString(tail.shape()));
  }
  const int64_t n = head.shape()[0], d = head.shape()[1];
  Var bilinear = tape.Param(params.Get("rel.bilinear"));
  Var bias = tape.Param(params.Get("rel.bias"));
  const int64_t relations = bilinear.shape()[0];
  if (bilinear.shape() != Shape{relations, d, d} || bias.shape() != Shape{relations, d}) {
    throw DimensionError("relation parameters " + ShapeToString(bilinear.shape()) + " / " +
                         ShapeToString(bias.shape()) + " for dim " + std::to_string(d));
  }
  // Append a constant 1 to every tail vector so the bias column rides along
  // with the bilinear form: [L_r | lb_r] [e_tail; 1].
  Var ones = tape.Constant(Tensor({n, 1}, 1.0));
  const Var tail_parts[] = {tail, ones};
  Var tail_t = Transpose(Concat(tail_parts, 1));  // [d + 1, n]
  std::vector<Var> slices;
  slices.reserve(static_cast<size_t>(relations));
  for (int64_t r = 0; r < relations; ++r) {
    const Var op_parts[] = {Select(bilinear, r), Reshape(Select(bias, r), {d, 1})};
    Var op = Concat(op_parts, 1);  // [d, d + 1]
    slices.push_back(MatMul(MatMul(head, op), tail_t));
  }
  return Stack(slices);
}

Var PoolEntityPair(Var affinity, std::span<const std::pair<int, int>> cells) {
  if (affinity.value().rank() != 3 || affinity.shape()[0] != affinity.shape()[1]) {
    throw DimensionError("affinity tensor must be [n, n, l], got " +
                         ShapeToString(affinity.shape()));
  }
  if (cells.empty()) throw ContractError("entity pair has no mention-pair cells");
  const int64_t n = affinity.shape()[0], relations = affinity.shape()[2];
  std::vector<int64_t> rows;
  rows.reserve(cells.size());
  for (auto [i, j] : cells) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw LookupError("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") outside " + std::to_string(n) + " tokens");
    }
    rows.push_back(int64_t{i} * n + j);
  }
  Var flat = Reshape(affinity, {n * n, relations});
  return LogSumExp(GatherRows(flat, rows), 0);
}

std::vector<double> RelationProbabilities(const Tensor& pooled) {
  std::vector<double> probs(pooled.values().begin(), pooled.values().end());
  if (probs.empty()) return probs;
  const double max_v = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_v);
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

}  // namespace bran
