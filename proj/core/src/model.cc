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

#include "bran/model.h"

#include <random>

#include "bran/error.h"
#include "bran/nertag.h"
#include "bran/ops.h"
#include "bran/relscore.h"

namespace bran {
namespace {

ParamSet InitParams(const ModelSpec& spec, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet params;
  AddEncoderParams(spec.encoder, spec.vocab_size, params, rng);
  AddRelScoreParams(spec.encoder.dim, spec.num_relations, params, rng);
  if (spec.ner_head) AddNerParams(spec.encoder.dim, params);
  return params;
}

}  // namespace

BranModel::BranModel(ModelSpec spec, uint64_t seed)
    : spec_(std::move(spec)), params_(InitParams(spec_, seed)) {}

BranModel::BranModel(ModelSpec spec, ParamSet params) : spec_(std::move(spec)) {
  params_ = InitParams(spec_, 0);
  if (params.size() != params_.size()) {
    throw ContractError("parameter set has " + std::to_string(params.size()) +
                        " entries, model expects " + std::to_string(params_.size()));
  }
  params_.CopyValuesFrom(params);
}

int64_t BranModel::ExpectedParamCount(const ModelSpec& spec) {
  int64_t count = EncoderParamCount(spec.encoder, spec.vocab_size) +
                  RelScoreParamCount(spec.encoder.dim, spec.num_relations);
  if (spec.ner_head) count += NerParamCount(spec.encoder.dim);
  return count;
}

BranModel::Output BranModel::Forward(Tape& tape, const Document& doc,
                                     std::span<const int> token_ids, const Dropout& dropout) {
  Output out;
  out.encoded = Encode(tape, params_, spec_.encoder, token_ids, {}, dropout);
  HeadTail projected = ProjectHeadTail(tape, params_, out.encoded);
  out.affinity = Biaffine(tape, params_, projected.head, projected.tail);
  if (!doc.candidates.empty()) {
    std::vector<Var> rows;
    rows.reserve(doc.candidates.size());
    for (const CandidatePair& pair : doc.candidates) {
      rows.push_back(Reshape(PoolEntityPair(out.affinity, pair.cells), {1, spec_.num_relations}));
    }
    out.pair_scores = rows.size() == 1 ? rows.front() : Concat(rows, 0);
  }
  if (spec_.ner_head) out.ner_logits = NerScores(tape, params_, out.encoded);
  return out;
}

std::vector<double> BranModel::PredictProbabilities(const Document& doc) const {
  std::vector<double> probs;
  if (doc.candidates.empty()) return probs;
  Tape tape(/*record_gradients=*/false);
  // Forward never writes to parameters when gradients are not recorded.
  auto& self = const_cast<BranModel&>(*this);
  Output out = self.Forward(tape, doc);
  const Tensor& scores = out.pair_scores.value();
  const int64_t relations = scores.dim(1);
  probs.reserve(doc.candidates.size());
  for (int64_t c = 0; c < scores.dim(0); ++c) {
    Tensor row({relations});
    for (int64_t r = 0; r < relations; ++r) row[r] = scores[c * relations + r];
    probs.push_back(RelationProbabilities(row)[static_cast<size_t>(RelationLabel::kCid)]);
  }
  return probs;
}

}  // namespace bran
