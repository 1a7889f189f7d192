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

#include "bran/nertag.h"

#include <ostream>

#include "bran/error.h"
#include "bran/ops.h"

namespace bran {

void AddNerParams(int dim, ParamSet& params) {
  params.Add("ner.weight", Tensor({dim, kNumBioTags}));
  params.Add("ner.bias", Tensor({kNumBioTags}));
}

int64_t NerParamCount(int dim) { return int64_t{dim} * kNumBioTags + kNumBioTags; }

Var NerScores(Tape& tape, ParamSet& params, Var encoded) {
  return AddBias(MatMul(encoded, tape.Param(params.Get("ner.weight"))),
                 tape.Param(params.Get("ner.bias")));
}

Var NerLoss(Var logits, std::span<const BioTag> gold, std::span<const uint8_t> mask,
            double normalizer) {
  std::vector<int> labels;
  labels.reserve(gold.size());
  for (BioTag tag : gold) labels.push_back(static_cast<int>(tag));
  return SoftmaxCrossEntropy(logits, labels, mask, normalizer);
}

std::vector<BioTag> DecodeBioTags(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) != kNumBioTags) {
    throw DimensionError("NER logits must be [n, 5], got " + ShapeToString(logits.shape()));
  }
  const int64_t n = logits.dim(0);
  std::vector<BioTag> tags;
  tags.reserve(static_cast<size_t>(n));
  BioTag prev = BioTag::kOutside;
  for (int64_t i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < kNumBioTags; ++c) {
      if (logits[i * kNumBioTags + c] > logits[i * kNumBioTags + best]) best = c;
    }
    auto tag = static_cast<BioTag>(best);
    if (tag == BioTag::kInsideChemical && prev != BioTag::kBeginChemical &&
        prev != BioTag::kInsideChemical) {
      tag = BioTag::kBeginChemical;
    } else if (tag == BioTag::kInsideDisease && prev != BioTag::kBeginDisease &&
               prev != BioTag::kInsideDisease) {
      tag = BioTag::kBeginDisease;
    }
    tags.push_back(tag);
    prev = tag;
  }
  return tags;
}

double TagAccuracy(std::span<const BioTag> gold, std::span<const BioTag> predicted) {
  if (gold.size() != predicted.size()) {
    throw DimensionError("tag sequences differ in length");
  }
  if (gold.empty()) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) correct += gold[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

void WriteConll(std::ostream& out, const Document& doc, const Vocabulary& vocab,
                std::span<const BioTag> gold, std::span<const BioTag> predicted) {
  const auto& ids = doc.tokens.token_ids;
  if (gold.size() != ids.size() || predicted.size() != ids.size()) {
    throw DimensionError("tag sequences do not match the document's tokens");
  }
  for (size_t i = 0; i < ids.size(); ++i) {
    out << vocab.Token(ids[i]) << '\t' << BioTagName(gold[i]) << '\t'
        << BioTagName(predicted[i]) << '\n';
  }
  out << '\n';
}

}  // namespace bran
