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

#ifndef BRAN_MODEL_H_
#define BRAN_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bran/config.h"
#include "bran/corpus.h"
#include "bran/encoder.h"
#include "bran/tape.h"

namespace bran {

struct ModelSpec {
  EncoderConfig encoder;
  int vocab_size = 0;
  int num_relations = kNumRelations;
  bool ner_head = true;
};

// Encoder + relation scorer + optional NER classifier sharing one ParamSet.
class BranModel {
 public:
  // Fresh parameters drawn from `seed`.
  BranModel(ModelSpec spec, uint64_t seed);
  // Adopts existing parameters; names and shapes must match the spec.
  BranModel(ModelSpec spec, ParamSet params);

  const ModelSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // Parameter count predicted from the spec alone.
  static int64_t ExpectedParamCount(const ModelSpec& spec);

  struct Output {
    Var encoded;      // [n, d]
    Var affinity;     // [n, n, l]
    Var pair_scores;  // [candidates, l]; unset without candidates
    Var ner_logits;   // [n, 5]; unset without an NER head
  };

  // Runs the model over `token_ids` (normally doc.tokens.token_ids, or a
  // word-dropped copy of them) using the document's candidate cells.
  Output Forward(Tape& tape, const Document& doc, std::span<const int> token_ids,
                 const Dropout& dropout = {});
  Output Forward(Tape& tape, const Document& doc) {
    return Forward(tape, doc, doc.tokens.token_ids);
  }

  // Probability of the positive (CID) class for every candidate, in
  // candidate order.
  std::vector<double> PredictProbabilities(const Document& doc) const;

 private:
  ModelSpec spec_;
  ParamSet params_;
};

}  // namespace bran

#endif  // BRAN_MODEL_H_
