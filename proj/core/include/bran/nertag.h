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

#ifndef BRAN_NERTAG_H_
#define BRAN_NERTAG_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "bran/corpus.h"
#include "bran/tape.h"

namespace bran {

// ner.weight [d, 5] and ner.bias [5], both zero-initialized.
void AddNerParams(int dim, ParamSet& params);
int64_t NerParamCount(int dim);

// c_i = W_N' b_i + bias -> [n, 5] logits.
Var NerScores(Tape& tape, ParamSet& params, Var encoded);

// Per-token softmax cross-entropy over unmasked tokens, divided by
// `normalizer` (default: the number of unmasked tokens).
Var NerLoss(Var logits, std::span<const BioTag> gold, std::span<const uint8_t> mask,
            double normalizer = 0.0);

// Greedy argmax per token; an I tag that cannot continue the previous tag
// is turned into the matching B tag.
std::vector<BioTag> DecodeBioTags(const Tensor& logits);

// Share of tokens whose decoded tag equals the gold tag.
double TagAccuracy(std::span<const BioTag> gold, std::span<const BioTag> predicted);

// CONLL-style lines: token TAB gold TAB predicted, blank line after the
// document.
void WriteConll(std::ostream& out, const Document& doc, const Vocabulary& vocab,
                std::span<const BioTag> gold, std::span<const BioTag> predicted);

}  // namespace bran

#endif  // BRAN_NERTAG_H_
