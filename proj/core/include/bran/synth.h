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

#ifndef BRAN_SYNTH_H_
#define BRAN_SYNTH_H_

#include <cstdint>
#include <string>

// Planted-pattern corpus: a chemical and a disease linked through the
// trigger word "induced" form a CID pair, every other chemical/disease
// combination in the document is negative. A configurable share of the
// positives spreads the two mentions over adjacent sentences.

namespace bran {

struct SynthOptions {
  int train_docs = 50;
  int dev_docs = 15;
  double cross_sentence_share = 0.3;
  uint64_t seed = 1;
};

struct SynthCorpus {
  std::string train_pubtator;
  std::string dev_pubtator;
  // Flat MeSH-style tree ("id<TAB>tree_number") for every entity used.
  std::string mesh_tsv;
  int positive_pairs = 0;
  int cross_sentence_pairs = 0;
};

SynthCorpus MakeSynthCorpus(const SynthOptions& options);

}  // namespace bran

#endif  // BRAN_SYNTH_H_
