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

#ifndef BRAN_EVALKIT_H_
#define BRAN_EVALKIT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bran/corpus.h"

// Entity-level scoring, MeSH hypernym filtering, threshold tuning and
// ensembling of probability files.

namespace bran {

// (doc_id, chemical_id, disease_id)
using PairKey = std::tuple<std::string, std::string, std::string>;

struct PairPrediction {
  std::string doc_id;
  std::string chemical_id;
  std::string disease_id;
  double probability = 0.0;

  PairKey key() const { return {doc_id, chemical_id, disease_id}; }
  friend bool operator==(const PairPrediction&, const PairPrediction&) = default;
};

// entity id -> MeSH tree numbers ("C04.557.337"). An id is a proper
// ancestor of another when one of its tree numbers followed by "." is a
// prefix of one of the other's.
class MeshTree {
 public:
  void Add(const std::string& entity_id, const std::string& tree_number);
  bool empty() const { return tree_numbers_.empty(); }
  const std::vector<std::string>& TreeNumbers(const std::string& entity_id) const;
  bool IsProperAncestor(const std::string& ancestor, const std::string& descendant) const;

 private:
  std::map<std::string, std::vector<std::string>> tree_numbers_;
};

// TSV lines "entity_id<TAB>tree_number".
MeshTree ReadMeshTree(std::istream& in);
MeshTree LoadMeshTree(const std::string& path);

// Within each document, drops (c, d) when another prediction (c, d') has d'
// below d in the tree, or (c', d) has c' below c. Decisions are made
// against the unfiltered set, so the filter is idempotent.
std::vector<PairPrediction> FilterHypernyms(std::span<const PairPrediction> predictions,
                                            const MeshTree& tree);

// Applies the same rule to each document's gold relations.
void FilterTrainingHypernyms(std::span<Document> docs, const MeshTree& tree);

struct EvalCounts {
  int64_t true_positives = 0;
  int64_t false_positives = 0;
  int64_t false_negatives = 0;
};

struct EvalReport {
  EvalCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, EvalCounts> per_document;
};

// Micro-averaged set comparison. Duplicate keys count once.
EvalReport Score(std::span<const PairKey> predicted, std::span<const PairKey> gold);

std::vector<PairKey> GoldKeys(std::span<const Document> docs);
// Keys of predictions with probability >= theta.
std::vector<PairKey> Threshold(std::span<const PairPrediction> predictions, double theta);

struct ThresholdChoice {
  double theta = 1.0;
  double f1 = 0.0;
};

// Tries every distinct probability as the threshold and returns the one
// with the highest F1 (the smallest such threshold on ties). With no
// predictions the choice is {1.0, 0.0}.
ThresholdChoice SweepThreshold(std::span<const PairPrediction> predictions,
                               std::span<const PairKey> gold);

// Mean positive probability per pair across runs. Every run must cover the
// same pairs; otherwise a ContractError lists the difference.
std::vector<PairPrediction> Ensemble(std::span<const std::vector<PairPrediction>> runs);

// Sorted by doc_id, then descending probability, then entity ids.
void SortPredictions(std::vector<PairPrediction>& predictions);

// "doc_id<TAB>chemical_id<TAB>disease_id<TAB>probability" lines.
void WritePredictions(std::ostream& out, std::vector<PairPrediction> predictions);
std::vector<PairPrediction> ReadPredictions(std::istream& in);
void SavePredictions(const std::string& path, std::vector<PairPrediction> predictions);
std::vector<PairPrediction> LoadPredictions(const std::string& path);

}  // namespace bran

#endif  // BRAN_EVALKIT_H_
