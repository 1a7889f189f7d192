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

#ifndef BRAN_CORPUS_H_
#define BRAN_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bran/tokenizer.h"

// PubTator documents, entity grouping, BIO tags, candidate entity pairs and
// polarity-balanced minibatch sampling.

namespace bran {

enum class EntityType { kChemical = 0, kDisease = 1 };

std::string_view EntityTypeName(EntityType type);
// Throws ParseError for anything other than "Chemical" / "Disease".
EntityType ParseEntityType(std::string_view name);

enum class RelationLabel { kNull = 0, kCid = 1 };
inline constexpr int kNumRelations = 2;

struct Mention {
  int64_t char_start = 0;  // byte offsets into Document::text
  int64_t char_end = 0;
  std::string surface;
  EntityType type = EntityType::kChemical;
  // Raw identifier as written in the file; composite ids ("D1|D2") make the
  // mention a member of several entities.
  std::string entity_id;
  // Inclusive token range, filled in by TokenizeDocument (-1 before).
  int first_token = -1;
  int last_token = -1;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Entity {
  std::string entity_id;
  EntityType type = EntityType::kChemical;
  std::vector<int> mentions;  // indices into Document::mentions
  friend bool operator==(const Entity&, const Entity&) = default;
};

// One (chemical head, disease tail) entity pair and the affinity-tensor
// cells pooled for it.
struct CandidatePair {
  int head = -1;  // index into Document::entities (a chemical)
  int tail = -1;  // index into Document::entities (a disease)
  RelationLabel label = RelationLabel::kNull;
  std::vector<std::pair<int, int>> cells;  // (head token, tail token)
  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

using RelationKey = std::pair<std::string, std::string>;  // (chemical, disease)

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract_text;
  std::string text;  // title + " " + abstract
  std::vector<Mention> mentions;  // sorted by (start, end)
  std::vector<Entity> entities;   // sorted by (type, id)
  std::vector<RelationKey> gold_relations;  // sorted, unique
  TokenizedText tokens;
  std::vector<CandidatePair> candidates;

  friend bool operator==(const Document&, const Document&) = default;
};

// --- PubTator -------------------------------------------------------------

// Parses PubTator text. Offsets in mention lines are code point offsets
// into title + " " + abstract. Duplicate mention lines are dropped; of two
// overlapping mentions the longer is kept. Candidates are built with
// first-token cells once the document is tokenized, so the returned
// documents carry entities and gold relations but no tokens.
std::vector<Document> ParsePubtator(std::string_view content);
std::vector<Document> ReadPubtatorFile(const std::string& path);

void WritePubtator(std::ostream& out, std::span<const Document> docs);
std::string ToPubtator(std::span<const Document> docs);
void WritePubtatorFile(const std::string& path, std::span<const Document> docs);

// --- Tokens, tags and pairs -------------------------------------------------

enum class MentionCells { kFirst, kAll };

std::string_view MentionCellsName(MentionCells mode);
MentionCells ParseMentionCells(std::string_view name);

// Encodes the text, aligns every mention onto tokens and rebuilds the
// candidate pairs.
void TokenizeDocument(const Vocabulary& vocab, Document& doc,
                      MentionCells cells = MentionCells::kFirst);

enum class BioTag {
  kOutside = 0,
  kBeginChemical = 1,
  kInsideChemical = 2,
  kBeginDisease = 3,
  kInsideDisease = 4,
};
inline constexpr int kNumBioTags = 5;

std::string_view BioTagName(BioTag tag);
// True when no I-X follows O or a tag of another type, and the first tag is
// not an I tag.
bool IsValidBioSequence(std::span<const BioTag> tags);

std::vector<BioTag> MakeBioTags(const Document& doc);

// One candidate per (chemical entity, disease entity), chemical as head.
std::vector<CandidatePair> BuildPairs(const Document& doc,
                                      MentionCells cells = MentionCells::kFirst);

// --- Sampling --------------------------------------------------------------

enum class Polarity { kNegative = 0, kPositive = 1 };

// Documents grouped by whether they hold at least one positive / negative
// candidate.
struct PolarityIndex {
  std::vector<int> positive_docs;
  std::vector<int> negative_docs;
};

PolarityIndex BuildPolarityIndex(std::span<const Document> docs);

struct Minibatch {
  Polarity polarity = Polarity::kNegative;
  std::vector<int> doc_indices;  // sampled with replacement
};

// Flips a fair coin for the polarity, then samples `batch_size` documents
// containing a candidate of that polarity. When one polarity is absent the
// other is always used (logged once by the caller via BuildPolarityIndex).
Minibatch SampleMinibatch(const PolarityIndex& index, std::mt19937_64& rng,
                          int batch_size);

}  // namespace bran

#endif  // BRAN_CORPUS_H_
