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

#ifndef BRAN_TOKENIZER_H_
#define BRAN_TOKENIZER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

// Byte-pair encoding over whitespace-separated words.
//
// Words are split into code points and the final code point of every word
// carries the end-of-word marker kEndOfWord (so "ab" starts as {"a",
// "b</w>"}). Training repeatedly merges the most frequent adjacent symbol
// pair, breaking ties by the lexicographic order of (left, right). Merges
// never cross whitespace.

namespace bran {

inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

using MergeRule = std::pair<std::string, std::string>;

struct CharSpan {
  int64_t start = 0;  // byte offset, inclusive
  int64_t end = 0;    // byte offset, exclusive
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct TokenizedText {
  std::vector<int> token_ids;
  std::vector<CharSpan> token_spans;
  int64_t text_length = 0;  // bytes of the encoded text
  friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

// Learned merges plus the token <-> id maps. Ids are contiguous: PAD is 0,
// UNK is 1, then the initial symbols in sorted order, then one id per merge
// in merge order. Immutable once built, so Encode may run concurrently.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Builds the id maps from an alphabet and an ordered merge list. Every
  // merge must combine tokens that already exist at that point.
  Vocabulary(std::vector<std::string> alphabet, std::vector<MergeRule> merges,
             int budget);

  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  int pad_id() const { return kPadId; }
  int unk_id() const { return kUnkId; }
  int size() const { return static_cast<int>(id_to_token_.size()); }
  int budget() const { return budget_; }
  const std::vector<MergeRule>& merges() const { return merges_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }

  // -1 when the token is unknown.
  int Id(std::string_view token) const;
  const std::string& Token(int id) const;

  // Rank of a merge in learned order, or -1.
  int MergeRank(std::string_view left, std::string_view right) const;

 private:
  std::vector<std::string> alphabet_;
  std::vector<MergeRule> merges_;
  int budget_ = 0;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  std::map<std::pair<std::string, std::string>, int, std::less<>> merge_rank_;
};

// Learns up to `budget` merges from the corpus. Throws ConfigError on an
// empty corpus or a negative budget.
Vocabulary TrainBpe(std::span<const std::string> corpus, int budget);

// Symbols of one word before any merge, e.g. "ab" -> {"a", "b</w>"}.
std::vector<std::string> InitialSymbols(std::string_view word);
// Applies the vocabulary's merges to one word in learned order.
std::vector<std::string> ApplyMerges(const Vocabulary& vocab,
                                     std::string_view word);

TokenizedText Encode(const Vocabulary& vocab, std::string_view text);

// Reconstructs text from token ids and spans. Gaps between spans are
// filled with spaces and UNK tokens are rendered as "?" per code point.
std::string Decode(const Vocabulary& vocab, const TokenizedText& tokens);

// Minimal inclusive token range covering [char_start, char_end). Throws
// ContractError for an empty or out-of-range interval and AlignmentError
// when no token overlaps it.
std::pair<int, int> AlignSpan(const TokenizedText& tokens, int64_t char_start,
                              int64_t char_end);

// Vocabulary file: "bpe-v1 <budget>", one "left<TAB>right" line per merge
// in learned order, then one line per alphabet symbol (no TAB).
void WriteVocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary ReadVocabulary(std::istream& in);
void SaveVocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary LoadVocabulary(const std::string& path);

}  // namespace bran

#endif  // BRAN_TOKENIZER_H_
