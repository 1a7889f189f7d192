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

#include "bran/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "bran/error.h"
#include "bran/utf8.h"

namespace bran {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Byte ranges of maximal non-whitespace runs.
std::vector<CharSpan> WordSpans(std::string_view text) {
  std::vector<CharSpan> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    if (i >= text.size()) break;
    size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    words.push_back({static_cast<int64_t>(i), static_cast<int64_t>(j)});
    i = j;
  }
  return words;
}

struct Symbol {
  std::string text;
  CharSpan span;
};

// Merges every left-to-right occurrence of (left, right) in place.
template <typename Item, typename GetText, typename Combine>
void MergePair(std::vector<Item>& items, std::string_view left,
               std::string_view right, GetText get_text, Combine combine) {
  std::vector<Item> merged;
  merged.reserve(items.size());
  size_t i = 0;
  while (i < items.size()) {
    if (i + 1 < items.size() && get_text(items[i]) == left &&
        get_text(items[i + 1]) == right) {
      merged.push_back(combine(items[i], items[i + 1]));
      i += 2;
    } else {
      merged.push_back(std::move(items[i]));
      ++i;
    }
  }
  items = std::move(merged);
}

std::vector<Symbol> InitialSymbolsWithSpans(std::string_view text, CharSpan word) {
  std::vector<Symbol> symbols;
  const std::string_view w = text.substr(static_cast<size_t>(word.start),
                                         static_cast<size_t>(word.end - word.start));
  size_t i = 0;
  while (i < w.size()) {
    size_t len = std::min(w.size() - i,
                          static_cast<size_t>(Utf8SequenceLength(static_cast<unsigned char>(w[i]))));
    Symbol s{std::string(w.substr(i, len)),
             {word.start + static_cast<int64_t>(i), word.start + static_cast<int64_t>(i + len)}};
    symbols.push_back(std::move(s));
    i += len;
  }
  if (!symbols.empty()) symbols.back().text += kEndOfWord;
  return symbols;
}

std::string StripEndOfWord(const std::string& token) {
  if (token.size() >= kEndOfWord.size() &&
      token.compare(token.size() - kEndOfWord.size(), kEndOfWord.size(), kEndOfWord) == 0) {
    return token.substr(0, token.size() - kEndOfWord.size());
  }
  return token;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> alphabet,
                       std::vector<MergeRule> merges, int budget)
    : alphabet_(std::move(alphabet)), merges_(std::move(merges)), budget_(budget) {
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  auto add = [this](const std::string& token) {
    if (token_to_id_.count(token) != 0) return;
    token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
    id_to_token_.push_back(token);
  };
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
  for (const std::string& symbol : alphabet_) {
    if (symbol.empty()) throw ParseError("empty alphabet symbol");
    add(symbol);
  }
  for (size_t r = 0; r < merges_.size(); ++r) {
    const auto& [left, right] = merges_[r];
    if (token_to_id_.count(left) == 0 || token_to_id_.count(right) == 0) {
      throw ParseError("merge " + std::to_string(r) + " (" + left + ", " + right +
                       ") uses a token not yet in the vocabulary");
    }
    merge_rank_.emplace(merges_[r], static_cast<int>(r));
    add(left + right);
  }
}

int Vocabulary::Id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? -1 : it->second;
}

const std::string& Vocabulary::Token(int id) const {
  if (id < 0 || id >= size()) {
    throw LookupError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(size()));
  }
  return id_to_token_[static_cast<size_t>(id)];
}

int Vocabulary::MergeRank(std::string_view left, std::string_view right) const {
  auto it = merge_rank_.find(std::pair<std::string, std::string>(left, right));
  return it == merge_rank_.end() ? -1 : it->second;
}

std::vector<std::string> InitialSymbols(std::string_view word) {
  std::vector<std::string> symbols = SplitCodePoints(word);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

Vocabulary TrainBpe(std::span<const std::string> corpus, int budget) {
  if (corpus.empty()) throw ConfigError("BPE training corpus is empty");
  if (budget < 0) throw ConfigError("BPE budget must be >= 0");

  std::map<std::string, int64_t> word_counts;
  for (const std::string& text : corpus) {
    for (CharSpan w : WordSpans(text)) {
      ++word_counts[text.substr(static_cast<size_t>(w.start),
                                static_cast<size_t>(w.end - w.start))];
    }
  }
  if (word_counts.empty()) throw ConfigError("BPE training corpus has no words");

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> counts;
  std::set<std::string> alphabet;
  for (const auto& [word, count] : word_counts) {
    words.push_back(InitialSymbols(word));
    counts.push_back(count);
    alphabet.insert(words.back().begin(), words.back().end());
  }

  std::vector<MergeRule> merges;
  while (static_cast<int>(merges.size()) < budget) {
    std::map<std::pair<std::string_view, std::string_view>, int64_t> pair_counts;
    for (size_t w = 0; w < words.size(); ++w) {
      const auto& symbols = words[w];
      for (size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += counts[w];
      }
    }
    if (pair_counts.empty()) break;
    // std::map iterates in (left, right) order, so the first maximum is the
    // lexicographically smallest among ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    MergeRule rule{std::string(best->first.first), std::string(best->first.second)};
    for (auto& symbols : words) {
      MergePair(
          symbols, rule.first, rule.second,
          [](const std::string& s) -> const std::string& { return s; },
          [](const std::string& a, const std::string& b) { return a + b; });
    }
    merges.push_back(std::move(rule));
  }
  return Vocabulary(std::vector<std::string>(alphabet.begin(), alphabet.end()),
                    std::move(merges), budget);
}

namespace {

void ApplyMergesInPlace(const Vocabulary& vocab, std::vector<Symbol>& symbols) {
  while (symbols.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    size_t best = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      const int rank = vocab.MergeRank(symbols[i].text, symbols[i + 1].text);
      if (rank >= 0 && rank < best_rank) {
        best_rank = rank;
        best = i;
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    const std::string left = symbols[best].text;
    const std::string right = symbols[best + 1].text;
    MergePair(
        symbols, left, right, [](const Symbol& s) -> const std::string& { return s.text; },
        [](const Symbol& a, const Symbol& b) {
          return Symbol{a.text + b.text, {a.span.start, b.span.end}};
        });
  }
}

}  // namespace

std::vector<std::string> ApplyMerges(const Vocabulary& vocab, std::string_view word) {
  std::vector<Symbol> symbols = InitialSymbolsWithSpans(word, {0, static_cast<int64_t>(word.size())});
  ApplyMergesInPlace(vocab, symbols);
  std::vector<std::string> out;
  for (auto& s : symbols) out.push_back(std::move(s.text));
  return out;
}

TokenizedText Encode(const Vocabulary& vocab, std::string_view text) {
  TokenizedText out;
  out.text_length = static_cast<int64_t>(text.size());
  for (CharSpan word : WordSpans(text)) {
    std::vector<Symbol> symbols = InitialSymbolsWithSpans(text, word);
    ApplyMergesInPlace(vocab, symbols);
    for (const Symbol& s : symbols) {
      int id = vocab.Id(s.text);
      if (id < 0) {
        // A character seen only inside words has no "</w>" form; fall back
        // to the bare character before giving up.
        id = vocab.Id(StripEndOfWord(s.text));
      }
      out.token_ids.push_back(id < 0 ? vocab.unk_id() : id);
      out.token_spans.push_back(s.span);
    }
  }
  return out;
}

std::string Decode(const Vocabulary& vocab, const TokenizedText& tokens) {
  std::string text(static_cast<size_t>(tokens.text_length), ' ');
  for (size_t i = 0; i < tokens.token_ids.size(); ++i) {
    const int id = tokens.token_ids[i];
    if (id == vocab.pad_id()) continue;
    const CharSpan span = tokens.token_spans[i];
    std::string piece;
    if (id == vocab.unk_id()) {
      piece.assign(static_cast<size_t>(span.end - span.start), '?');
    } else {
      piece = StripEndOfWord(vocab.Token(id));
    }
    if (static_cast<int64_t>(piece.size()) != span.end - span.start) {
      throw ContractError("token '" + piece + "' does not fit its span");
    }
    text.replace(static_cast<size_t>(span.start), piece.size(), piece);
  }
  return text;
}

std::pair<int, int> AlignSpan(const TokenizedText& tokens, int64_t char_start,
                              int64_t char_end) {
  if (char_start < 0 || char_end <= char_start || char_end > tokens.text_length) {
    throw ContractError("invalid character span [" + std::to_string(char_start) + ", " +
                        std::to_string(char_end) + ") for text of length " +
                        std::to_string(tokens.text_length));
  }
  const auto& spans = tokens.token_spans;
  auto first = std::partition_point(spans.begin(), spans.end(),
                                    [&](const CharSpan& s) { return s.end <= char_start; });
  if (first == spans.end() || first->start >= char_end) {
    throw AlignmentError("span [" + std::to_string(char_start) + ", " +
                         std::to_string(char_end) + ") covers no token");
  }
  auto last = std::partition_point(first, spans.end(),
                                   [&](const CharSpan& s) { return s.start < char_end; });
  return {static_cast<int>(first - spans.begin()),
          static_cast<int>(last - spans.begin()) - 1};
}

void WriteVocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "bpe-v1 " << vocab.budget() << '\n';
  for (const auto& [left, right] : vocab.merges()) out << left << '\t' << right << '\n';
  for (const std::string& symbol : vocab.alphabet()) out << symbol << '\n';
}

Vocabulary ReadVocabulary(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty vocabulary file");
  std::istringstream header(line);
  std::string magic;
  int budget = -1;
  header >> magic >> budget;
  if (magic != "bpe-v1" || budget < 0 || !header.eof()) {
    throw ParseError("bad vocabulary header '" + line + "'");
  }
  std::vector<MergeRule> merges;
  std::vector<std::string> alphabet;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError("empty line " + std::to_string(line_no) + " in vocabulary");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      alphabet.push_back(line);
      continue;
    }
    if (line.find('\t', tab + 1) != std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError("malformed merge on line " + std::to_string(line_no));
    }
    merges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  // Files that carry only merges still work: every base symbol a merge
  // mentions is added to the alphabet.
  std::set<std::string> known(alphabet.begin(), alphabet.end());
  for (const auto& [left, right] : merges) {
    for (const std::string* part : {&left, &right}) {
      if (known.count(*part) == 0) {
        alphabet.push_back(*part);
        known.insert(*part);
      }
    }
    known.insert(left + right);
  }
  return Vocabulary(std::move(alphabet), std::move(merges), budget);
}

void SaveVocabulary(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WriteVocabulary(out, vocab);
}

Vocabulary LoadVocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return ReadVocabulary(in);
}

}  // namespace bran
