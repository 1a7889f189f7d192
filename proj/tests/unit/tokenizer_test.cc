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

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bran/error.h"

namespace bran {
namespace {

std::vector<std::string> Tokens(const Vocabulary& vocab, const TokenizedText& t) {
  std::vector<std::string> out;
  for (int id : t.token_ids) out.push_back(vocab.Token(id));
  return out;
}

TEST(BpeTrainTest, MostFrequentPairFirst) {
  const std::vector<std::string> corpus = {"ab ab ac"};
  const Vocabulary vocab = TrainBpe(corpus, 1);
  ASSERT_EQ(vocab.merges().size(), 1u);
  EXPECT_EQ(vocab.merges()[0], MergeRule("a", "b</w>"));
}

TEST(BpeTrainTest, ZeroBudgetIsCharacterLevel) {
  const std::vector<std::string> corpus = {"ab ab ac"};
  const Vocabulary vocab = TrainBpe(corpus, 0);
  EXPECT_TRUE(vocab.merges().empty());
  // PAD, UNK, a, b</w>, c</w>
  EXPECT_EQ(vocab.size(), 5);
  EXPECT_EQ(vocab.alphabet(), (std::vector<std::string>{"a", "b</w>", "c</w>"}));
}

TEST(BpeTrainTest, StopsWhenNothingIsLeftToMerge) {
  const std::vector<std::string> corpus = {"ab"};
  const Vocabulary vocab = TrainBpe(corpus, 50);
  EXPECT_EQ(vocab.merges().size(), 1u);
  EXPECT_EQ(vocab.budget(), 50);
}

TEST(BpeTrainTest, Errors) {
  EXPECT_THROW(TrainBpe(std::vector<std::string>{}, 3), ConfigError);
  EXPECT_THROW(TrainBpe(std::vector<std::string>{"  "}, 3), ConfigError);
  EXPECT_THROW(TrainBpe(std::vector<std::string>{"a"}, -1), ConfigError);
}

TEST(BpeTrainTest, TiesBreakLexicographically) {
  // (a, b</w>) and (b, a</w>) occur once each.
  const std::vector<std::string> corpus = {"ba ab"};
  const Vocabulary vocab = TrainBpe(corpus, 1);
  EXPECT_EQ(vocab.merges()[0], MergeRule("a", "b</w>"));
}

TEST(BpeTrainTest, LargerBudgetOnlyAppends) {
  const std::vector<std::string> corpus = {"the cat sat on the mat with the hat", "that is that"};
  const Vocabulary small = TrainBpe(corpus, 4);
  const Vocabulary large = TrainBpe(corpus, 12);
  ASSERT_LE(small.merges().size(), large.merges().size());
  for (size_t i = 0; i < small.merges().size(); ++i) {
    EXPECT_EQ(small.merges()[i], large.merges()[i]);
    EXPECT_GE(small.Id(small.merges()[i].first + small.merges()[i].second), 0);
  }
}

TEST(VocabularyTest, IdsAreContiguousAndSpecialsDistinct) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"hello world hello"}, 6);
  EXPECT_EQ(vocab.Token(vocab.pad_id()), kPadToken);
  EXPECT_EQ(vocab.Token(vocab.unk_id()), kUnkToken);
  EXPECT_NE(vocab.pad_id(), vocab.unk_id());
  for (int id = 0; id < vocab.size(); ++id) EXPECT_EQ(vocab.Id(vocab.Token(id)), id);
  EXPECT_LE(vocab.size(), vocab.budget() + static_cast<int>(vocab.alphabet().size()) + 2);
}

TEST(EncodeTest, AppliesMergesInOrder) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"ab ab ac"}, 1);
  const TokenizedText t = Encode(vocab, "ab ac");
  EXPECT_EQ(Tokens(vocab, t), (std::vector<std::string>{"ab</w>", "a", "c</w>"}));
  ASSERT_EQ(t.token_spans.size(), 3u);
  EXPECT_EQ(t.token_spans[0], (CharSpan{0, 2}));
  EXPECT_EQ(t.token_spans[1], (CharSpan{3, 4}));
  EXPECT_EQ(t.token_spans[2], (CharSpan{4, 5}));
}

TEST(EncodeTest, UnknownCharacterBecomesUnk) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"ab ab ac"}, 1);
  const TokenizedText t = Encode(vocab, "az");
  ASSERT_EQ(t.token_ids.size(), 2u);
  EXPECT_EQ(t.token_ids[1], vocab.unk_id());
}

TEST(EncodeTest, WordFinalSymbolFallsBackToInnerForm) {
  // "b" only ever occurs word-finally in training, "a" only word-initially;
  // a word-final "a" still maps to the known "a" symbol.
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"ab"}, 0);
  const TokenizedText t = Encode(vocab, "ba");
  EXPECT_NE(t.token_ids[1], vocab.unk_id());
  EXPECT_EQ(vocab.Token(t.token_ids[1]), "a");
}

TEST(EncodeTest, RoundTripsOverTrainingAlphabet) {
  const std::vector<std::string> corpus = {"Lithium-induced nephrotoxicity in rats .",
                                           "Chronic lithium use   and renal failure\tresults"};
  const Vocabulary vocab = TrainBpe(corpus, 30);
  for (const std::string& text : corpus) {
    const TokenizedText t = Encode(vocab, text);
    // Whitespace characters decode to plain spaces.
    std::string normalized = text;
    for (char& ch : normalized) {
      if (ch == '\t') ch = ' ';
    }
    EXPECT_EQ(Decode(vocab, t), normalized);
  }
  EXPECT_EQ(Decode(vocab, Encode(vocab, "lithium induced")), "lithium induced");
}

TEST(EncodeTest, Utf8CodePointsStayWhole) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"α-synuclein β"}, 3);
  const TokenizedText t = Encode(vocab, "β α");
  for (int id : t.token_ids) EXPECT_NE(id, vocab.unk_id());
  EXPECT_EQ(Decode(vocab, t), "β α");
}

TEST(AlignSpanTest, ExactAndCoveringSpans) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"aa bb cc"}, 0);
  const TokenizedText t = Encode(vocab, "aa bb cc");
  // Tokens: a a</w> b b</w> c c</w>
  ASSERT_EQ(t.token_ids.size(), 6u);
  EXPECT_EQ(AlignSpan(t, 3, 4), std::make_pair(2, 2));
  EXPECT_EQ(AlignSpan(t, 1, 7), std::make_pair(1, 4));
  // Partial overlap counts.
  EXPECT_EQ(AlignSpan(t, 2, 4), std::make_pair(2, 2));
}

TEST(AlignSpanTest, InvalidIntervals) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"aa  bb"}, 0);
  const TokenizedText t = Encode(vocab, "aa  bb");
  EXPECT_THROW(AlignSpan(t, 3, 3), ContractError);
  EXPECT_THROW(AlignSpan(t, 4, 2), ContractError);
  EXPECT_THROW(AlignSpan(t, 0, 99), ContractError);
  EXPECT_THROW(AlignSpan(t, 2, 4), AlignmentError);
}

TEST(VocabularyFileTest, RoundTrip) {
  const Vocabulary vocab = TrainBpe(std::vector<std::string>{"the cat sat on the mat", "x"}, 7);
  std::stringstream buf;
  WriteVocabulary(buf, vocab);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, 9), "bpe-v1 7\n");
  const Vocabulary back = ReadVocabulary(buf);
  EXPECT_EQ(back.merges(), vocab.merges());
  EXPECT_EQ(back.alphabet(), vocab.alphabet());
  ASSERT_EQ(back.size(), vocab.size());
  for (int id = 0; id < vocab.size(); ++id) EXPECT_EQ(back.Token(id), vocab.Token(id));
  std::stringstream again;
  WriteVocabulary(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(VocabularyFileTest, BadHeaderIsParseError) {
  std::istringstream in("bpe-v2 3\n");
  EXPECT_THROW(ReadVocabulary(in), ParseError);
}

}  // namespace
}  // namespace bran
