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

#include "bran/evalkit.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "bran/error.h"

namespace bran {
namespace {

PairKey K(const std::string& doc, const std::string& c, const std::string& d) {
  return {doc, c, d};
}

TEST(ScoreTest, WorkedExample) {
  const std::vector<PairKey> pred = {K("1", "a", "x"), K("1", "b", "y"), K("2", "a", "x")};
  const std::vector<PairKey> gold = {K("1", "a", "x"), K("2", "a", "x"), K("2", "c", "z")};
  const EvalReport r = Score(pred, gold);
  EXPECT_EQ(r.counts.true_positives, 2);
  EXPECT_EQ(r.counts.false_positives, 1);
  EXPECT_EQ(r.counts.false_negatives, 1);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
  EXPECT_EQ(r.per_document.at("1").false_positives, 1);
  EXPECT_EQ(r.per_document.at("2").false_negatives, 1);
}

TEST(ScoreTest, EmptyConventionsAndDuplicates) {
  const std::vector<PairKey> none;
  const std::vector<PairKey> one = {K("1", "a", "x")};
  EXPECT_EQ(Score(none, none).f1, 0.0);
  EXPECT_EQ(Score(none, one).precision, 0.0);
  EXPECT_EQ(Score(one, none).recall, 0.0);
  const std::vector<PairKey> dup = {K("1", "a", "x"), K("1", "a", "x")};
  EXPECT_EQ(Score(dup, one).f1, 1.0);
  EXPECT_EQ(Score(dup, one).counts.true_positives, 1);
}

TEST(ScoreTest, SwappingRolesSwapsPrecisionAndRecall) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PairKey> a, b;
    for (int i = 0; i < 10; ++i) {
      const std::string doc = std::to_string(rng() % 3);
      const std::string c = std::to_string(rng() % 3);
      const std::string d = std::to_string(rng() % 3);
      ((rng() & 1) ? a : b).push_back(K(doc, c, d));
    }
    const EvalReport ab = Score(a, b), ba = Score(b, a);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.f1, ba.f1);
  }
}

MeshTree FixtureTree() {
  std::istringstream in(
      "D1\tC04\n"
      "D2\tC04.557\n"
      "D3\tC045\n"
      "D4\tC04.557.337\n"
      "CH1\tD02.100\n"
      "CH2\tD02.100.200\n"
      "CH3\tD03.1\n"
      "CH3\tD02.100.300\n");
  return ReadMeshTree(in);
}

TEST(MeshTreeTest, Ancestry) {
  const MeshTree tree = FixtureTree();
  EXPECT_TRUE(tree.IsProperAncestor("D1", "D2"));
  EXPECT_TRUE(tree.IsProperAncestor("D1", "D4"));
  EXPECT_FALSE(tree.IsProperAncestor("D1", "D3"));  // C045 is a sibling string, not a child
  EXPECT_FALSE(tree.IsProperAncestor("D2", "D1"));
  EXPECT_FALSE(tree.IsProperAncestor("D1", "D1"));
  EXPECT_TRUE(tree.IsProperAncestor("CH1", "CH3"));  // through its second tree number
  EXPECT_FALSE(tree.IsProperAncestor("D1", "unknown"));
  std::istringstream bad("D1 C04\n");
  EXPECT_THROW(ReadMeshTree(bad), ParseError);
}

TEST(HypernymFilterTest, DropsGeneralPairs) {
  const MeshTree tree = FixtureTree();
  const std::vector<PairPrediction> preds = {
      {"1", "CH1", "D1", 0.9},  // D1 is above D2 with the same chemical: drop
      {"1", "CH1", "D2", 0.8},
      {"1", "CH1", "D3", 0.7},  // C045 is unrelated: keep
      {"1", "CH2", "D3", 0.6},  // CH1 above CH2 for D3: drops (CH1, D3) too
      {"2", "CH1", "D1", 0.5},  // other document: keep
  };
  const auto kept = FilterHypernyms(preds, tree);
  std::vector<PairKey> keys;
  for (const auto& p : kept) keys.push_back(p.key());
  const std::vector<PairKey> expected = {K("1", "CH1", "D2"), K("1", "CH2", "D3"),
                                         K("2", "CH1", "D1")};
  EXPECT_EQ(keys, expected);
  EXPECT_EQ(FilterHypernyms(kept, tree), kept);
  EXPECT_EQ(FilterHypernyms(preds, MeshTree{}), preds);
}

TEST(HypernymFilterTest, IdempotentOnRandomSets) {
  const MeshTree tree = FixtureTree();
  const std::vector<std::string> chems = {"CH1", "CH2", "CH3"};
  const std::vector<std::string> dis = {"D1", "D2", "D3", "D4"};
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PairPrediction> preds;
    for (const auto& c : chems) {
      for (const auto& d : dis) {
        if (rng() % 2) preds.push_back({std::to_string(rng() % 2), c, d, 0.5});
      }
    }
    const auto once = FilterHypernyms(preds, tree);
    EXPECT_EQ(FilterHypernyms(once, tree), once);
  }
}

// Exhaustive reference: every distinct probability as theta.
ThresholdChoice BruteForceSweep(const std::vector<PairPrediction>& preds,
                                const std::vector<PairKey>& gold) {
  std::set<double> thetas;
  for (const auto& p : preds) thetas.insert(p.probability);
  ThresholdChoice best;
  bool found = false;
  for (double t : thetas) {  // ascending, so strict ">" keeps the smallest on ties
    const double f1 = Score(Threshold(preds, t), gold).f1;
    if (f1 > 0.0 && (!found || f1 > best.f1)) {
      best = {t, f1};
      found = true;
    }
  }
  if (!found && !thetas.empty()) best = {*thetas.rbegin(), 0.0};
  return best;
}

TEST(SweepTest, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PairPrediction> preds;
    std::vector<PairKey> gold;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      PairPrediction p{std::to_string(rng() % 3), "c" + std::to_string(rng() % 3),
                       "d" + std::to_string(rng() % 3),
                       static_cast<double>(rng() % 6) / 5.0};
      preds.push_back(p);
      if (rng() % 2) gold.push_back(p.key());
    }
    if (rng() % 4 == 0) gold.push_back(K("9", "c0", "d0"));
    // Score uses set semantics: collapse duplicate keys to their max first.
    const ThresholdChoice got = SweepThreshold(preds, gold);
    std::map<PairKey, double> best;
    for (const auto& p : preds) best[p.key()] = std::max(best[p.key()], p.probability);
    std::vector<PairPrediction> collapsed;
    for (const auto& [k, v] : best) {
      collapsed.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v});
    }
    const ThresholdChoice want = BruteForceSweep(collapsed, gold);
    EXPECT_EQ(got.theta, want.theta) << trial;
    EXPECT_EQ(got.f1, want.f1) << trial;
  }
  const ThresholdChoice empty = SweepThreshold({}, std::vector<PairKey>{K("1", "a", "b")});
  EXPECT_EQ(empty.theta, 1.0);
  EXPECT_EQ(empty.f1, 0.0);
}

TEST(EnsembleTest, AveragesAndThresholds) {
  const std::vector<std::vector<PairPrediction>> runs = {{{"1", "a", "x", 0.2}},
                                                         {{"1", "a", "x", 0.8}}};
  const auto mean = Ensemble(runs);
  ASSERT_EQ(mean.size(), 1u);
  EXPECT_DOUBLE_EQ(mean[0].probability, 0.5);
  EXPECT_EQ(Threshold(mean, 0.45).size(), 1u);
  EXPECT_EQ(Threshold(mean, 0.55).size(), 0u);
}

TEST(EnsembleTest, BoundedByMembersAndExactOnIdenticalRuns) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<PairPrediction>> runs(5);
  for (int i = 0; i < 20; ++i) {
    for (auto& run : runs) run.push_back({"d", "c" + std::to_string(i), "x", u(rng)});
  }
  const auto mean = Ensemble(runs);
  for (const auto& p : mean) {
    double lo = 1.0, hi = 0.0;
    for (const auto& run : runs) {
      for (const auto& q : run) {
        if (q.key() == p.key()) {
          lo = std::min(lo, q.probability);
          hi = std::max(hi, q.probability);
        }
      }
    }
    EXPECT_GE(p.probability, lo);
    EXPECT_LE(p.probability, hi);
  }
  std::vector<PairPrediction> same = runs[0];
  SortPredictions(same);
  const std::vector<std::vector<PairPrediction>> copies(3, runs[0]);
  EXPECT_EQ(Ensemble(copies), same);
}

TEST(EnsembleTest, MismatchedRunsAreRejected) {
  const std::vector<PairPrediction> a = {{"1", "a", "x", 0.2}, {"1", "b", "x", 0.3}};
  const std::vector<PairPrediction> missing = {{"1", "a", "x", 0.2}};
  const std::vector<PairPrediction> extra = {
      {"1", "a", "x", 0.2}, {"1", "b", "x", 0.3}, {"2", "a", "x", 0.1}};
  const std::vector<PairPrediction> dup = {{"1", "a", "x", 0.2}, {"1", "a", "x", 0.3}};
  EXPECT_THROW(Ensemble(std::vector<std::vector<PairPrediction>>{a, missing}), ContractError);
  EXPECT_THROW(Ensemble(std::vector<std::vector<PairPrediction>>{a, extra}), ContractError);
  EXPECT_THROW(Ensemble(std::vector<std::vector<PairPrediction>>{dup}), ContractError);
  EXPECT_THROW(Ensemble(std::vector<std::vector<PairPrediction>>{}), ContractError);
}

TEST(PredictionIoTest, RoundTripIsExact) {
  std::vector<PairPrediction> preds = {{"2", "a", "x", 0.1},
                                       {"1", "b", "y", 1.0 / 3.0},
                                       {"1", "a", "y", 0.9},
                                       {"1", "c", "y", 0.0}};
  std::ostringstream out;
  WritePredictions(out, preds);
  std::istringstream in(out.str());
  const auto back = ReadPredictions(in);
  SortPredictions(preds);
  EXPECT_EQ(back, preds);
  EXPECT_EQ(back[0].chemical_id, "a");  // doc 1, highest probability first
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "1\ta\ty\t0.90000000000000002");
  std::istringstream bad_fields("1\ta\t0.5\n");
  EXPECT_THROW(ReadPredictions(bad_fields), ParseError);
  std::istringstream bad_prob("1\ta\tx\t1.5\n");
  EXPECT_THROW(ReadPredictions(bad_prob), ParseError);
}

}  // namespace
}  // namespace bran
