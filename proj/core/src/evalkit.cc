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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "bran/error.h"

namespace bran {
namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  if (!line.empty() && line.back() == '\t') fields.emplace_back();
  return fields;
}

double Ratio(int64_t num, int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// 2PR / (P + R) in count form: a single rounding, so equal ratios compare
// equal.
double F1(int64_t tp, int64_t fp, int64_t fn) {
  return tp == 0 ? 0.0 : Ratio(2 * tp, 2 * tp + fp + fn);
}

std::string FormatProbability(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", p);
  return buf;
}

}  // namespace

void MeshTree::Add(const std::string& entity_id, const std::string& tree_number) {
  if (entity_id.empty() || tree_number.empty()) {
    throw ParseError("MeSH entries need a non-empty id and tree number");
  }
  auto& numbers = tree_numbers_[entity_id];
  if (std::find(numbers.begin(), numbers.end(), tree_number) == numbers.end()) {
    numbers.push_back(tree_number);
  }
}

const std::vector<std::string>& MeshTree::TreeNumbers(const std::string& entity_id) const {
  static const std::vector<std::string> kNone;
  auto it = tree_numbers_.find(entity_id);
  return it == tree_numbers_.end() ? kNone : it->second;
}

bool MeshTree::IsProperAncestor(const std::string& ancestor, const std::string& descendant) const {
  for (const std::string& a : TreeNumbers(ancestor)) {
    for (const std::string& d : TreeNumbers(descendant)) {
      if (d.size() > a.size() + 1 && d.compare(0, a.size(), a) == 0 && d[a.size()] == '.') {
        return true;
      }
    }
  }
  return false;
}

MeshTree ReadMeshTree(std::istream& in) {
  MeshTree tree;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 2) {
      throw ParseError("MeSH line " + std::to_string(line_no) + ": expected id<TAB>tree_number");
    }
    tree.Add(fields[0], fields[1]);
  }
  return tree;
}

MeshTree LoadMeshTree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return ReadMeshTree(in);
}

std::vector<PairPrediction> FilterHypernyms(std::span<const PairPrediction> predictions,
                                            const MeshTree& tree) {
  std::map<std::string_view, std::vector<const PairPrediction*>> by_doc;
  for (const PairPrediction& p : predictions) by_doc[p.doc_id].push_back(&p);
  std::vector<PairPrediction> kept;
  for (const PairPrediction& p : predictions) {
    bool drop = false;
    for (const PairPrediction* q : by_doc[p.doc_id]) {
      if (q->chemical_id == p.chemical_id && tree.IsProperAncestor(p.disease_id, q->disease_id)) {
        drop = true;
      } else if (q->disease_id == p.disease_id &&
                 tree.IsProperAncestor(p.chemical_id, q->chemical_id)) {
        drop = true;
      }
      if (drop) break;
    }
    if (!drop) kept.push_back(p);
  }
  return kept;
}

void FilterTrainingHypernyms(std::span<Document> docs, const MeshTree& tree) {
  for (Document& doc : docs) {
    std::vector<PairPrediction> as_predictions;
    for (const auto& [c, d] : doc.gold_relations) as_predictions.push_back({doc.doc_id, c, d, 1.0});
    std::vector<RelationKey> kept;
    for (const PairPrediction& p : FilterHypernyms(as_predictions, tree)) {
      kept.emplace_back(p.chemical_id, p.disease_id);
    }
    if (kept.size() == doc.gold_relations.size()) continue;
    doc.gold_relations = std::move(kept);
    const std::set<RelationKey> gold(doc.gold_relations.begin(), doc.gold_relations.end());
    for (CandidatePair& pair : doc.candidates) {
      const RelationKey key{doc.entities[static_cast<size_t>(pair.head)].entity_id,
                            doc.entities[static_cast<size_t>(pair.tail)].entity_id};
      pair.label = gold.count(key) != 0 ? RelationLabel::kCid : RelationLabel::kNull;
    }
  }
}

EvalReport Score(std::span<const PairKey> predicted, std::span<const PairKey> gold) {
  const std::set<PairKey> pred_set(predicted.begin(), predicted.end());
  const std::set<PairKey> gold_set(gold.begin(), gold.end());
  EvalReport report;
  for (const PairKey& key : pred_set) {
    EvalCounts& doc = report.per_document[std::get<0>(key)];
    if (gold_set.count(key) != 0) {
      ++report.counts.true_positives;
      ++doc.true_positives;
    } else {
      ++report.counts.false_positives;
      ++doc.false_positives;
    }
  }
  for (const PairKey& key : gold_set) {
    if (pred_set.count(key) != 0) continue;
    ++report.counts.false_negatives;
    ++report.per_document[std::get<0>(key)].false_negatives;
  }
  const EvalCounts& c = report.counts;
  report.precision = Ratio(c.true_positives, c.true_positives + c.false_positives);
  report.recall = Ratio(c.true_positives, c.true_positives + c.false_negatives);
  report.f1 = F1(c.true_positives, c.false_positives, c.false_negatives);
  return report;
}

std::vector<PairKey> GoldKeys(std::span<const Document> docs) {
  std::vector<PairKey> keys;
  for (const Document& doc : docs) {
    for (const auto& [c, d] : doc.gold_relations) keys.emplace_back(doc.doc_id, c, d);
  }
  return keys;
}

std::vector<PairKey> Threshold(std::span<const PairPrediction> predictions, double theta) {
  std::vector<PairKey> keys;
  for (const PairPrediction& p : predictions) {
    if (p.probability >= theta) keys.push_back(p.key());
  }
  return keys;
}

ThresholdChoice SweepThreshold(std::span<const PairPrediction> predictions,
                               std::span<const PairKey> gold) {
  const std::set<PairKey> gold_set(gold.begin(), gold.end());
  // Collapse duplicate keys to their highest probability, matching the set
  // semantics of Score().
  std::map<PairKey, double> best_prob;
  for (const PairPrediction& p : predictions) {
    auto [it, inserted] = best_prob.emplace(p.key(), p.probability);
    if (!inserted) it->second = std::max(it->second, p.probability);
  }
  std::vector<std::pair<double, bool>> ranked;  // (probability, is gold)
  for (const auto& [key, prob] : best_prob) ranked.emplace_back(prob, gold_set.count(key) != 0);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  ThresholdChoice best;
  const auto total_gold = static_cast<int64_t>(gold_set.size());
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < ranked.size()) {
    const double theta = ranked[i].first;
    while (i < ranked.size() && ranked[i].first == theta) {
      (ranked[i].second ? tp : fp) += 1;
      ++i;
    }
    const double f1 = F1(tp, fp, total_gold - tp);
    // Thresholds descend, so ">=" keeps the smallest one among ties.
    if (f1 >= best.f1 && (f1 > 0.0 || best.f1 == 0.0)) {
      best.theta = theta;
      best.f1 = f1;
    }
  }
  if (best.f1 == 0.0 && !ranked.empty()) best.theta = ranked.front().first;
  return best;
}

std::vector<PairPrediction> Ensemble(std::span<const std::vector<PairPrediction>> runs) {
  if (runs.empty()) throw ContractError("ensemble needs at least one run");
  std::map<PairKey, std::vector<double>> values;
  for (const PairPrediction& p : runs.front()) {
    if (!values.emplace(p.key(), std::vector<double>{}).second) {
      throw ContractError("run 1 lists (" + p.doc_id + ", " + p.chemical_id + ", " +
                          p.disease_id + ") twice");
    }
  }
  for (size_t r = 0; r < runs.size(); ++r) {
    for (const PairPrediction& p : runs[r]) {
      auto it = values.find(p.key());
      if (it == values.end()) {
        throw ContractError("run " + std::to_string(r + 1) + " has pair (" + p.doc_id + ", " +
                            p.chemical_id + ", " + p.disease_id + ") missing from run 1");
      }
      if (it->second.size() != r) {
        throw ContractError("run " + std::to_string(r + 1) + " lists (" + p.doc_id + ", " +
                            p.chemical_id + ", " + p.disease_id + ") twice");
      }
      it->second.push_back(p.probability);
    }
    for (const auto& [key, probs] : values) {
      if (probs.size() != r + 1) {
        throw ContractError("run " + std::to_string(r + 1) + " lacks pair (" +
                            std::get<0>(key) + ", " + std::get<1>(key) + ", " +
                            std::get<2>(key) + ")");
      }
    }
  }
  std::vector<PairPrediction> out;
  for (const auto& [key, probs] : values) {
    double mean = probs.front();
    // Identical inputs reproduce their value exactly.
    if (std::any_of(probs.begin(), probs.end(), [&](double p) { return p != probs.front(); })) {
      double sum = 0.0;
      for (double p : probs) sum += p;
      mean = sum / static_cast<double>(probs.size());
    }
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean});
  }
  SortPredictions(out);
  return out;
}

void SortPredictions(std::vector<PairPrediction>& predictions) {
  std::sort(predictions.begin(), predictions.end(),
            [](const PairPrediction& a, const PairPrediction& b) {
              if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
              if (a.probability != b.probability) return a.probability > b.probability;
              return std::tie(a.chemical_id, a.disease_id) < std::tie(b.chemical_id, b.disease_id);
            });
}

void WritePredictions(std::ostream& out, std::vector<PairPrediction> predictions) {
  SortPredictions(predictions);
  for (const PairPrediction& p : predictions) {
    out << p.doc_id << '\t' << p.chemical_id << '\t' << p.disease_id << '\t'
        << FormatProbability(p.probability) << '\n';
  }
}

std::vector<PairPrediction> ReadPredictions(std::istream& in) {
  std::vector<PairPrediction> predictions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 4) {
      throw ParseError("prediction line " + std::to_string(line_no) + ": expected 4 fields");
    }
    char* end = nullptr;
    const double p = std::strtod(fields[3].c_str(), &end);
    if (fields[3].empty() || end != fields[3].c_str() + fields[3].size() || !(p >= 0.0 && p <= 1.0)) {
      throw ParseError("prediction line " + std::to_string(line_no) + ": bad probability '" +
                       fields[3] + "'");
    }
    predictions.push_back({fields[0], fields[1], fields[2], p});
  }
  return predictions;
}

void SavePredictions(const std::string& path, std::vector<PairPrediction> predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WritePredictions(out, std::move(predictions));
}

std::vector<PairPrediction> LoadPredictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return ReadPredictions(in);
}

}  // namespace bran
