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

#include "bran/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

#include "bran/error.h"

namespace bran {
namespace {

// Entity names are stem + suffix pseudo-words. The pool is small enough that
// every name shows up in many documents on both sides of the label, so only
// the sentence structure separates positives from negatives.
constexpr std::array<std::string_view, 8> kChemicalStems = {"zor", "bel", "cap", "dro",
                                                            "fen", "lum", "mer", "tav"};
constexpr std::array<std::string_view, 8> kChemicalSuffixes = {
    "amide", "azole", "oxin", "idine", "olol", "april", "statin", "mycin"};
constexpr std::array<std::string_view, 8> kDiseaseStems = {"neph", "card", "hep", "derm",
                                                           "gastr", "my", "neur", "ost"};
constexpr std::array<std::string_view, 8> kDiseaseSuffixes = {
    "itis", "osis", "opathy", "algia", "emia", "oma", "plegia", "otrophy"};
constexpr size_t kNamesPerType = 16;

std::string ChemicalName(size_t i) {
  return std::string(kChemicalStems[i % 8]) + std::string(kChemicalSuffixes[i / 8]);
}

std::string DiseaseName(size_t i) {
  return std::string(kDiseaseStems[i % 8]) + std::string(kDiseaseSuffixes[i / 8]);
}

std::string ChemicalId(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "D1%05zu", i);
  return buf;
}

std::string DiseaseId(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "D2%05zu", i);
  return buf;
}

// Text under construction plus the mentions placed in it. Offsets are
// counted over title + " " + abstract; the synthetic text is ASCII, so
// bytes and code points coincide.
class DocBuilder {
 public:
  void Word(std::string_view word) {
    if (!current_->empty()) *current_ += ' ';
    *current_ += word;
  }
  void Mention(std::string_view surface, const char* type, const std::string& id) {
    if (!current_->empty()) *current_ += ' ';
    const size_t start = Offset();
    *current_ += surface;
    mentions_.push_back(std::to_string(start) + '\t' + std::to_string(start + surface.size()) +
                        '\t' + std::string(surface) + '\t' + type + '\t' + id);
  }
  void StartAbstract() { current_ = &abstract_; }

  std::string Render(const std::string& doc_id, const std::vector<std::string>& relations) const {
    std::string out = doc_id + "|t|" + title_ + '\n' + doc_id + "|a|" + abstract_ + '\n';
    for (const std::string& m : mentions_) out += doc_id + '\t' + m + '\n';
    for (const std::string& r : relations) out += doc_id + "\tCID\t" + r + '\n';
    return out + '\n';
  }

 private:
  size_t Offset() const {
    return current_ == &title_ ? title_.size() : title_.size() + 1 + abstract_.size();
  }

  std::string title_;
  std::string abstract_;
  std::string* current_ = &title_;
  std::vector<std::string> mentions_;
};

struct Unit {
  // 0: chemical/disease linked in one sentence, 1: across sentences,
  // 2: neutral chemical, 3: neutral disease.
  int kind = 0;
  int variant = 0;
  size_t chemical = 0;
  size_t disease = 0;
  // Two-word disease mention ("acute X").
  bool acute = false;
};

void EmitUnit(const Unit& u, DocBuilder& b) {
  const std::string chem = ChemicalName(u.chemical);
  const std::string dis = (u.acute ? "acute " : "") + DiseaseName(u.disease);
  const std::string chem_id = ChemicalId(u.chemical), dis_id = DiseaseId(u.disease);
  auto words = [&](std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) b.Word(w);
  };
  switch (u.kind) {
    case 0:
      if (u.variant == 0) {
        b.Mention(chem, "Chemical", chem_id);
        words("induced");
        b.Mention(dis, "Disease", dis_id);
        words("in two patients .");
      } else {
        b.Mention(dis, "Disease", dis_id);
        words("induced by");
        b.Mention(chem, "Chemical", chem_id);
        words("was reported .");
      }
      break;
    case 1:
      words("patients were treated with");
      b.Mention(chem, "Chemical", chem_id);
      words(".");
      b.Mention(dis, "Disease", dis_id);
      words(u.variant == 0 ? "was induced within days ." : "was then induced .");
      break;
    case 2:
      if (u.variant == 0) {
        b.Mention(chem, "Chemical", chem_id);
        words("levels were measured .");
      } else if (u.variant == 1) {
        words("serum");
        b.Mention(chem, "Chemical", chem_id);
        words("was normal .");
      } else {
        b.Mention(chem, "Chemical", chem_id);
        words("was discontinued .");
      }
      break;
    default:
      if (u.variant == 0) {
        words("no");
        b.Mention(dis, "Disease", dis_id);
        words("was observed .");
      } else if (u.variant == 1) {
        b.Mention(dis, "Disease", dis_id);
        words("was excluded .");
      } else {
        words("a history of");
        b.Mention(dis, "Disease", dis_id);
        words("was noted .");
      }
      break;
  }
}

struct DocPlan {
  std::vector<size_t> chemicals;
  std::vector<size_t> diseases;
  int positives = 0;
};

DocPlan PlanDocument(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 3);
  std::vector<size_t> chems(kNamesPerType), dises(kNamesPerType);
  for (size_t i = 0; i < chems.size(); ++i) chems[i] = i;
  for (size_t i = 0; i < dises.size(); ++i) dises[i] = i;
  DocPlan plan;
  const int n_chem = count(rng), n_dis = count(rng);
  for (int i = 0; i < n_chem; ++i) {
    std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i), chems.size() - 1);
    std::swap(chems[static_cast<size_t>(i)], chems[pick(rng)]);
    plan.chemicals.push_back(chems[static_cast<size_t>(i)]);
  }
  for (int i = 0; i < n_dis; ++i) {
    std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i), dises.size() - 1);
    std::swap(dises[static_cast<size_t>(i)], dises[pick(rng)]);
    plan.diseases.push_back(dises[static_cast<size_t>(i)]);
  }
  std::discrete_distribution<int> positives({10, 50, 40});
  plan.positives = std::min({positives(rng), n_chem, n_dis});
  return plan;
}

std::string RenderDocument(const std::string& doc_id, const DocPlan& plan,
                           const std::vector<bool>& cross, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> variant2(0, 1), variant3(0, 2);
  std::bernoulli_distribution acute(0.2), repeat(0.25);
  std::vector<Unit> units;
  std::vector<std::string> relations;
  const auto positives = static_cast<size_t>(plan.positives);
  for (size_t i = 0; i < positives; ++i) {
    units.push_back(
        {cross[i] ? 1 : 0, variant2(rng), plan.chemicals[i], plan.diseases[i], acute(rng)});
    relations.push_back(ChemicalId(plan.chemicals[i]) + '\t' + DiseaseId(plan.diseases[i]));
    // A second, neutral mention of a related chemical.
    if (repeat(rng)) units.push_back({2, variant3(rng), plan.chemicals[i], 0, false});
  }
  for (size_t i = positives; i < plan.chemicals.size(); ++i) {
    units.push_back({2, variant3(rng), plan.chemicals[i], 0, false});
  }
  for (size_t i = positives; i < plan.diseases.size(); ++i) {
    units.push_back({3, variant3(rng), 0, plan.diseases[i], acute(rng)});
  }
  std::shuffle(units.begin(), units.end(), rng);

  DocBuilder b;
  b.Word("clinical case report");
  b.StartAbstract();
  for (const Unit& u : units) EmitUnit(u, b);
  std::sort(relations.begin(), relations.end());
  return b.Render(doc_id, relations);
}

std::string RenderSplit(int docs, int first_id, double cross_share, std::mt19937_64& rng,
                        int& positive_total, int& cross_total) {
  std::vector<DocPlan> plans;
  int positives = 0;
  for (int i = 0; i < docs; ++i) {
    plans.push_back(PlanDocument(rng));
    positives += plans.back().positives;
  }
  // Exactly round(share * positives) pairs are spread over two sentences.
  const int cross_count = static_cast<int>(std::lround(cross_share * positives));
  std::vector<bool> cross_flags(static_cast<size_t>(positives), false);
  std::fill(cross_flags.begin(), cross_flags.begin() + cross_count, true);
  std::shuffle(cross_flags.begin(), cross_flags.end(), rng);

  std::string out;
  size_t next = 0;
  for (int i = 0; i < docs; ++i) {
    const DocPlan& plan = plans[static_cast<size_t>(i)];
    std::vector<bool> cross(cross_flags.begin() + static_cast<std::ptrdiff_t>(next),
                            cross_flags.begin() +
                                static_cast<std::ptrdiff_t>(next + static_cast<size_t>(plan.positives)));
    next += static_cast<size_t>(plan.positives);
    out += RenderDocument(std::to_string(first_id + i), plan, cross, rng);
  }
  positive_total += positives;
  cross_total += cross_count;
  return out;
}

}  // namespace

SynthCorpus MakeSynthCorpus(const SynthOptions& options) {
  if (options.train_docs < 1 || options.dev_docs < 1) {
    throw ConfigError("synthetic corpus needs at least one train and one dev document");
  }
  if (!(options.cross_sentence_share >= 0.0 && options.cross_sentence_share <= 1.0)) {
    throw ConfigError("cross-sentence share must lie in [0, 1]");
  }
  std::mt19937_64 rng(options.seed);
  SynthCorpus corpus;
  corpus.train_pubtator = RenderSplit(options.train_docs, 100000, options.cross_sentence_share,
                                      rng, corpus.positive_pairs, corpus.cross_sentence_pairs);
  corpus.dev_pubtator = RenderSplit(options.dev_docs, 200000, options.cross_sentence_share, rng,
                                    corpus.positive_pairs, corpus.cross_sentence_pairs);
  for (size_t i = 0; i < kNamesPerType; ++i) {
    char tree[16];
    std::snprintf(tree, sizeof(tree), "D02.%03zu", i + 1);
    corpus.mesh_tsv += ChemicalId(i) + '\t' + tree + '\n';
  }
  for (size_t i = 0; i < kNamesPerType; ++i) {
    char tree[16];
    std::snprintf(tree, sizeof(tree), "C10.%03zu", i + 1);
    corpus.mesh_tsv += DiseaseId(i) + '\t' + tree + '\n';
  }
  return corpus;
}

}  // namespace bran
