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

#include "bran/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bran/error.h"
#include "bran/model.h"
#include "bran/nertag.h"
#include "bran/ops.h"
#include "bran/trainer.h"

namespace bran {

GradCheckReport CompareGradients(ParamSet& params, const std::function<double()>& loss,
                                 double step) {
  GradCheckReport report;
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    GroupError group{p.name, p.value.size(), 0.0};
    double max_diff = 0.0, max_scale = 0.0;
    for (int64_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + step;
      const double up = loss();
      p.value[k] = saved - step;
      const double down = loss();
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[k];
      max_diff = std::max(max_diff, std::abs(analytic - numeric));
      max_scale = std::max({max_scale, std::abs(analytic), std::abs(numeric)});
    }
    group.relative_error =
        max_scale > std::numeric_limits<double>::min() ? max_diff / max_scale : max_diff;
    report.max_relative_error = std::max(report.max_relative_error, group.relative_error);
    report.groups.push_back(group);
  }
  return report;
}

Document MakeGradCheckDocument(const GradCheckOptions& options) {
  if (options.tokens < 8) throw ConfigError("gradient check needs at least 8 tokens");
  if (options.vocab_size < 3) throw ConfigError("gradient check needs a vocabulary of 3+");
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> token(2, options.vocab_size - 1);
  Document doc;
  doc.doc_id = "gradcheck";
  const int n = options.tokens;
  for (int i = 0; i < n; ++i) {
    doc.tokens.token_ids.push_back(token(rng));
    doc.tokens.token_spans.push_back({i, i + 1});
  }
  doc.tokens.text_length = n;
  // Chemical at tokens {1} and {n/2}, disease at {3, 4} and {n - 2}.
  auto add = [&](int first, int last, EntityType type, const std::string& id) {
    Mention m;
    m.char_start = first;
    m.char_end = last + 1;
    m.type = type;
    m.entity_id = id;
    m.first_token = first;
    m.last_token = last;
    doc.mentions.push_back(m);
  };
  add(1, 1, EntityType::kChemical, "C1");
  add(3, 4, EntityType::kDisease, "D1");
  add(n / 2, n / 2, EntityType::kChemical, "C1");
  add(n - 2, n - 2, EntityType::kDisease, "D1");
  doc.entities = {{"C1", EntityType::kChemical, {0, 2}}, {"D1", EntityType::kDisease, {1, 3}}};
  doc.gold_relations = {{"C1", "D1"}};
  doc.candidates = BuildPairs(doc, options.cells);
  return doc;
}

GradCheckReport RunGradCheck(const GradCheckOptions& options) {
  options.encoder.Validate();
  const Document doc = MakeGradCheckDocument(options);
  ModelSpec spec;
  spec.encoder = options.encoder;
  spec.vocab_size = options.vocab_size;
  spec.ner_head = options.ner_weight > 0.0;
  BranModel model(spec, options.seed);
  // The output layers start at zero, which would hide the gradients that
  // flow through them; give every parameter a random non-zero value.
  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (size_t i = 0; i < model.params().size(); ++i) {
    for (double& v : model.params()[i].value.values()) v += jitter(rng);
  }
  const std::vector<BioTag> tags = MakeBioTags(doc);
  const std::vector<uint8_t> all_tokens(doc.tokens.token_ids.size(), 1);
  std::vector<RelationLabel> labels;
  for (const CandidatePair& c : doc.candidates) labels.push_back(c.label);
  const std::vector<uint8_t> all_pairs(labels.size(), 1);

  auto joint_loss = [&](Tape& tape) {
    const BranModel::Output out = model.Forward(tape, doc);
    Var loss = RelationLoss(out.pair_scores, labels, all_pairs);
    if (spec.ner_head) {
      loss = Add(loss, Scale(NerLoss(out.ner_logits, tags, all_tokens), options.ner_weight));
    }
    return loss;
  };

  model.params().ZeroGrad();
  {
    Tape tape;
    tape.Backward(joint_loss(tape));
  }
  return CompareGradients(
      model.params(),
      [&] {
        Tape tape(/*record_gradients=*/false);
        return joint_loss(tape).value().item();
      },
      options.step);
}

}  // namespace bran
