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

#ifndef BRAN_CONFIG_H_
#define BRAN_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "bran/corpus.h"

namespace bran {

enum class Ablation { kFull, kCnnOnly, kNoWidth5 };

std::string_view AblationName(Ablation ablation);
Ablation ParseAblation(std::string_view name);

struct EncoderConfig {
  int dim = 64;
  int heads = 4;
  int blocks = 2;
  int max_positions = 512;
  Ablation ablation = Ablation::kFull;
  // Extra layer norm after the convolutional sub-layer's residual.
  bool post_ffn_layer_norm = false;

  int inner_dim() const { return 4 * dim; }
  int head_dim() const { return dim / heads; }
  // Kernel width of the middle convolution (1 under kNoWidth5).
  int middle_width() const { return ablation == Ablation::kNoWidth5 ? 1 : 5; }
  bool has_attention() const { return ablation != Ablation::kCnnOnly; }

  // Throws ConfigError on an inconsistent configuration.
  void Validate() const;
};

// Every knob of a training run. Serialized as flat key=value text; the
// file always lists every key.
struct RunConfig {
  EncoderConfig encoder;
  MentionCells mention_cells = MentionCells::kFirst;
  int bpe_budget = 2500;

  double learning_rate = 0.0005;
  int batch_size = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 10.0;
  double grad_noise_eta = 0.1;
  double word_keep = 0.85;
  double layer_keep = 0.9;
  // Weight of the NER loss; 0 removes the NER head entirely.
  double ner_weight = 1.0;

  int max_steps = 2000;
  int eval_every = 100;
  int patience = 5;
  uint64_t seed = 1;
  int train_docs = 850;
  int dev_docs = 150;

  void Validate() const;

  // Sets one key from its text form. Unknown keys and malformed values
  // raise ConfigError.
  void Set(std::string_view key, std::string_view value);
  // Canonical key -> value text for every field.
  std::map<std::string, std::string> ToMap() const;
};

// Reads "key=value" lines ('#' starts a comment, blank lines ignored) on
// top of `base`.
RunConfig ReadRunConfig(std::istream& in, RunConfig base = {});
RunConfig LoadRunConfig(const std::string& path, RunConfig base = {});
void WriteRunConfig(std::ostream& out, const RunConfig& config);
void SaveRunConfig(const std::string& path, const RunConfig& config);

}  // namespace bran

#endif  // BRAN_CONFIG_H_
