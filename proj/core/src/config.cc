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

#include "bran/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "bran/error.h"

namespace bran {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Int>
Int ParseInt(std::string_view key, std::string_view value) {
  Int out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad integer for '" + std::string(key) + "': '" + std::string(value) + "'");
  }
  return out;
}

double ParseDouble(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const double out = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(out)) {
    throw ConfigError("bad number for '" + std::string(key) + "': '" + text + "'");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + std::string(value) + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shortest representation that reads back exactly.
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[64];
    std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

}  // namespace

std::string_view AblationName(Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull: return "full";
    case Ablation::kCnnOnly: return "cnn_only";
    case Ablation::kNoWidth5: return "no_width5";
  }
  return "full";
}

Ablation ParseAblation(std::string_view name) {
  if (name == "full") return Ablation::kFull;
  if (name == "cnn_only") return Ablation::kCnnOnly;
  if (name == "no_width5") return Ablation::kNoWidth5;
  throw ConfigError("ablation must be full, cnn_only or no_width5, got '" + std::string(name) + "'");
}

void EncoderConfig::Validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (heads < 1) throw ConfigError("heads must be >= 1");
  if (dim % heads != 0) {
    throw ConfigError("dim " + std::to_string(dim) + " is not divisible by heads " +
                      std::to_string(heads));
  }
  if (blocks < 1) throw ConfigError("blocks must be >= 1");
  if (max_positions < 1) throw ConfigError("max_positions must be >= 1");
}

void RunConfig::Validate() const {
  encoder.Validate();
  auto probability = [](const char* name, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
  };
  probability("word_keep", word_keep);
  probability("layer_keep", layer_keep);
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (grad_noise_eta < 0.0) throw ConfigError("grad_noise_eta must be >= 0");
  if (ner_weight < 0.0) throw ConfigError("ner_weight must be >= 0");
  if (bpe_budget < 0) throw ConfigError("bpe_budget must be >= 0");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (train_docs < 1 || dev_docs < 1) throw ConfigError("train_docs and dev_docs must be >= 1");
}

void RunConfig::Set(std::string_view key, std::string_view raw) {
  const std::string_view value = Trim(raw);
  if (key == "dim") encoder.dim = ParseInt<int>(key, value);
  else if (key == "heads") encoder.heads = ParseInt<int>(key, value);
  else if (key == "blocks") encoder.blocks = ParseInt<int>(key, value);
  else if (key == "max_positions") encoder.max_positions = ParseInt<int>(key, value);
  else if (key == "ablation") encoder.ablation = ParseAblation(value);
  else if (key == "post_ffn_layer_norm") encoder.post_ffn_layer_norm = ParseBool(key, value);
  else if (key == "mention_cells") mention_cells = ParseMentionCells(value);
  else if (key == "bpe_budget") bpe_budget = ParseInt<int>(key, value);
  else if (key == "learning_rate") learning_rate = ParseDouble(key, value);
  else if (key == "batch_size") batch_size = ParseInt<int>(key, value);
  else if (key == "adam_beta1") adam_beta1 = ParseDouble(key, value);
  else if (key == "adam_beta2") adam_beta2 = ParseDouble(key, value);
  else if (key == "adam_epsilon") adam_epsilon = ParseDouble(key, value);
  else if (key == "clip_norm") clip_norm = ParseDouble(key, value);
  else if (key == "grad_noise_eta") grad_noise_eta = ParseDouble(key, value);
  else if (key == "word_keep") word_keep = ParseDouble(key, value);
  else if (key == "layer_keep") layer_keep = ParseDouble(key, value);
  else if (key == "ner_weight") ner_weight = ParseDouble(key, value);
  else if (key == "max_steps") max_steps = ParseInt<int>(key, value);
  else if (key == "eval_every") eval_every = ParseInt<int>(key, value);
  else if (key == "patience") patience = ParseInt<int>(key, value);
  else if (key == "seed") seed = ParseInt<uint64_t>(key, value);
  else if (key == "train_docs") train_docs = ParseInt<int>(key, value);
  else if (key == "dev_docs") dev_docs = ParseInt<int>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::map<std::string, std::string> RunConfig::ToMap() const {
  return {
      {"dim", std::to_string(encoder.dim)},
      {"heads", std::to_string(encoder.heads)},
      {"blocks", std::to_string(encoder.blocks)},
      {"max_positions", std::to_string(encoder.max_positions)},
      {"ablation", std::string(AblationName(encoder.ablation))},
      {"post_ffn_layer_norm", encoder.post_ffn_layer_norm ? "true" : "false"},
      {"mention_cells", std::string(MentionCellsName(mention_cells))},
      {"bpe_budget", std::to_string(bpe_budget)},
      {"learning_rate", FormatDouble(learning_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"adam_beta1", FormatDouble(adam_beta1)},
      {"adam_beta2", FormatDouble(adam_beta2)},
      {"adam_epsilon", FormatDouble(adam_epsilon)},
      {"clip_norm", FormatDouble(clip_norm)},
      {"grad_noise_eta", FormatDouble(grad_noise_eta)},
      {"word_keep", FormatDouble(word_keep)},
      {"layer_keep", FormatDouble(layer_keep)},
      {"ner_weight", FormatDouble(ner_weight)},
      {"max_steps", std::to_string(max_steps)},
      {"eval_every", std::to_string(eval_every)},
      {"patience", std::to_string(patience)},
      {"seed", std::to_string(seed)},
      {"train_docs", std::to_string(train_docs)},
      {"dev_docs", std::to_string(dev_docs)},
  };
}

RunConfig ReadRunConfig(std::istream& in, RunConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + " lacks '='");
    }
    base.Set(Trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return base;
}

RunConfig LoadRunConfig(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return ReadRunConfig(in, std::move(base));
}

void WriteRunConfig(std::ostream& out, const RunConfig& config) {
  for (const auto& [key, value] : config.ToMap()) out << key << '=' << value << '\n';
}

void SaveRunConfig(const std::string& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WriteRunConfig(out, config);
}

}  // namespace bran
