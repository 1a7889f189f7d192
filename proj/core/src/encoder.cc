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

#include "bran/encoder.h"

#include <cmath>
#include <vector>

#include "bran/error.h"
#include "bran/ops.h"

namespace bran {
namespace {

constexpr double kMaskedScore = -1e9;

std::string HeadPrefix(int block, int head) {
  return BlockPrefix(block) + "attn.head" + std::to_string(head) + ".";
}

std::string ConvPrefix(int block, int layer) {
  return BlockPrefix(block) + "ffn.conv" + std::to_string(layer) + ".";
}

// Zeroes padded rows of an [n, c] value; identity for an all-real mask.
Var MaskRows(Var x, std::span<const uint8_t> mask) {
  bool any_padding = false;
  for (uint8_t m : mask) any_padding = any_padding || m == 0;
  if (!any_padding) return x;
  const int64_t n = x.shape()[0], c = x.shape()[1];
  Tensor keep({n, c});
  for (int64_t i = 0; i < n; ++i) {
    const double v = mask[static_cast<size_t>(i)] != 0 ? 1.0 : 0.0;
    for (int64_t j = 0; j < c; ++j) keep[i * c + j] = v;
  }
  return ApplyMask(x, keep);
}

void AddConv(ParamSet& params, const std::string& prefix, int width, int c_in, int c_out,
             std::mt19937_64& rng) {
  params.Add(prefix + "kernel",
             GlorotUniform({width, c_in, c_out}, int64_t{width} * c_in, int64_t{width} * c_out, rng));
  params.Add(prefix + "bias", Tensor({c_out}));
}

}  // namespace

Var Dropout::Apply(Var x) const {
  if (!active()) return x;
  Tensor mask(x.shape());
  std::bernoulli_distribution keep_draw(keep);
  const double scale = 1.0 / keep;
  for (double& v : mask.values()) v = keep_draw(*rng) ? scale : 0.0;
  return ApplyMask(x, mask);
}

Tensor GlorotUniform(Shape shape, int64_t fan_in, int64_t fan_out, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

std::string BlockPrefix(int block) { return "block" + std::to_string(block) + "."; }

void AddEncoderParams(const EncoderConfig& config, int vocab_size, ParamSet& params,
                      std::mt19937_64& rng) {
  config.Validate();
  if (vocab_size < 1) throw ConfigError("vocabulary size must be >= 1");
  const int d = config.dim, dh = config.head_dim(), inner = config.inner_dim();
  params.Add("embed.tokens", GlorotUniform({vocab_size, d}, vocab_size, d, rng));
  params.Add("embed.positions", GlorotUniform({config.max_positions, d}, config.max_positions, d, rng));
  params.Add("embed.fallback", GlorotUniform({d}, config.max_positions, d, rng));
  for (int b = 0; b < config.blocks; ++b) {
    if (config.has_attention()) {
      for (int h = 0; h < config.heads; ++h) {
        for (const char* role : {"query", "key", "value"}) {
          const std::string prefix = HeadPrefix(b, h) + role + ".";
          params.Add(prefix + "weight", GlorotUniform({d, dh}, d, dh, rng));
          params.Add(prefix + "bias", Tensor({dh}));
        }
      }
      params.Add(BlockPrefix(b) + "attn.norm.gain", Tensor({d}, 1.0));
      params.Add(BlockPrefix(b) + "attn.norm.bias", Tensor({d}));
    }
    AddConv(params, ConvPrefix(b, 0), 1, d, inner, rng);
    AddConv(params, ConvPrefix(b, 1), config.middle_width(), inner, inner, rng);
    AddConv(params, ConvPrefix(b, 2), 1, inner, d, rng);
    if (config.post_ffn_layer_norm) {
      params.Add(BlockPrefix(b) + "ffn.norm.gain", Tensor({d}, 1.0));
      params.Add(BlockPrefix(b) + "ffn.norm.bias", Tensor({d}));
    }
  }
}

int64_t EncoderParamCount(const EncoderConfig& config, int vocab_size) {
  const int64_t d = config.dim, inner = config.inner_dim();
  int64_t count = int64_t{vocab_size} * d + int64_t{config.max_positions} * d + d;
  int64_t per_block = 0;
  if (config.has_attention()) {
    // q, k, v: heads x (d x d/h weights + d/h biases) = d*d + d each.
    per_block += 3 * (d * d + d);
    per_block += 2 * d;  // layer norm
  }
  per_block += d * inner + inner;
  per_block += int64_t{config.middle_width()} * inner * inner + inner;
  per_block += inner * d + d;
  if (config.post_ffn_layer_norm) per_block += 2 * d;
  return count + per_block * config.blocks;
}

Var Embed(Tape& tape, ParamSet& params, const EncoderConfig& config,
          std::span<const int> token_ids) {
  if (token_ids.empty()) throw ContractError("cannot embed an empty token sequence");
  Var tokens = EmbeddingLookup(tape.Param(params.Get("embed.tokens")), token_ids);
  const int64_t n = static_cast<int64_t>(token_ids.size());
  const int64_t in_table = std::min<int64_t>(n, config.max_positions);
  std::vector<int64_t> rows(static_cast<size_t>(in_table));
  for (int64_t i = 0; i < in_table; ++i) rows[static_cast<size_t>(i)] = i;
  Var positions = GatherRows(tape.Param(params.Get("embed.positions")), rows);
  if (n > in_table) {
    Var fallback = Reshape(tape.Param(params.Get("embed.fallback")), {1, config.dim});
    std::vector<int64_t> repeat(static_cast<size_t>(n - in_table), 0);
    Var tail = GatherRows(fallback, repeat);
    const Var parts[] = {positions, tail};
    positions = Concat(parts, 0);
  }
  return Add(tokens, positions);
}

Var MultiHeadAttention(Tape& tape, ParamSet& params, const EncoderConfig& config, int block,
                       Var x, std::span<const uint8_t> mask, const Dropout& dropout) {
  const int64_t n = x.shape()[0];
  if (x.value().rank() != 2 || x.shape()[1] != config.dim) {
    throw DimensionError("attention input " + ShapeToString(x.shape()) + " for dim " +
                         std::to_string(config.dim));
  }
  std::vector<uint8_t> full_mask;
  if (mask.empty()) {
    full_mask.assign(static_cast<size_t>(n), 1);
    mask = full_mask;
  }
  if (static_cast<int64_t>(mask.size()) != n) {
    throw DimensionError("mask of length " + std::to_string(mask.size()) + " for " +
                         std::to_string(n) + " positions");
  }
  bool any_real = false, any_padding = false;
  for (uint8_t m : mask) {
    any_real = any_real || m != 0;
    any_padding = any_padding || m == 0;
  }
  if (!any_real) throw ContractError("attention mask excludes every position");

  std::vector<Var> heads;
  heads.reserve(static_cast<size_t>(config.heads));
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.dim));
  Var key_bias;
  if (any_padding) {
    Tensor bias({n, n});
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        if (mask[static_cast<size_t>(j)] == 0) bias[i * n + j] = kMaskedScore;
      }
    }
    key_bias = tape.Constant(std::move(bias));
  }
  for (int h = 0; h < config.heads; ++h) {
    const std::string prefix = HeadPrefix(block, h);
    auto project = [&](const char* role) {
      const std::string p = prefix + role + ".";
      return Relu(AddBias(MatMul(x, tape.Param(params.Get(p + "weight"))),
                          tape.Param(params.Get(p + "bias"))));
    };
    Var q = project("query");
    Var k = project("key");
    Var v = project("value");
    Var scores = Scale(MatMul(q, Transpose(k)), scale);
    if (key_bias.valid()) scores = Add(scores, key_bias);
    Var weights = Softmax(scores, 1);
    heads.push_back(MatMul(weights, v));
  }
  Var attended = heads.size() == 1 ? heads.front() : Concat(heads, 1);
  attended = dropout.Apply(attended);
  const std::string norm = BlockPrefix(block) + "attn.norm.";
  return LayerNorm(Add(x, attended), tape.Param(params.Get(norm + "gain")),
                   tape.Param(params.Get(norm + "bias")));
}

Var FeedForward(Tape& tape, ParamSet& params, const EncoderConfig& config, int block, Var m,
                std::span<const uint8_t> mask) {
  if (m.value().rank() != 2 || m.shape()[1] != config.dim) {
    throw DimensionError("feed-forward input " + ShapeToString(m.shape()) + " for dim " +
                         std::to_string(config.dim));
  }
  auto conv = [&](Var in, int layer) {
    const std::string p = ConvPrefix(block, layer);
    return Conv1d(in, tape.Param(params.Get(p + "kernel")), tape.Param(params.Get(p + "bias")));
  };
  Var t0 = Relu(conv(MaskRows(m, mask), 0));
  Var t1 = Relu(conv(MaskRows(t0, mask), 1));
  return conv(MaskRows(t1, mask), 2);
}

Var Encode(Tape& tape, ParamSet& params, const EncoderConfig& config,
           std::span<const int> token_ids, std::span<const uint8_t> mask,
           const Dropout& dropout) {
  config.Validate();
  std::vector<uint8_t> full_mask;
  if (mask.empty()) {
    full_mask.assign(token_ids.size(), 1);
    mask = full_mask;
  }
  if (mask.size() != token_ids.size()) {
    throw DimensionError("mask of length " + std::to_string(mask.size()) + " for " +
                         std::to_string(token_ids.size()) + " tokens");
  }
  Var b = dropout.Apply(Embed(tape, params, config, token_ids));
  for (int k = 0; k < config.blocks; ++k) {
    Var m = config.has_attention() ? MultiHeadAttention(tape, params, config, k, b, mask, dropout)
                                   : b;
    Var t = dropout.Apply(FeedForward(tape, params, config, k, m, mask));
    b = Add(b, t);
    if (config.post_ffn_layer_norm) {
      const std::string norm = BlockPrefix(k) + "ffn.norm.";
      b = LayerNorm(b, tape.Param(params.Get(norm + "gain")), tape.Param(params.Get(norm + "bias")));
    }
  }
  return b;
}

}  // namespace bran
