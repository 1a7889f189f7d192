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

#ifndef BRAN_ENCODER_H_
#define BRAN_ENCODER_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "bran/config.h"
#include "bran/tape.h"

// Token + position embeddings followed by B Transformer blocks. A block is
//
//   m = LayerNorm(b + concat_h(attention_h(b)))
//   t = C1(relu(Cw(relu(C1(m)))))          (w = 5, or 1 under no_width5)
//   b' = b + t
//
// with q/k/v = relu(affine(b)) per head and scores q.k / sqrt(dim). Under
// cnn_only the attention sub-layer (and its layer norm) is absent and
// m = b.

namespace bran {

// Inverted dropout: keeps each entry with probability `keep` and rescales
// kept entries by 1/keep. Inactive without an rng or when keep >= 1.
struct Dropout {
  std::mt19937_64* rng = nullptr;
  double keep = 1.0;

  bool active() const { return rng != nullptr && keep < 1.0; }
  // Applies a fresh mask, or returns `x` unchanged when inactive.
  Var Apply(Var x) const;
};

// Uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out)).
Tensor GlorotUniform(Shape shape, int64_t fan_in, int64_t fan_out,
                     std::mt19937_64& rng);

// Registers every encoder parameter (see the naming helpers below).
void AddEncoderParams(const EncoderConfig& config, int vocab_size,
                      ParamSet& params, std::mt19937_64& rng);

// Number of scalars AddEncoderParams creates, computed from the formulas.
int64_t EncoderParamCount(const EncoderConfig& config, int vocab_size);

std::string BlockPrefix(int block);

// x_i = S[id_i] + P[i] for i < max_positions, S[id_i] + fallback beyond.
Var Embed(Tape& tape, ParamSet& params, const EncoderConfig& config,
          std::span<const int> token_ids);

// Returns LayerNorm(x + concat of heads). `mask` marks real (1) and padded
// (0) positions; padded keys get -1e9 before the softmax. An all-zero mask
// is a ContractError.
Var MultiHeadAttention(Tape& tape, ParamSet& params, const EncoderConfig& config,
                       int block, Var x, std::span<const uint8_t> mask,
                       const Dropout& dropout = {});

// The three-convolution stack; padded rows are zeroed before every
// convolution so they never leak into real positions.
Var FeedForward(Tape& tape, ParamSet& params, const EncoderConfig& config,
                int block, Var m, std::span<const uint8_t> mask);

// Full encoder: b^(0) = dropout(embed), b^(k) = b^(k-1) + Block_k(b^(k-1)).
// An empty `mask` means every position is real.
Var Encode(Tape& tape, ParamSet& params, const EncoderConfig& config,
           std::span<const int> token_ids, std::span<const uint8_t> mask = {},
           const Dropout& dropout = {});

}  // namespace bran

#endif  // BRAN_ENCODER_H_
