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

#ifndef BRAN_TESTS_TEST_UTIL_H_
#define BRAN_TESTS_TEST_UTIL_H_

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bran/config.h"
#include "bran/corpus.h"
#include "bran/gradcheck.h"
#include "bran/ops.h"
#include "bran/tape.h"
#include "bran/synth.h"
#include "bran/tensor.h"
#include "bran/tokenizer.h"

namespace bran::testing {

inline Tensor RandomTensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Max relative gradient error of f over the given inputs. The output is
// contracted with fixed random weights so every Jacobian row matters.
inline double OpGradientError(
    const std::function<Var(Tape&, std::vector<Var>&)>& f, const std::vector<Tensor>& inputs,
    uint64_t seed = 7, double step = 1e-6) {
  ParamSet params;
  for (size_t i = 0; i < inputs.size(); ++i) params.Add("in" + std::to_string(i), inputs[i]);
  Tensor weights;
  auto loss = [&](Tape& tape) {
    std::vector<Var> vars;
    for (size_t i = 0; i < params.size(); ++i) vars.push_back(tape.Param(params[i]));
    Var out = f(tape, vars);
    if (weights.empty()) {
      std::mt19937_64 rng(seed);
      weights = RandomTensor(out.shape(), rng);
    }
    return Sum(ApplyMask(out, weights));
  };
  params.ZeroGrad();
  {
    Tape tape;
    tape.Backward(loss(tape));
  }
  return CompareGradients(
             params,
             [&] {
               Tape tape(false);
               return loss(tape).value().item();
             },
             step)
      .max_relative_error;
}

// Small tokenized planted corpus for training-loop tests.
struct TinyCorpus {
  Vocabulary vocab;
  std::vector<Document> train;
  std::vector<Document> dev;
};

inline TinyCorpus MakeTinyCorpus(int train_docs = 12, int dev_docs = 6, uint64_t seed = 3) {
  SynthOptions options;
  options.train_docs = train_docs;
  options.dev_docs = dev_docs;
  options.seed = seed;
  const SynthCorpus synth = MakeSynthCorpus(options);
  TinyCorpus out;
  out.train = ParsePubtator(synth.train_pubtator);
  out.dev = ParsePubtator(synth.dev_pubtator);
  std::vector<std::string> texts;
  for (const Document& doc : out.train) texts.push_back(doc.text);
  out.vocab = TrainBpe(texts, 60);
  for (Document& doc : out.train) TokenizeDocument(out.vocab, doc);
  for (Document& doc : out.dev) TokenizeDocument(out.vocab, doc);
  return out;
}

// Fast configuration for loop tests.
inline RunConfig TinyConfig() {
  RunConfig c;
  c.encoder.dim = 8;
  c.encoder.heads = 2;
  c.encoder.blocks = 1;
  c.encoder.max_positions = 64;
  c.batch_size = 4;
  c.max_steps = 6;
  c.eval_every = 3;
  c.patience = 5;
  c.bpe_budget = 60;
  c.train_docs = 12;
  c.dev_docs = 6;
  return c;
}

}  // namespace bran::testing

#endif  // BRAN_TESTS_TEST_UTIL_H_
