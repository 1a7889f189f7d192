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

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "bran/encoder.h"
#include "bran/ops.h"
#include "bran/relscore.h"
#include "bran/synth.h"
#include "bran/corpus.h"
#include "bran/tokenizer.h"

namespace bran {
namespace {

EncoderConfig DefaultEncoder() {
  EncoderConfig c;  // d=64, h=4, B=2
  return c;
}

void BM_EncoderForward(benchmark::State& state) {
  const EncoderConfig config = DefaultEncoder();
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  ParamSet params;
  AddEncoderParams(config, 1000, params, rng);
  std::vector<int> ids(static_cast<size_t>(n));
  for (int& id : ids) id = static_cast<int>(rng() % 1000);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(Encode(tape, params, config, ids).value().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const EncoderConfig config = DefaultEncoder();
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  ParamSet params;
  AddEncoderParams(config, 1000, params, rng);
  std::vector<int> ids(static_cast<size_t>(n));
  for (int& id : ids) id = static_cast<int>(rng() % 1000);
  for (auto _ : state) {
    params.ZeroGrad();
    Tape tape;
    tape.Backward(Sum(Encode(tape, params, config, ids)));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Biaffine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 64;
  std::mt19937_64 rng(2);
  ParamSet params;
  AddRelScoreParams(d, kNumRelations, params, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : params.Get("rel.bilinear").value.values()) v = u(rng);
  Tensor head({n, d}), tail({n, d});
  for (double& v : head.values()) v = u(rng);
  for (double& v : tail.values()) v = u(rng);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(
        Biaffine(tape, params, tape.Constant(head), tape.Constant(tail)).value().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Biaffine)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

std::vector<std::string> SynthTexts() {
  std::vector<std::string> texts;
  for (const Document& doc : ParsePubtator(MakeSynthCorpus({}).train_pubtator)) {
    texts.push_back(doc.text);
  }
  return texts;
}

void BM_BpeTrain(benchmark::State& state) {
  const std::vector<std::string> texts = SynthTexts();
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainBpe(texts, static_cast<int>(state.range(0))).size());
  }
}
BENCHMARK(BM_BpeTrain)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BpeEncode(benchmark::State& state) {
  const std::vector<std::string> texts = SynthTexts();
  const Vocabulary vocab = TrainBpe(texts, 200);
  int64_t bytes = 0;
  for (const std::string& t : texts) bytes += static_cast<int64_t>(t.size());
  for (auto _ : state) {
    for (const std::string& t : texts) benchmark::DoNotOptimize(Encode(vocab, t).token_ids.data());
  }
  state.SetBytesProcessed(state.iterations() * bytes);
}
BENCHMARK(BM_BpeEncode)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace bran

BENCHMARK_MAIN();
