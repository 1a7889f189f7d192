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

#ifndef BRAN_TRAINER_H_
#define BRAN_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bran/config.h"
#include "bran/corpus.h"
#include "bran/evalkit.h"
#include "bran/model.h"
#include "bran/tape.h"
#include "bran/tokenizer.h"

namespace bran {

// Softmax cross-entropy of [C, l] pair scores over the candidates selected
// by `mask`, divided by `normalizer` (default: the selected count).
Var RelationLoss(Var pair_scores, std::span<const RelationLabel> labels,
                 std::span<const uint8_t> mask, double normalizer = 0.0);

struct AdamOptions {
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments shaped like the parameters plus the number of completed steps.
struct AdamState {
  int64_t step = 0;
  std::vector<Tensor> first;
  std::vector<Tensor> second;
};

AdamState InitAdam(const ParamSet& params);

// One bias-corrected Adam update from the current gradients. A non-finite
// gradient raises NumericError naming the parameter, before anything is
// modified.
void AdamStep(ParamSet& params, AdamState& state, const AdamOptions& options);

double GlobalGradNorm(const ParamSet& params);

// Rescales gradients to norm `clip_norm` when larger, then adds N(0, s^2)
// noise per coordinate with s^2 = eta / (1 + t)^0.55. Returns the norm
// before clipping.
double ClipAndNoise(ParamSet& params, double clip_norm, double eta, int64_t t,
                    std::mt19937_64& rng);

double NoiseVariance(double eta, int64_t t);

// Replaces each id by `unk_id` with probability 1 - keep.
std::vector<int> WordUnkDropout(std::span<const int> token_ids, double keep, int unk_id,
                                std::mt19937_64& rng);

ModelSpec MakeModelSpec(const RunConfig& config, int vocab_size);

// Positive-class probability of every candidate in every document.
std::vector<PairPrediction> PredictDocuments(const BranModel& model,
                                             std::span<const Document> docs);

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> dev;
};

// Seeded shuffle, then train_docs/dev_docs documents, with the proportions
// scaled down when the corpus is smaller than their sum.
CorpusSplit SplitCorpus(std::vector<Document> docs, const RunConfig& config);

struct LogEntry {
  int64_t step = 0;    // 1-based
  double loss = 0.0;   // joint minibatch loss
  bool evaluated = false;
  double dev_f1 = 0.0;
};

struct TrainResult {
  ParamSet best_params;
  ModelSpec spec;
  double theta = 1.0;
  double best_dev_f1 = -1.0;
  int64_t best_step = 0;
  int64_t steps = 0;
  int evaluations = 0;
  std::vector<LogEntry> log;
};

// "step<TAB>loss<TAB>dev_F1" with "-" for steps without an evaluation.
void WriteTrainLog(std::ostream& out, std::span<const LogEntry> log);
std::string FormatLogEntry(const LogEntry& entry);

// Runs the optimization loop over tokenized documents. Evaluates on `dev`
// every eval_every steps (and after the last step), keeping the parameters
// and threshold of the best strict dev F1 improvement. Stops after
// `patience` evaluations without improvement or once dev F1 reaches 1.
// `progress`, when given, receives the log line of every evaluation.
TrainResult Train(const RunConfig& config, const Vocabulary& vocab,
                  std::span<const Document> train, std::span<const Document> dev,
                  std::ostream* progress = nullptr);

// Run directory layout.
inline constexpr char kModelFile[] = "model.bin";
inline constexpr char kConfigFile[] = "run.cfg";
inline constexpr char kVocabFile[] = "vocab.bpe";
inline constexpr char kLogFile[] = "train.log";
inline constexpr char kThetaTensor[] = "meta.theta";

// Writes model.bin (parameters plus the tuned threshold), run.cfg,
// vocab.bpe and train.log into `dir`, creating it if needed.
void SaveRun(const std::string& dir, const RunConfig& config, const Vocabulary& vocab,
             const TrainResult& result);

struct LoadedRun {
  RunConfig config;
  Vocabulary vocab;
  BranModel model;
  double theta = 1.0;
};

LoadedRun LoadRun(const std::string& dir);

}  // namespace bran

#endif  // BRAN_TRAINER_H_
