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

#include "bran/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bran/checkpoint.h"
#include "bran/encoder.h"
#include "bran/error.h"
#include "bran/logging.h"
#include "bran/nertag.h"
#include "bran/ops.h"

namespace bran {
namespace {

// Independent generator per purpose, all derived from the run seed.
enum class Stream : uint32_t { kInit = 0, kSplit = 1, kSample = 2, kDropout = 3, kNoise = 4 };

std::mt19937_64 MakeStream(uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream)};
  return std::mt19937_64(seq);
}

uint64_t InitSeed(uint64_t seed) { return MakeStream(seed, Stream::kInit)(); }

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Evaluation {
  double f1 = 0.0;
  double theta = 1.0;
};

Evaluation EvaluateDev(const BranModel& model, std::span<const Document> dev) {
  const std::vector<PairPrediction> predictions = PredictDocuments(model, dev);
  const std::vector<PairKey> gold = GoldKeys(dev);
  const ThresholdChoice choice = SweepThreshold(predictions, gold);
  return {choice.f1, choice.theta};
}

}  // namespace

Var RelationLoss(Var pair_scores, std::span<const RelationLabel> labels,
                 std::span<const uint8_t> mask, double normalizer) {
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (RelationLabel label : labels) ids.push_back(static_cast<int>(label));
  return SoftmaxCrossEntropy(pair_scores, ids, mask, normalizer);
}

AdamState InitAdam(const ParamSet& params) {
  AdamState state;
  for (size_t i = 0; i < params.size(); ++i) {
    state.first.emplace_back(params[i].value.shape(), 0.0);
    state.second.emplace_back(params[i].value.shape(), 0.0);
  }
  return state;
}

void AdamStep(ParamSet& params, AdamState& state, const AdamOptions& options) {
  if (state.first.size() != params.size() || state.second.size() != params.size()) {
    throw ContractError("Adam state does not match the parameter set");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (p.grad.shape() != p.value.shape()) {
      throw ContractError("parameter '" + p.name + "' has no gradient buffer");
    }
    if (!p.grad.AllFinite()) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double b1 = options.beta1, b2 = options.beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    double* m = state.first[i].data();
    double* v = state.second[i].data();
    double* w = p.value.data();
    const double* g = p.grad.data();
    for (int64_t k = 0; k < p.value.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      w[k] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

double GlobalGradNorm(const ParamSet& params) {
  double sum = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    for (double g : params[i].grad.values()) sum += g * g;
  }
  return std::sqrt(sum);
}

double NoiseVariance(double eta, int64_t t) {
  return eta / std::pow(1.0 + static_cast<double>(t), 0.55);
}

double ClipAndNoise(ParamSet& params, double clip_norm, double eta, int64_t t,
                    std::mt19937_64& rng) {
  const double norm = GlobalGradNorm(params);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (size_t i = 0; i < params.size(); ++i) {
      for (double& g : params[i].grad.values()) g *= factor;
    }
  }
  if (eta > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(NoiseVariance(eta, t)));
    for (size_t i = 0; i < params.size(); ++i) {
      for (double& g : params[i].grad.values()) g += noise(rng);
    }
  }
  return norm;
}

std::vector<int> WordUnkDropout(std::span<const int> token_ids, double keep, int unk_id,
                                std::mt19937_64& rng) {
  std::vector<int> out(token_ids.begin(), token_ids.end());
  if (keep >= 1.0) return out;
  std::bernoulli_distribution kept(std::max(0.0, keep));
  for (int& id : out) {
    if (!kept(rng)) id = unk_id;
  }
  return out;
}

ModelSpec MakeModelSpec(const RunConfig& config, int vocab_size) {
  ModelSpec spec;
  spec.encoder = config.encoder;
  spec.vocab_size = vocab_size;
  spec.num_relations = kNumRelations;
  spec.ner_head = config.ner_weight > 0.0;
  return spec;
}

std::vector<PairPrediction> PredictDocuments(const BranModel& model,
                                             std::span<const Document> docs) {
  std::vector<PairPrediction> out;
  for (const Document& doc : docs) {
    const std::vector<double> probs = model.PredictProbabilities(doc);
    for (size_t c = 0; c < doc.candidates.size(); ++c) {
      const CandidatePair& pair = doc.candidates[c];
      out.push_back({doc.doc_id, doc.entities[static_cast<size_t>(pair.head)].entity_id,
                     doc.entities[static_cast<size_t>(pair.tail)].entity_id, probs[c]});
    }
  }
  return out;
}

CorpusSplit SplitCorpus(std::vector<Document> docs, const RunConfig& config) {
  const size_t n = docs.size();
  if (n < 2) throw ConfigError("need at least two documents to split into train and dev");
  std::mt19937_64 rng = MakeStream(config.seed, Stream::kSplit);
  // Fisher-Yates with an explicit uniform draw keeps the order independent
  // of the standard library's shuffle implementation.
  for (size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<size_t> pick(0, i);
    std::swap(docs[i], docs[pick(rng)]);
  }
  const size_t want_train = static_cast<size_t>(config.train_docs);
  const size_t want_dev = static_cast<size_t>(config.dev_docs);
  size_t dev_count = want_dev, train_count = want_train;
  if (n < want_train + want_dev) {
    const double share = static_cast<double>(want_dev) / static_cast<double>(want_train + want_dev);
    dev_count = std::clamp<size_t>(static_cast<size_t>(std::lround(share * static_cast<double>(n))),
                                   1, n - 1);
    train_count = n - dev_count;
  } else if (n > want_train + want_dev) {
    LogWarning("using " + std::to_string(want_train + want_dev) + " of " + std::to_string(n) +
               " documents");
  }
  CorpusSplit split;
  split.dev.assign(std::make_move_iterator(docs.begin()),
                   std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(dev_count)));
  split.train.assign(
      std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(dev_count)),
      std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(dev_count + train_count)));
  return split;
}

std::string FormatLogEntry(const LogEntry& entry) {
  std::string line = std::to_string(entry.step) + '\t' + FormatDouble(entry.loss) + '\t';
  line += entry.evaluated ? FormatDouble(entry.dev_f1) : "-";
  return line;
}

void WriteTrainLog(std::ostream& out, std::span<const LogEntry> log) {
  for (const LogEntry& entry : log) out << FormatLogEntry(entry) << '\n';
}

TrainResult Train(const RunConfig& config, const Vocabulary& vocab,
                  std::span<const Document> train, std::span<const Document> dev,
                  std::ostream* progress) {
  config.Validate();
  if (train.empty()) throw ConfigError("no training documents");
  if (dev.empty()) throw ConfigError("no dev documents");
  for (const Document& doc : train) {
    if (doc.tokens.token_ids.empty()) {
      throw ContractError("document " + doc.doc_id + " is not tokenized");
    }
  }

  TrainResult result;
  result.spec = MakeModelSpec(config, vocab.size());
  BranModel model(result.spec, InitSeed(config.seed));
  ParamSet& params = model.params();
  AdamState adam = InitAdam(params);
  const AdamOptions adam_options{config.learning_rate, config.adam_beta1, config.adam_beta2,
                                 config.adam_epsilon};

  std::mt19937_64 sample_rng = MakeStream(config.seed, Stream::kSample);
  std::mt19937_64 dropout_rng = MakeStream(config.seed, Stream::kDropout);
  std::mt19937_64 noise_rng = MakeStream(config.seed, Stream::kNoise);
  const Dropout layer_dropout{&dropout_rng, config.layer_keep};

  std::vector<std::vector<BioTag>> tags;
  tags.reserve(train.size());
  for (const Document& doc : train) tags.push_back(MakeBioTags(doc));

  const PolarityIndex index = BuildPolarityIndex(train);
  if (index.positive_docs.empty() && index.negative_docs.empty()) {
    throw ConfigError("training documents contain no candidate pairs");
  }

  int stale = 0;
  for (int64_t t = 0; t < config.max_steps; ++t) {
    const Minibatch batch = SampleMinibatch(index, sample_rng, config.batch_size);
    const RelationLabel wanted =
        batch.polarity == Polarity::kPositive ? RelationLabel::kCid : RelationLabel::kNull;
    int64_t candidate_count = 0, token_count = 0;
    for (int d : batch.doc_indices) {
      const Document& doc = train[static_cast<size_t>(d)];
      for (const CandidatePair& pair : doc.candidates) candidate_count += pair.label == wanted;
      token_count += static_cast<int64_t>(doc.tokens.token_ids.size());
    }

    LogEntry entry;
    entry.step = t + 1;
    if (candidate_count == 0) {
      LogWarning("step " + std::to_string(t + 1) + ": minibatch has no candidates, skipped");
    } else {
      params.ZeroGrad();
      double batch_loss = 0.0;
      for (int d : batch.doc_indices) {
        const Document& doc = train[static_cast<size_t>(d)];
        Tape tape;
        const std::vector<int> ids =
            WordUnkDropout(doc.tokens.token_ids, config.word_keep, vocab.unk_id(), dropout_rng);
        const BranModel::Output out = model.Forward(tape, doc, ids, layer_dropout);
        Var loss;
        std::vector<uint8_t> mask(doc.candidates.size(), 0);
        std::vector<RelationLabel> labels(doc.candidates.size());
        bool any = false;
        for (size_t c = 0; c < doc.candidates.size(); ++c) {
          labels[c] = doc.candidates[c].label;
          mask[c] = labels[c] == wanted;
          any = any || mask[c] != 0;
        }
        if (any) {
          loss = RelationLoss(out.pair_scores, labels, mask, static_cast<double>(candidate_count));
        }
        if (result.spec.ner_head) {
          const std::vector<uint8_t> all(doc.tokens.token_ids.size(), 1);
          Var ner = Scale(NerLoss(out.ner_logits, tags[static_cast<size_t>(d)], all,
                                  static_cast<double>(token_count)),
                          config.ner_weight);
          loss = loss.valid() ? Add(loss, ner) : ner;
        }
        if (!loss.valid()) continue;
        batch_loss += loss.value().item();
        tape.Backward(loss);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss " + FormatDouble(batch_loss) + " at step " +
                           std::to_string(t + 1) + " (gradient norm " +
                           FormatDouble(GlobalGradNorm(params)) + ")");
      }
      ClipAndNoise(params, config.clip_norm, config.grad_noise_eta, t, noise_rng);
      AdamStep(params, adam, adam_options);
      entry.loss = batch_loss;
    }
    result.steps = t + 1;

    const bool last = t + 1 == config.max_steps;
    bool stop = false;
    if ((t + 1) % config.eval_every == 0 || last) {
      const Evaluation eval = EvaluateDev(model, dev);
      ++result.evaluations;
      entry.evaluated = true;
      entry.dev_f1 = eval.f1;
      if (eval.f1 > result.best_dev_f1) {
        result.best_dev_f1 = eval.f1;
        result.theta = eval.theta;
        result.best_step = t + 1;
        result.best_params = params;
        stale = 0;
      } else {
        ++stale;
      }
      stop = stale >= config.patience || result.best_dev_f1 >= 1.0;
    }
    result.log.push_back(entry);
    if (progress != nullptr && entry.evaluated) *progress << FormatLogEntry(entry) << '\n' << std::flush;
    if (stop) break;
  }
  return result;
}

void SaveRun(const std::string& dir, const RunConfig& config, const Vocabulary& vocab,
             const TrainResult& result) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  std::vector<NamedTensor> tensors = ParamsToTensors(result.best_params);
  tensors.emplace_back(kThetaTensor, Tensor::Scalar(result.theta));
  SaveTensorFile((root / kModelFile).string(), tensors);
  SaveRunConfig((root / kConfigFile).string(), config);
  SaveVocabulary((root / kVocabFile).string(), vocab);
  std::ofstream log((root / kLogFile).string(), std::ios::binary | std::ios::trunc);
  if (!log) throw Error("cannot write " + (root / kLogFile).string());
  WriteTrainLog(log, result.log);
}

LoadedRun LoadRun(const std::string& dir) {
  const std::filesystem::path root(dir);
  RunConfig config = LoadRunConfig((root / kConfigFile).string());
  Vocabulary vocab = LoadVocabulary((root / kVocabFile).string());
  const std::vector<NamedTensor> tensors = LoadTensorFile((root / kModelFile).string());
  double theta = -1.0;
  for (const auto& [name, tensor] : tensors) {
    if (name == kThetaTensor) {
      if (tensor.size() != 1) throw ParseError("threshold tensor must hold one value");
      theta = tensor.item();
    }
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ParseError("checkpoint lacks a threshold in (0, 1]");
  }
  BranModel model(MakeModelSpec(config, vocab.size()), /*seed=*/0);
  AssignParams(tensors, model.params());
  return LoadedRun{std::move(config), std::move(vocab), std::move(model), theta};
}

}  // namespace bran
