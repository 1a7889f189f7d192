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

#include "bran_cli/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

#include "bran/config.h"
#include "bran/corpus.h"
#include "bran/error.h"
#include "bran/evalkit.h"
#include "bran/gradcheck.h"
#include "bran/logging.h"
#include "bran/synth.h"
#include "bran/tokenizer.h"
#include "bran/trainer.h"

namespace bran::cli {
namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Precise(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
}

std::vector<std::string> DocumentTexts(std::span<const Document> docs) {
  std::vector<std::string> texts;
  for (const Document& doc : docs) texts.push_back(doc.text);
  return texts;
}

// ---------------------------------------------------------------------------

struct BpeTrainFlags {
  std::vector<std::string> inputs;
  bool plain_text = false;
  int budget = 2500;
  std::string out;
};

int BpeTrain(const BpeTrainFlags& f, std::ostream& out) {
  std::vector<std::string> corpus;
  for (const std::string& path : f.inputs) {
    if (f.plain_text) {
      std::istringstream lines(ReadFile(path));
      std::string line;
      while (std::getline(lines, line)) corpus.push_back(line);
    } else {
      const auto texts = DocumentTexts(ReadPubtatorFile(path));
      corpus.insert(corpus.end(), texts.begin(), texts.end());
    }
  }
  const Vocabulary vocab = TrainBpe(corpus, f.budget);
  SaveVocabulary(f.out, vocab);
  out << "merges=" << vocab.merges().size() << " vocab_size=" << vocab.size() << '\n';
  return kExitOk;
}

struct BpeEncodeFlags {
  std::string vocab;
  std::string input;
  bool ids = false;
};

int BpeEncode(const BpeEncodeFlags& f, std::ostream& out) {
  const Vocabulary vocab = LoadVocabulary(f.vocab);
  std::istringstream file_in;
  if (!f.input.empty()) file_in.str(ReadFile(f.input));
  std::istream& in = f.input.empty() ? std::cin : file_in;
  std::string line;
  while (std::getline(in, line)) {
    const TokenizedText tokens = Encode(vocab, line);
    for (size_t i = 0; i < tokens.token_ids.size(); ++i) {
      if (i != 0) out << ' ';
      if (f.ids) {
        out << tokens.token_ids[i];
      } else {
        out << vocab.Token(tokens.token_ids[i]);
      }
    }
    out << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

// Run-config keys exposed as flags; a few also get short aliases.
const std::vector<std::pair<std::string, std::string>>& ConfigFlags() {
  static const std::vector<std::pair<std::string, std::string>> kFlags = {
      {"dim", "--dim,--d"},
      {"heads", "--heads"},
      {"blocks", "--blocks"},
      {"max_positions", "--max-positions"},
      {"ablation", "--ablation"},
      {"post_ffn_layer_norm", "--post-ffn-layer-norm"},
      {"mention_cells", "--mention-cells"},
      {"bpe_budget", "--bpe-budget"},
      {"learning_rate", "--learning-rate,--lr"},
      {"batch_size", "--batch-size"},
      {"adam_beta1", "--adam-beta1"},
      {"adam_beta2", "--adam-beta2"},
      {"adam_epsilon", "--adam-epsilon"},
      {"clip_norm", "--clip-norm"},
      {"grad_noise_eta", "--grad-noise-eta,--eta"},
      {"word_keep", "--word-keep"},
      {"layer_keep", "--layer-keep"},
      {"ner_weight", "--ner-weight,--lambda"},
      {"max_steps", "--max-steps"},
      {"eval_every", "--eval-every"},
      {"patience", "--patience"},
      {"seed", "--seed"},
      {"train_docs", "--train-docs"},
      {"dev_docs", "--dev-docs"},
  };
  return kFlags;
}

struct TrainFlags {
  std::string train;
  std::string dev;
  std::string config;
  std::string vocab;
  std::string mesh;
  bool filter_training_hypernyms = false;
  std::string out;
  bool quiet = false;
  std::map<std::string, std::optional<std::string>> overrides;
};

RunConfig ResolveConfig(const TrainFlags& f) {
  RunConfig config = f.config.empty() ? RunConfig{} : LoadRunConfig(f.config);
  for (const auto& [key, value] : f.overrides) {
    if (value) config.Set(key, *value);
  }
  config.Validate();
  return config;
}

int TrainCommand(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig config = ResolveConfig(f);
  std::vector<Document> train, dev;
  if (f.dev.empty()) {
    CorpusSplit split = SplitCorpus(ReadPubtatorFile(f.train), config);
    train = std::move(split.train);
    dev = std::move(split.dev);
  } else {
    train = ReadPubtatorFile(f.train);
    dev = ReadPubtatorFile(f.dev);
  }
  if (f.filter_training_hypernyms) {
    if (f.mesh.empty()) throw ConfigError("--filter-training-hypernyms needs --mesh");
    FilterTrainingHypernyms(train, LoadMeshTree(f.mesh));
  }
  const Vocabulary vocab = f.vocab.empty()
                               ? TrainBpe(DocumentTexts(train), config.bpe_budget)
                               : LoadVocabulary(f.vocab);
  for (Document& doc : train) TokenizeDocument(vocab, doc, config.mention_cells);
  for (Document& doc : dev) TokenizeDocument(vocab, doc, config.mention_cells);

  const TrainResult result = Train(config, vocab, train, dev, f.quiet ? nullptr : &err);
  SaveRun(f.out, config, vocab, result);
  out << "train_docs=" << train.size() << " dev_docs=" << dev.size()
      << " params=" << result.best_params.NumScalars() << " steps=" << result.steps
      << " evaluations=" << result.evaluations << " best_step=" << result.best_step
      << " dev_F1=" << Fixed(result.best_dev_f1) << " theta=" << Precise(result.theta) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictFlags {
  std::string model;
  std::string input;
  std::string out;
  std::string mesh;
  std::optional<double> theta;
  bool all = false;
};

int PredictCommand(const PredictFlags& f, std::ostream& out) {
  const LoadedRun run = LoadRun(f.model);
  std::vector<Document> docs = ReadPubtatorFile(f.input);
  for (Document& doc : docs) TokenizeDocument(run.vocab, doc, run.config.mention_cells);
  std::vector<PairPrediction> predictions = PredictDocuments(run.model, docs);
  if (!f.all) {
    const double theta = f.theta.value_or(run.theta);
    std::erase_if(predictions, [&](const PairPrediction& p) { return p.probability < theta; });
    if (!f.mesh.empty()) predictions = FilterHypernyms(predictions, LoadMeshTree(f.mesh));
  }
  const size_t count = predictions.size();
  if (f.out.empty()) {
    WritePredictions(out, std::move(predictions));
  } else {
    SavePredictions(f.out, std::move(predictions));
    out << "pairs=" << count << '\n';
  }
  return kExitOk;
}

struct EvalFlags {
  std::string gold;
  std::string pred;
  std::string mesh;
  double theta = 0.0;
  bool per_document = false;
};

void PrintReport(const EvalReport& report, bool per_document, std::ostream& out) {
  if (per_document) {
    for (const auto& [doc, c] : report.per_document) {
      out << doc << "\tTP=" << c.true_positives << "\tFP=" << c.false_positives
          << "\tFN=" << c.false_negatives << '\n';
    }
  }
  out << "TP=" << report.counts.true_positives << " FP=" << report.counts.false_positives
      << " FN=" << report.counts.false_negatives << '\n';
  out << "P=" << Fixed(report.precision) << " R=" << Fixed(report.recall)
      << " F1=" << Fixed(report.f1) << '\n';
}

int EvalCommand(const EvalFlags& f, std::ostream& out) {
  const std::vector<Document> gold_docs = ReadPubtatorFile(f.gold);
  std::vector<PairPrediction> predictions = LoadPredictions(f.pred);
  std::erase_if(predictions, [&](const PairPrediction& p) { return p.probability < f.theta; });
  if (!f.mesh.empty()) predictions = FilterHypernyms(predictions, LoadMeshTree(f.mesh));
  std::vector<PairKey> keys;
  for (const PairPrediction& p : predictions) keys.push_back(p.key());
  PrintReport(Score(keys, GoldKeys(gold_docs)), f.per_document, out);
  return kExitOk;
}

struct EnsembleFlags {
  std::vector<std::string> preds;
  std::optional<double> theta;
  std::string gold;
  std::string out;
};

int EnsembleCommand(const EnsembleFlags& f, std::ostream& out) {
  if (!f.theta && f.gold.empty()) throw ConfigError("ensemble needs --theta or --gold");
  std::vector<std::vector<PairPrediction>> runs;
  for (const std::string& path : f.preds) runs.push_back(LoadPredictions(path));
  std::vector<PairPrediction> mean = Ensemble(runs);
  double theta = 0.0;
  if (f.theta) {
    theta = *f.theta;
  } else {
    const std::vector<Document> gold_docs = ReadPubtatorFile(f.gold);
    theta = SweepThreshold(mean, GoldKeys(gold_docs)).theta;
    out << "theta=" << Precise(theta) << '\n';
  }
  std::erase_if(mean, [&](const PairPrediction& p) { return p.probability < theta; });
  if (!f.gold.empty()) {
    std::vector<PairKey> keys;
    for (const PairPrediction& p : mean) keys.push_back(p.key());
    PrintReport(Score(keys, GoldKeys(ReadPubtatorFile(f.gold))), false, out);
  }
  if (f.out.empty()) {
    if (f.gold.empty()) WritePredictions(out, std::move(mean));
  } else {
    SavePredictions(f.out, std::move(mean));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradCheckFlags {
  GradCheckOptions options;
  std::string ablation = "full";
  std::string cells = "first";
  double threshold = 1e-5;
};

int GradCheckCommand(GradCheckFlags f, std::ostream& out) {
  f.options.encoder.ablation = ParseAblation(f.ablation);
  f.options.cells = ParseMentionCells(f.cells);
  const GradCheckReport report = RunGradCheck(f.options);
  for (const GroupError& g : report.groups) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", g.relative_error);
    out << g.name << '\t' << g.scalars << '\t' << buf << '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", report.max_relative_error);
  const bool ok = report.max_relative_error < f.threshold;
  out << "max_relative_error=" << buf << (ok ? " PASS" : " FAIL") << '\n';
  return ok ? kExitOk : kExitFailure;
}

struct SynthFlags {
  SynthOptions options;
  std::string out_dir;
};

int SynthCommand(const SynthFlags& f, std::ostream& out) {
  const SynthCorpus corpus = MakeSynthCorpus(f.options);
  std::filesystem::create_directories(f.out_dir);
  const std::filesystem::path root(f.out_dir);
  WriteFile((root / "train.pubtator").string(), corpus.train_pubtator);
  WriteFile((root / "dev.pubtator").string(), corpus.dev_pubtator);
  WriteFile((root / "mesh.tsv").string(), corpus.mesh_tsv);
  out << "positive_pairs=" << corpus.positive_pairs
      << " cross_sentence=" << corpus.cross_sentence_pairs << '\n';
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bi-affine relation attention networks for document-level relation extraction",
               "bran"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log informational messages");

  BpeTrainFlags bpe_train;
  auto* bt = app.add_subcommand("bpe-train", "Learn a BPE vocabulary");
  bt->add_option("--input", bpe_train.inputs, "PubTator (or --text) files")->required();
  bt->add_flag("--text", bpe_train.plain_text, "Inputs are plain text, one segment per line");
  bt->add_option("--budget", bpe_train.budget, "Number of merges")->capture_default_str();
  bt->add_option("--out", bpe_train.out, "Vocabulary file to write")->required();

  BpeEncodeFlags bpe_encode;
  auto* be = app.add_subcommand("bpe-encode", "Tokenize text lines (stdin by default)");
  be->add_option("--vocab", bpe_encode.vocab, "Vocabulary file")->required();
  be->add_option("--input", bpe_encode.input, "Text file to encode instead of stdin");
  be->add_flag("--ids", bpe_encode.ids, "Print token ids instead of token strings");

  TrainFlags train;
  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--train", train.train, "Training PubTator file")->required();
  tr->add_option("--dev", train.dev, "Dev PubTator file (default: split off the training file)");
  tr->add_option("--config", train.config, "Run config file (key=value)");
  tr->add_option("--vocab", train.vocab, "Existing vocabulary (default: learn one)");
  tr->add_option("--mesh", train.mesh, "MeSH tree TSV");
  tr->add_flag("--filter-training-hypernyms", train.filter_training_hypernyms,
               "Drop hypernym gold pairs from the training labels");
  tr->add_option("--out", train.out, "Output run directory")->required();
  tr->add_flag("-q,--quiet", train.quiet, "Do not print evaluation lines");
  for (const auto& [key, flag] : ConfigFlags()) {
    tr->add_option(flag, train.overrides[key], "Overrides '" + key + "'");
  }

  PredictFlags predict;
  auto* pr = app.add_subcommand("predict", "Score documents with a trained model");
  pr->add_option("--model", predict.model, "Run directory written by train")->required();
  pr->add_option("--input", predict.input, "PubTator file")->required();
  pr->add_option("--out", predict.out, "Prediction TSV (default: stdout)");
  pr->add_option("--theta", predict.theta, "Decision threshold (default: the tuned one)");
  pr->add_option("--mesh", predict.mesh, "MeSH tree TSV for hypernym filtering");
  pr->add_flag("--all", predict.all, "Write every candidate with its probability");

  EvalFlags eval;
  auto* ev = app.add_subcommand("eval", "Score predictions against gold relations");
  ev->add_option("--gold", eval.gold, "Gold PubTator file")->required();
  ev->add_option("--pred", eval.pred, "Prediction TSV")->required();
  ev->add_option("--mesh", eval.mesh, "MeSH tree TSV for hypernym filtering");
  ev->add_option("--theta", eval.theta, "Keep predictions with probability >= theta")
      ->capture_default_str();
  ev->add_flag("--per-document", eval.per_document, "Print per-document counts");

  EnsembleFlags ensemble;
  auto* en = app.add_subcommand("ensemble", "Average probability files of several runs");
  en->add_option("--pred", ensemble.preds, "Probability TSVs (predict --all)")->required();
  en->add_option("--theta", ensemble.theta, "Decision threshold");
  en->add_option("--gold", ensemble.gold, "Gold PubTator file: tune theta (unless given) and score");
  en->add_option("--out", ensemble.out, "Prediction TSV to write");

  GradCheckFlags grad;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gc->add_option("--dim,--d", grad.options.encoder.dim)->capture_default_str();
  gc->add_option("--heads", grad.options.encoder.heads)->capture_default_str();
  gc->add_option("--blocks", grad.options.encoder.blocks)->capture_default_str();
  gc->add_option("--max-positions", grad.options.encoder.max_positions)->capture_default_str();
  gc->add_option("--tokens", grad.options.tokens)->capture_default_str();
  gc->add_option("--ablation", grad.ablation)->capture_default_str();
  gc->add_flag("--post-ffn-layer-norm", grad.options.encoder.post_ffn_layer_norm);
  gc->add_option("--mention-cells", grad.cells)->capture_default_str();
  gc->add_option("--ner-weight,--lambda", grad.options.ner_weight)->capture_default_str();
  gc->add_option("--step", grad.options.step, "Finite-difference step")->capture_default_str();
  gc->add_option("--threshold", grad.threshold, "Maximum relative error")->capture_default_str();
  gc->add_option("--seed", grad.options.seed)->capture_default_str();

  SynthFlags synth;
  auto* sy = app.add_subcommand("synth-data", "Write the planted-pattern corpus");
  sy->add_option("--out-dir", synth.out_dir, "Directory for train/dev PubTator and mesh.tsv")
      ->required();
  sy->add_option("--train-docs", synth.options.train_docs)->capture_default_str();
  sy->add_option("--dev-docs", synth.options.dev_docs)->capture_default_str();
  sy->add_option("--cross-sentence", synth.options.cross_sentence_share,
                 "Share of positives split over two sentences")
      ->capture_default_str();
  sy->add_option("--seed", synth.options.seed)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitInvalid;
  }
  SetLogLevel(verbose ? LogLevel::kInfo : LogLevel::kWarning);

  try {
    if (bt->parsed()) return BpeTrain(bpe_train, out);
    if (be->parsed()) return BpeEncode(bpe_encode, out);
    if (tr->parsed()) return TrainCommand(train, out, err);
    if (pr->parsed()) return PredictCommand(predict, out);
    if (ev->parsed()) return EvalCommand(eval, out);
    if (en->parsed()) return EnsembleCommand(ensemble, out);
    if (gc->parsed()) return GradCheckCommand(grad, out);
    if (sy->parsed()) return SynthCommand(synth, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalid;
}

}  // namespace bran::cli
