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

// Acceptance runner: one [PASS]/[FAIL] line per criterion on stdout,
// progress on stderr. Exits non-zero when any criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include "bran/checkpoint.h"
#include "bran/corpus.h"
#include "bran/evalkit.h"
#include "bran/gradcheck.h"
#include "bran/logging.h"
#include "bran/model.h"
#include "bran/synth.h"
#include "bran/tokenizer.h"
#include "bran/trainer.h"
#include "bran_cli/cli.h"
#include "suites.h"

namespace bran::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned thresholds.
constexpr double kGradTolerance = 1e-5;
constexpr double kGradSeconds = 60.0;
constexpr int kAlgebraicInstances = 1000;
constexpr int kBpeCorpora = 20;
constexpr int kPooledDocs = 200;
constexpr int kSweepInstances = 1000;
constexpr double kEndToEndF1 = 0.95;
constexpr int kEndToEndSteps = 2000;
constexpr double kEndToEndSeconds = 600.0;
constexpr double kAblationF1 = 0.80;
constexpr int kEnsembleSeeds = 5;

std::string Fmt(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Runner {
 public:
  explicit Runner(fs::path work) : work_(std::move(work)) {}

  void Report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << detail
              << std::endl;
    all_pass_ = all_pass_ && pass;
  }

  // Runs `body`, turning an exception into a failed line.
  void Criterion(int id, const std::string& name,
                 const std::function<std::pair<bool, std::string>()>& body) {
    std::cerr << "== criterion " << id << ": " << name << std::endl;
    try {
      auto [pass, detail] = body();
      Report(id, name, pass, detail);
    } catch (const std::exception& e) {
      Report(id, name, false, std::string("error: ") + e.what());
    }
  }

  bool all_pass() const { return all_pass_; }
  const fs::path& work() const { return work_; }

 private:
  fs::path work_;
  bool all_pass_ = true;
};

// ---------------------------------------------------------------------------
// Planted corpus and training helpers.

struct Planted {
  fs::path dir;
  std::vector<Document> train;
  std::vector<Document> dev;
};

Planted MakePlanted(const fs::path& dir) {
  SynthOptions options;  // 50 train / 15 dev, 30% cross-sentence
  const SynthCorpus corpus = MakeSynthCorpus(options);
  fs::create_directories(dir);
  std::ofstream(dir / "train.pubtator", std::ios::binary) << corpus.train_pubtator;
  std::ofstream(dir / "dev.pubtator", std::ios::binary) << corpus.dev_pubtator;
  std::ofstream(dir / "mesh.tsv", std::ios::binary) << corpus.mesh_tsv;
  return {dir, ParsePubtator(corpus.train_pubtator), ParsePubtator(corpus.dev_pubtator)};
}

struct TrainedRun {
  RunConfig config;
  TrainResult result;
  double seconds = 0.0;
  double dev_f1 = 0.0;  // recomputed from the saved run directory
  int64_t params = 0;
  fs::path dir;
};

// Trains on the planted corpus, saves the run and re-scores dev from disk.
TrainedRun TrainPlanted(const Planted& data, const RunConfig& config, const fs::path& dir) {
  TrainedRun run;
  run.config = config;
  run.dir = dir;
  const auto start = Clock::now();
  std::vector<Document> train = data.train, dev = data.dev;
  std::vector<std::string> texts;
  for (const Document& d : train) texts.push_back(d.text);
  const Vocabulary vocab = TrainBpe(texts, config.bpe_budget);
  for (Document& d : train) TokenizeDocument(vocab, d, config.mention_cells);
  for (Document& d : dev) TokenizeDocument(vocab, d, config.mention_cells);
  run.result = Train(config, vocab, train, dev, &std::cerr);
  run.seconds = Seconds(start);
  SaveRun(dir.string(), config, vocab, run.result);
  run.params = run.result.best_params.NumScalars();

  const LoadedRun loaded = LoadRun(dir.string());
  const auto preds = PredictDocuments(loaded.model, dev);
  run.dev_f1 = Score(Threshold(preds, loaded.theta), GoldKeys(dev)).f1;
  SavePredictions((dir / "dev_probabilities.tsv").string(), preds);
  std::cerr << dir.filename().string() << ": steps=" << run.result.steps
            << " best_step=" << run.result.best_step << " dev_F1=" << run.dev_f1 << " ("
            << Fmt("%.1f", run.seconds) << " s)" << std::endl;
  return run;
}

// Parameter count from the architecture formulas, written out
// independently of the library's own counters.
int64_t AnalyticParamCount(const RunConfig& c, int vocab_size) {
  const int64_t d = c.encoder.dim, inner = 4 * d, l = kNumRelations;
  const int64_t width = c.encoder.ablation == Ablation::kNoWidth5 ? 1 : 5;
  int64_t n = vocab_size * d + c.encoder.max_positions * d + d;  // tokens, positions, fallback
  for (int b = 0; b < c.encoder.blocks; ++b) {
    if (c.encoder.ablation != Ablation::kCnnOnly) n += 3 * (d * d + d) + 2 * d;
    n += (d * inner + inner) + (width * inner * inner + inner) + (inner * d + d);
    if (c.encoder.post_ffn_layer_norm) n += 2 * d;
  }
  n += 2 * (d * d + d + d * d + d);  // head and tail MLPs
  n += l * d * d + l * d;             // bilinear tensor and bias
  if (c.ner_weight > 0.0) n += d * 5 + 5;
  return n;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> GradientSuite() {
  const auto start = Clock::now();
  GradCheckOptions options;  // d=8, h=2, B=1, n=12, two entities x two mentions
  const GradCheckReport report = RunGradCheck(options);
  const double secs = Seconds(start);
  int64_t scalars = 0;
  for (const auto& g : report.groups) scalars += g.scalars;
  const bool pass = report.max_relative_error < kGradTolerance && secs < kGradSeconds;
  return {pass, "max relative error " + Fmt("%.2e", report.max_relative_error) + " over " +
                    std::to_string(report.groups.size()) + " parameters (" +
                    std::to_string(scalars) + " scalars), limit 1e-05; " + Fmt("%.1f", secs) +
                    " s, limit 60 s"};
}

std::pair<bool, std::string> AlgebraicSuite() {
  using namespace bran::testing;
  const std::vector<std::pair<std::string, SuiteResult>> suites = {
      {"softmax sum", SoftmaxNormalizationSuite(kAlgebraicInstances, 101)},
      {"shift", SoftmaxShiftSuite(kAlgebraicInstances, 102)},
      {"layer-norm moments", LayerNormMomentsSuite(kAlgebraicInstances, 103)},
      {"LSE bracket", LseBracketSuite(kAlgebraicInstances, 104)},
      {"clip bound", ClipNormSuite(kAlgebraicInstances, 105)},
  };
  bool pass = true;
  std::string detail;
  for (const auto& [name, r] : suites) {
    pass = pass && r.ok() && r.instances == kAlgebraicInstances;
    if (!detail.empty()) detail += "; ";
    detail += name + " " + std::to_string(r.instances - r.failures) + "/" +
              std::to_string(r.instances);
    if (r.worst > 0.0) detail += " (worst " + Fmt("%.1e", r.worst) + ")";
    if (!r.ok()) detail += " first failure: " + r.first_failure;
  }
  return {pass, detail};
}

std::pair<bool, std::string> OracleSuite() {
  using namespace bran::testing;
  const SuiteResult bpe = BpeOracleSuite(kBpeCorpora, 201);
  const SuiteResult pooled = PooledScoreOracleSuite(kPooledDocs, 202);
  const SuiteResult sweep = SweepOracleSuite(kSweepInstances, 203);
  const bool pass = bpe.ok() && pooled.ok() && sweep.ok() && bpe.instances == kBpeCorpora;
  std::string detail = "BPE merges " + std::to_string(bpe.instances - bpe.failures) + "/" +
                       std::to_string(bpe.instances) + " corpora; pooled scores " +
                       std::to_string(pooled.instances - pooled.failures) + "/" +
                       std::to_string(pooled.instances) + " exact; threshold sweep " +
                       std::to_string(sweep.instances - sweep.failures) + "/" +
                       std::to_string(sweep.instances);
  for (const SuiteResult* r : {&bpe, &pooled, &sweep}) {
    if (!r->ok()) detail += "; first failure: " + r->first_failure;
  }
  return {pass, detail};
}

std::pair<bool, std::string> FormatFidelity(const Planted& data, const TrainedRun& run) {
  std::string detail;
  bool pass = true;
  // PubTator: parse -> serialize -> parse.
  const std::string original = ReadBytes(data.dir / "train.pubtator");
  const auto parsed = ParsePubtator(original);
  const std::string written = ToPubtator(parsed);
  const bool pubtator = parsed == ParsePubtator(written) && written == original;
  detail += std::string("PubTator round trip ") + (pubtator ? "exact" : "differs");
  pass = pass && pubtator;
  // Checkpoint: load -> save gives identical bytes and identical values.
  const fs::path model = run.dir / kModelFile;
  const auto tensors = LoadTensorFile(model.string());
  const fs::path copy = run.dir / "model_copy.bin";
  SaveTensorFile(copy.string(), tensors);
  const bool checkpoint = ReadBytes(model) == ReadBytes(copy) && ReadBytes(model).size() > 0;
  ParamSet reloaded = run.result.best_params;
  AssignParams(tensors, reloaded);
  bool values = true;
  for (size_t i = 0; i < reloaded.size(); ++i) {
    values = values && std::memcmp(reloaded[i].value.data(), run.result.best_params[i].value.data(),
                                   sizeof(double) * static_cast<size_t>(reloaded[i].value.size())) == 0;
  }
  detail += std::string("; checkpoint ") + (checkpoint && values ? "bit-exact" : "differs");
  pass = pass && checkpoint && values;
  // Hypernym fixtures.
  std::istringstream mesh("Dgen\tC04\nDspec\tC04.557\nDsib\tC045\nChem\tD02.1\n");
  const MeshTree tree = ReadMeshTree(mesh);
  const std::vector<PairPrediction> nested = {{"1", "Chem", "Dgen", 0.9},
                                              {"1", "Chem", "Dspec", 0.9}};
  const std::vector<PairPrediction> sibling = {{"1", "Chem", "Dgen", 0.9},
                                               {"1", "Chem", "Dsib", 0.9}};
  const auto a = FilterHypernyms(nested, tree);
  const auto b = FilterHypernyms(sibling, tree);
  const bool hyper = a.size() == 1 && a[0].disease_id == "Dspec" && b == sibling;
  detail += std::string("; hypernym fixtures ") +
            (hyper ? "C04/C04.557 filtered, C04/C045 kept" : "wrong");
  pass = pass && hyper;
  return {pass, detail};
}

int Main(int argc, char** argv) {
  CLI::App app{"Acceptance runner"};
  std::string work_dir = (fs::temp_directory_path() / "bran_acceptance").string();
  app.add_option("--work-dir", work_dir, "Scratch directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  SetLogLevel(LogLevel::kWarning);

  const fs::path work(work_dir);
  fs::remove_all(work);
  fs::create_directories(work);
  Runner runner(work);

  runner.Criterion(1, "Gradient suite", GradientSuite);
  runner.Criterion(2, "Algebraic suite", AlgebraicSuite);
  runner.Criterion(3, "Oracle suite", OracleSuite);

  Planted data;
  TrainedRun main_run;
  bool have_main = false;
  runner.Criterion(4, "End-to-end planted corpus", [&] {
    data = MakePlanted(work / "planted");
    const RunConfig defaults;
    main_run = TrainPlanted(data, defaults, work / "run_default");
    have_main = true;
    const bool pass = main_run.dev_f1 >= kEndToEndF1 &&
                      main_run.result.best_step <= kEndToEndSteps &&
                      main_run.seconds < kEndToEndSeconds;
    return std::pair{pass, "dev F1 " + Fmt("%.4f", main_run.dev_f1) + " (>= 0.95) at step " +
                               std::to_string(main_run.result.best_step) + " of " +
                               std::to_string(main_run.result.steps) + " (<= 2000); " +
                               Fmt("%.1f", main_run.seconds) + " s (< 600 s); " +
                               std::to_string(data.train.size()) + " train / " +
                               std::to_string(data.dev.size()) + " dev docs"};
  });

  runner.Criterion(5, "Ablation contract", [&] {
    if (!have_main) throw std::runtime_error("planted corpus unavailable");
    struct Variant {
      std::string name;
      RunConfig config;
    };
    std::vector<Variant> variants(3);
    variants[0].name = "cnn_only";
    variants[0].config.encoder.ablation = Ablation::kCnnOnly;
    variants[1].name = "no_width5";
    variants[1].config.encoder.ablation = Ablation::kNoWidth5;
    variants[2].name = "lambda=0";
    variants[2].config.ner_weight = 0.0;
    bool pass = true;
    std::string detail;
    std::set<int64_t> counts = {main_run.params};
    const int vocab = main_run.result.spec.vocab_size;
    const bool full_ok = main_run.params == AnalyticParamCount(RunConfig{}, vocab);
    pass = pass && full_ok;
    detail = "full " + std::to_string(main_run.params) + (full_ok ? "" : " (analytic mismatch)");
    for (const Variant& v : variants) {
      const TrainedRun run = TrainPlanted(data, v.config, work / ("run_" + v.name));
      const int64_t analytic = AnalyticParamCount(v.config, run.result.spec.vocab_size);
      const bool ok = run.dev_f1 >= kAblationF1 && run.params == analytic;
      pass = pass && ok;
      counts.insert(run.params);
      detail += "; " + v.name + " F1 " + Fmt("%.4f", run.dev_f1) + " params " +
                std::to_string(run.params) + (run.params == analytic ? " (analytic)" : " != analytic " + std::to_string(analytic));
    }
    const bool distinct = counts.size() == variants.size() + 1;
    pass = pass && distinct;
    detail += distinct ? "; counts distinct" : "; counts NOT distinct";
    return std::pair{pass, detail};
  });

  runner.Criterion(6, "Ensemble", [&] {
    if (!have_main) throw std::runtime_error("planted corpus unavailable");
    std::vector<Document> dev = data.dev;
    const auto gold = GoldKeys(dev);
    std::vector<std::vector<PairPrediction>> members;
    double worst = 1.0;
    std::string member_f1;
    for (int s = 1; s <= kEnsembleSeeds; ++s) {
      fs::path dir;
      if (s == static_cast<int>(main_run.config.seed)) {
        dir = main_run.dir;
      } else {
        RunConfig c;
        c.seed = static_cast<uint64_t>(s);
        dir = TrainPlanted(data, c, work / ("run_seed" + std::to_string(s))).dir;
      }
      // Probability files go through the CLI: predict --all.
      const fs::path probs = work / ("probs_seed" + std::to_string(s) + ".tsv");
      std::ostringstream out, err;
      if (cli::Run({"predict", "--model", dir.string(), "--input",
                    (data.dir / "dev.pubtator").string(), "--all", "--out", probs.string()},
                   out, err) != cli::kExitOk) {
        throw std::runtime_error("predict failed: " + err.str());
      }
      members.push_back(LoadPredictions(probs.string()));
      const double f1 = SweepThreshold(members.back(), gold).f1;
      worst = std::min(worst, f1);
      member_f1 += (member_f1.empty() ? "" : ", ") + Fmt("%.4f", f1);
    }
    const auto mean = Ensemble(members);
    const double ensemble_f1 = SweepThreshold(mean, gold).f1;
    std::vector<PairPrediction> sorted = members.front();
    SortPredictions(sorted);
    const std::vector<std::vector<PairPrediction>> copies(kEnsembleSeeds, members.front());
    const bool noop = Ensemble(copies) == sorted;
    const bool pass = ensemble_f1 >= worst && noop;
    return std::pair{pass, "ensemble dev F1 " + Fmt("%.4f", ensemble_f1) + " >= worst member " +
                               Fmt("%.4f", worst) + " (members " + member_f1 +
                               "); identical files " + (noop ? "unchanged" : "CHANGED")};
  });

  runner.Criterion(7, "Determinism", [&] {
    if (!have_main) throw std::runtime_error("planted corpus unavailable");
    const fs::path cfg = work / "determinism.cfg";
    {
      std::ofstream out(cfg);
      out << "max_steps=60\neval_every=20\n";
    }
    std::vector<std::string> bytes_model, bytes_log;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = work / ("determinism_" + std::to_string(rep));
      std::ostringstream out, err;
      const int code = cli::Run({"train", "--train", (data.dir / "train.pubtator").string(),
                                 "--dev", (data.dir / "dev.pubtator").string(), "--config",
                                 cfg.string(), "--seed", "7", "--out", dir.string(), "-q"},
                                out, err);
      if (code != cli::kExitOk) throw std::runtime_error("train failed: " + err.str());
      bytes_model.push_back(ReadBytes(dir / kModelFile));
      bytes_log.push_back(ReadBytes(dir / kLogFile));
    }
    const bool model_same = bytes_model[0] == bytes_model[1] && !bytes_model[0].empty();
    const bool log_same = bytes_log[0] == bytes_log[1] && !bytes_log[0].empty();
    return std::pair{model_same && log_same,
                     std::string("train --config determinism.cfg --seed 7 twice: checkpoint ") +
                         (model_same ? "identical" : "DIFFERS") + " (" +
                         std::to_string(bytes_model[0].size()) + " bytes), log " +
                         (log_same ? "identical" : "DIFFERS")};
  });

  runner.Criterion(8, "Format fidelity", [&] {
    if (!have_main) throw std::runtime_error("planted corpus unavailable");
    return FormatFidelity(data, main_run);
  });

  std::cout << (runner.all_pass() ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
  return runner.all_pass() ? 0 : 1;
}

}  // namespace
}  // namespace bran::acceptance

int main(int argc, char** argv) { return bran::acceptance::Main(argc, argv); }
