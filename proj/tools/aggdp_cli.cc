//
// Copyright 2026 The AggDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// aggdp: command-line front end.
//
//   aggdp [--threads N] [--config FILE] <command> [flags]
//
// Commands: generate, split, aggregate, train, predict, evaluate, sweep.
// Flags may also come from a flat key=value file whose keys are long flag
// names without the leading dashes (`l2-grid=1,4,16`, underscores accepted);
// flags given on the command line win. Each command that writes an output
// directory echoes its resolved flags to run.conf there.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data or
// contract error, 4 numerical divergence.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "aggdp/agg_logistic.h"
#include "aggdp/aggregation.h"
#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/enrichment.h"
#include "aggdp/evaluation.h"
#include "aggdp/experiments.h"
#include "aggdp/model.h"
#include "aggdp/report_io.h"
#include "aggdp/skyline.h"
#include "aggdp/synthetic.h"

namespace aggdp {
namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

int ExitCodeFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kDivergence:
      return kExitDivergence;
    default:
      return kExitData;
  }
}

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

// Fills options the command line left unset from a key=value file.
void ApplyConfigFile(CLI::App* sub, const std::string& path) {
  for (const auto& [key, value] : ReadKeyValueFile(path)) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = sub->get_option_no_throw("--" + flag);
    if (opt == nullptr) {
      throw InvalidArgument(path + ": unknown key '" + key + "' for command " +
                            sub->get_name());
    }
    if (opt->count() > 0) continue;
    if (opt->get_items_expected_max() > 1) {
      opt->add_result(SplitList(value));
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

// key=value lines for every option of `sub`, sorted by key.
std::string ResolvedConfig(const CLI::App* sub) {
  std::map<std::string, std::string> kv;
  for (const CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string value;
    if (opt->get_expected_max() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      value = Join(opt->results());
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
        value = value.substr(1, value.size() - 2);
      }
    }
    kv[name] = value;
  }
  std::string out = "command=" + sub->get_name() + "\n";
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void PrepareOutDir(const std::string& dir, const CLI::App* sub) {
  fs::create_directories(dir);
  WriteFile((fs::path(dir) / "run.conf").string(), ResolvedConfig(sub));
}

std::string Sibling(const std::string& path, const std::string& name) {
  return (fs::path(path).parent_path() / name).string();
}

ColumnMap Columns(const std::string& path) {
  return path.empty() ? ColumnMap{} : ReadColumnMap(path);
}

std::shared_ptr<const Schema> Vocabulary(const std::string& path) {
  if (path.empty()) return nullptr;
  return ParseVocabulary(ReadFile(path), path);
}

GranularDataset Load(const std::string& path, const ColumnMap& columns,
                     std::shared_ptr<const Schema> vocab,
                     bool require_labels) {
  LoadOptions options;
  options.vocabulary = std::move(vocab);
  options.require_labels = require_labels;
  return LoadGranularCsv(path, columns, options);
}

std::vector<double> ReadPredictions(const std::string& path) {
  const std::string text = ReadFile(path);
  std::vector<double> out;
  size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line =
        std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    if (++line_no == 1 || Trim(line).empty()) continue;
    const auto fields = SplitCsvLine(line);
    size_t index = 0;
    double p = 0;
    if (fields.size() != 2 || !ParseInt(fields[0], &index) ||
        !ParseDouble(fields[1], &p) || index != out.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed prediction row");
    }
    if (!std::isfinite(p)) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": non-finite prediction");
    }
    out.push_back(p);
  }
  return out;
}

std::string FormatPredictions(const std::vector<double>& p) {
  std::string out = "row_index,probability\n";
  for (size_t i = 0; i < p.size(); ++i) {
    out += std::to_string(i) + "," + FormatDouble(p[i]) + "\n";
  }
  return out;
}

OptimizerKind ParseOptimizer(const std::string& s) {
  if (s == "preconditioned") return OptimizerKind::kPreconditioned;
  if (s == "adam") return OptimizerKind::kAdam;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

// ---------------------------------------------------------------------------
// Command flags.

struct SyntheticFlags {
  size_t features = 5;
  std::vector<uint32_t> cardinalities = {8, 10, 12, 6, 15};
  std::vector<double> skew = {1.0};
  double density = 0.3;
  double weight_scale = 1.0;
  double base_rate = 0.1;
  double sale_rate = 0.005;

  void Register(CLI::App* app) {
    app->add_option("--features", features, "Number of features");
    app->add_option("--cardinalities", cardinalities,
                    "Modalities per feature")
        ->delimiter(',');
    app->add_option("--skew", skew, "Zipf exponent, one or per feature")
        ->delimiter(',');
    app->add_option("--density", density, "Fraction of nonzero true weights");
    app->add_option("--weight-scale", weight_scale,
                    "Standard deviation of nonzero true weights");
    app->add_option("--base-rate", base_rate, "Target click rate");
    app->add_option("--sale-rate", sale_rate, "Target sale rate");
  }

  SyntheticSpec Spec() const {
    SyntheticSpec spec;
    spec.num_features = features;
    spec.cardinalities = cardinalities;
    spec.marginal_skew = skew;
    spec.true_weight_density = density;
    spec.weight_scale = weight_scale;
    spec.base_rate = base_rate;
    spec.sale_rate = sale_rate;
    return spec;
  }
};

struct OptimizerFlags {
  std::string kind = "preconditioned";
  double l2 = 1.0;
  double l1 = 0.0;
  double step_size = 1.0;
  int iterations = 200;

  void Register(CLI::App* app) {
    app->add_option("--optimizer", kind, "preconditioned or adam");
    app->add_option("--l2", l2, "L2 penalty");
    app->add_option("--l1", l1, "L1 penalty (adam only)");
    app->add_option("--step-size", step_size, "Step size");
    app->add_option("--iterations", iterations, "Full-batch iterations");
  }

  OptimizerConfig Config() const {
    OptimizerConfig c;
    c.kind = ParseOptimizer(kind);
    c.l2 = l2;
    c.l1 = l1;
    c.step_size = step_size;
    c.num_iterations = iterations;
    return c;
  }
};

struct GenerateFlags {
  SyntheticFlags synth;
  size_t rows = 10000;
  uint64_t seed = 0;
  std::string out;
  std::string truth_out;
};

int RunGenerate(const GenerateFlags& f) {
  SyntheticSpec spec = f.synth.Spec();
  spec.num_rows = f.rows;
  spec.seed = f.seed;
  const SyntheticData data = GenerateSynthetic(spec);
  if (fs::path(f.out).has_parent_path()) {
    fs::create_directories(fs::path(f.out).parent_path());
  }
  WriteFile(f.out, FormatGranularCsv(data.dataset));
  if (!f.truth_out.empty()) WriteFile(f.truth_out, FormatModel(data.truth.click));
  return 0;
}

struct SplitFlags {
  std::string input;
  std::string columns;
  std::vector<double> fractions;
  uint64_t seed = 0;
  std::string out_dir;
};

int RunSplit(const SplitFlags& f, const CLI::App* sub) {
  const GranularDataset data = Load(f.input, Columns(f.columns), nullptr, true);
  const auto parts = Split(data, f.fractions, f.seed);
  PrepareOutDir(f.out_dir, sub);
  for (size_t i = 0; i < parts.size(); ++i) {
    WriteFile((fs::path(f.out_dir) / ("part_" + std::to_string(i) + ".csv"))
                  .string(),
              FormatGranularCsv(parts[i]));
  }
  return 0;
}

struct AggregateFlags {
  std::string input;
  std::string columns;
  std::string out_dir;
  double sigma = 17.0;
  std::optional<double> epsilon;
  std::optional<double> delta;
  double threshold = 10.0;
  bool reparameterize = false;
  uint64_t hashed_p = 0;
  uint64_t hashed_salt = 0;
  uint64_t seed = 0;
};

int RunAggregate(AggregateFlags f, const CLI::App* sub) {
  if (f.epsilon.has_value() != f.delta.has_value()) {
    throw InvalidArgument("--epsilon and --delta go together");
  }
  const GranularDataset data = Load(f.input, Columns(f.columns), nullptr, true);
  Encoder encoder = Encoder::Exact(data.schema());
  if (f.hashed_p > 0) {
    encoder = Encoder::Hashed(data.schema_ptr(), {f.hashed_p, f.hashed_salt});
  }
  if (f.epsilon) {
    const double sensitivity = L2Sensitivity(
        static_cast<int64_t>(NumBlocks(data.num_features())), 3,
        f.reparameterize);
    f.sigma = CalibrateSigma(*f.epsilon, *f.delta, sensitivity);
  }
  AggregationReport report = Aggregate(data, encoder);
  if (f.threshold > 0) report = ThresholdReport(report, f.threshold);
  if (f.reparameterize) report = Reparameterize(report);
  if (f.sigma > 0 && f.hashed_p > 0) report = FillHashedSupport(report);
  report = AddGaussianNoise(report, f.sigma, f.seed);
  PrepareOutDir(f.out_dir, sub);
  const fs::path dir(f.out_dir);
  WriteReport(report, (dir / "report.csv").string(),
              (dir / "report.meta").string());
  WriteFile((dir / "vocab.csv").string(), FormatVocabulary(data.schema()));
  return 0;
}

struct TrainFlags {
  std::string method;
  std::string report;
  std::string report_meta;
  std::string vocab;
  std::string unlabeled;
  std::string labeled;
  std::string validation;
  std::string columns;
  std::string label = "click";
  OptimizerFlags optimizer;
  std::string rescaling = "coordinate";
  std::optional<double> raw_count;
  std::vector<double> prior_weights = {100};
  bool include_counts = false;
  double enrich_l2 = 1.0;
  double learning_rate = 0.05;
  int enrich_iterations = 300;
  std::string export_enriched;
  size_t num_fake = 100000;
  uint64_t hashed_p = 0;
  uint64_t hashed_salt = 0;
  uint64_t seed = 0;
  std::string out_dir;
};

int RunTrain(const TrainFlags& f, const CLI::App* sub) {
  const LabelKind label = ParseLabelKind(f.label);
  const ColumnMap columns = Columns(f.columns);
  const bool needs_report = f.method != "skyline";
  if (f.method != "agglogistic" && f.method != "enrich" &&
      f.method != "skyline" && f.method != "fake") {
    throw InvalidArgument("unknown method '" + f.method + "'");
  }
  if (needs_report && f.report.empty()) {
    throw InvalidArgument("--report is required for method " + f.method);
  }
  std::optional<AggregationReport> report;
  std::string vocab_path = f.vocab;
  if (needs_report) {
    report = ReadReport(f.report, f.report_meta.empty()
                                      ? Sibling(f.report, "report.meta")
                                      : f.report_meta);
    if (vocab_path.empty() && fs::exists(Sibling(f.report, "vocab.csv"))) {
      vocab_path = Sibling(f.report, "vocab.csv");
    }
  }
  auto vocab = Vocabulary(vocab_path);
  const fs::path dir(f.out_dir);
  auto write_logistic = [&](const TrainResult& fit,
                            const std::shared_ptr<const Schema>& schema) {
    PrepareOutDir(f.out_dir, sub);
    WriteFile((dir / "model.bin").string(), FormatModel(fit.model));
    WriteFile((dir / "train.log.csv").string(), FormatTrainLog(fit.log));
    WriteFile((dir / "vocab.csv").string(), FormatVocabulary(*schema));
  };

  TrainConfig cfg;
  cfg.optimizer = f.optimizer.Config();
  cfg.label = label;
  cfg.raw_count = f.raw_count;
  cfg.seed = f.seed;
  if (f.rescaling == "coordinate") {
    cfg.rescaling = Rescaling::kCoordinate;
  } else if (f.rescaling == "global") {
    cfg.rescaling = Rescaling::kGlobal;
  } else {
    throw InvalidArgument("--rescaling must be coordinate or global");
  }

  if (f.method == "agglogistic") {
    if (f.unlabeled.empty()) throw InvalidArgument("--unlabeled is required");
    const GranularDataset u = Load(f.unlabeled, columns, vocab, false);
    write_logistic(Train(*report, u, cfg), u.schema_ptr());
    return 0;
  }
  if (f.method == "fake") {
    std::shared_ptr<const Schema> schema = vocab;
    const GranularDataset u =
        GenerateFakeGranular(*report, f.num_fake, f.seed, schema);
    TrainResult fit = Train(*report, u, cfg);
    fit.model.method = "fake";
    fit.model.config["num_fake"] = std::to_string(f.num_fake);
    write_logistic(fit, u.schema_ptr());
    return 0;
  }
  if (f.labeled.empty()) throw InvalidArgument("--labeled is required");
  const GranularDataset labeled = Load(f.labeled, columns, vocab, true);
  if (f.method == "skyline") {
    SkylineConfig sc;
    sc.optimizer = cfg.optimizer;
    sc.label = label;
    const Encoder encoder =
        f.hashed_p > 0
            ? Encoder::Hashed(labeled.schema_ptr(), {f.hashed_p, f.hashed_salt})
            : Encoder::Exact(labeled.schema());
    write_logistic(TrainSkyline(labeled, encoder, sc), labeled.schema_ptr());
    return 0;
  }

  // Enrichment, one model per prior weight.
  if (f.prior_weights.empty()) throw InvalidArgument("--prior-weight is empty");
  EnrichedTrainConfig ec;
  ec.l2 = f.enrich_l2;
  ec.learning_rate = f.learning_rate;
  ec.num_iterations = f.enrich_iterations;
  ec.seed = f.seed;
  std::optional<GranularDataset> validation;
  if (!f.validation.empty()) {
    validation = Load(f.validation, columns, labeled.schema_ptr(), true);
  }
  if (f.prior_weights.size() > 1 && !validation) {
    throw InvalidArgument("a prior weight grid needs --validation");
  }
  PrepareOutDir(f.out_dir, sub);
  std::string table = "prior_weight,log_loss,nce\n";
  std::optional<std::pair<double, std::string>> best;
  for (double w : f.prior_weights) {
    const CtrTable ctr = ComputeCtrTable(*report, label, w);
    const EnrichedModel model =
        TrainEnrichedFromReport(labeled, ctr, f.include_counts, ec);
    const std::string text = FormatEnrichedModel(model);
    if (f.prior_weights.size() > 1) {
      WriteFile((dir / ("model_w" + FormatDouble(w) + ".bin")).string(), text);
    }
    if (validation) {
      const EvalResult ev = Nce(PredictEnrichedDataset(model, *validation),
                                validation->Labels(label));
      table += FormatDouble(w) + "," + FormatDouble(ev.log_loss) + "," +
               FormatDouble(ev.nce) + "\n";
      if (!best || ev.nce > best->first) best.emplace(ev.nce, text);
    } else {
      best.emplace(0.0, text);
    }
    if (!f.export_enriched.empty() && w == f.prior_weights.front()) {
      WriteFile(f.export_enriched,
                FormatEnrichedCsv(Enrich(labeled, ctr, f.include_counts)));
    }
  }
  WriteFile((dir / "model.bin").string(), best->second);
  WriteFile((dir / "vocab.csv").string(), FormatVocabulary(labeled.schema()));
  if (validation) WriteFile((dir / "validation.csv").string(), table);
  return 0;
}

struct PredictFlags {
  std::string model;
  std::string input;
  std::string columns;
  std::string vocab;
  std::string out;
};

std::vector<double> PredictFile(const std::string& model_path,
                                const std::string& input,
                                const std::string& columns_path,
                                std::string vocab_path) {
  const SectionedFile file = ParseSectionedFile(ReadFile(model_path), model_path);
  if (vocab_path.empty() && fs::exists(Sibling(model_path, "vocab.csv"))) {
    vocab_path = Sibling(model_path, "vocab.csv");
  }
  const GranularDataset data =
      Load(input, Columns(columns_path), Vocabulary(vocab_path), false);
  auto format = file.header.find("format");
  if (format != file.header.end() &&
      format->second == "aggdp-enriched-model-v1") {
    return PredictEnrichedDataset(ParseEnrichedModel(file, model_path), data);
  }
  return PredictDataset(ParseModel(file, model_path), data);
}

int RunPredict(const PredictFlags& f) {
  const auto p = PredictFile(f.model, f.input, f.columns, f.vocab);
  if (fs::path(f.out).has_parent_path()) {
    fs::create_directories(fs::path(f.out).parent_path());
  }
  WriteFile(f.out, FormatPredictions(p));
  return 0;
}

struct EvaluateFlags {
  std::string predictions;
  std::string labels;
  std::string columns;
  std::string label = "click";
  double clip = kDefaultClipEpsilon;
  int bootstrap = 0;
  std::string against;
  std::optional<double> skyline_loss;
  uint64_t seed = 0;
  std::string out;
};

int RunEvaluate(const EvaluateFlags& f) {
  const LabelKind label = ParseLabelKind(f.label);
  const std::vector<double> p = ReadPredictions(f.predictions);
  const GranularDataset data = Load(f.labels, Columns(f.columns), nullptr, true);
  const std::vector<double> y = data.Labels(label);
  const EvalResult ev = Nce(p, y, f.clip);
  std::string out = FormatEvalCsv(ev);
  if (f.skyline_loss) {
    out += "skyline_degradation," +
           FormatDouble(SkylineDegradation(ev.log_loss, *f.skyline_loss)) +
           "\n";
  }
  if (f.bootstrap > 0) {
    if (f.against.empty()) throw InvalidArgument("--bootstrap needs --against");
    const std::vector<double> q = ReadPredictions(f.against);
    const BootstrapResult b = BootstrapCompare(p, q, y, f.bootstrap, f.seed,
                                               f.clip);
    out += "bootstrap_resamples," + std::to_string(f.bootstrap) + "\n";
    out += "bootstrap_mean_delta," + FormatDouble(b.mean_delta) + "\n";
    out += "bootstrap_p_value," + FormatDouble(b.p_value) + "\n";
  }
  if (fs::path(f.out).has_parent_path()) {
    fs::create_directories(fs::path(f.out).parent_path());
  }
  WriteFile(f.out, out);
  return 0;
}

struct SweepFlags {
  std::string kind;
  std::vector<double> grid;
  std::vector<uint64_t> seeds = {0};
  SyntheticFlags synth;
  uint64_t data_seed = 0;
  size_t raw_rows = 200000;
  size_t labeled_rows = 2000;
  size_t fresh_rows = 20000;
  size_t test_rows = 20000;
  std::string label = "click";
  double sigma = 17.0;
  double threshold = 10.0;
  uint64_t hashed_p = 0;
  std::string unlabeled = "test";
  OptimizerFlags optimizer;
  std::vector<double> l2_grid = {1, 4, 16, 64, 256};
  std::vector<double> prior_weights = {1, 10, 100, 1000};
  double enrich_l2 = 1.0;
  int enrich_iterations = 300;
  bool no_counts = false;
  std::string out_dir;
};

int RunSweep(const SweepFlags& f, const CLI::App* sub) {
  ExperimentSetup s;
  s.synthetic = f.synth.Spec();
  s.synthetic.seed = f.data_seed;
  s.raw_rows = f.raw_rows;
  s.labeled_rows = f.labeled_rows;
  s.fresh_rows = f.fresh_rows;
  s.test_rows = f.test_rows;
  s.label = ParseLabelKind(f.label);
  s.sigma = f.sigma;
  s.threshold = f.threshold;
  s.hashed_p = f.hashed_p;
  s.unlabeled = ParseUnlabeledSource(f.unlabeled);
  s.optimizer = f.optimizer.Config();
  s.l2_grid = f.l2_grid;
  s.prior_weights = f.prior_weights;
  s.enrich.l2 = f.enrich_l2;
  s.enrich.num_iterations = f.enrich_iterations;
  s.enrich_counts = !f.no_counts;
  s.seeds = f.seeds;
  ValidateSyntheticSpec(s.synthetic);
  std::vector<SweepRow> rows;
  if (f.kind == "noise") {
    rows = NoiseSweep(s, f.grid);
  } else if (f.kind == "granular-size") {
    rows = GranularSizeSweep(s, f.grid);
  } else if (f.kind == "l2-ablation") {
    rows = L2Ablation(s);
  } else {
    throw InvalidArgument("unknown sweep kind '" + f.kind + "'");
  }
  PrepareOutDir(f.out_dir, sub);
  WriteFile((fs::path(f.out_dir) / "sweep.csv").string(), FormatSweepCsv(rows));
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Learning from aggregated, noised advertising data"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string config;
  app.add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", config, "Flat key=value file of flag defaults");

  GenerateFlags gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic set");
  gen.synth.Register(generate);
  generate->add_option("--rows", gen.rows, "Rows to draw");
  generate->add_option("--seed", gen.seed, "Seed");
  generate->add_option("--out", gen.out, "Output CSV")->required();
  generate->add_option("--truth-out", gen.truth_out,
                       "Write the true click model here");

  SplitFlags spl;
  CLI::App* split = app.add_subcommand("split", "Random row partition");
  split->add_option("--input", spl.input, "Granular CSV")->required();
  split->add_option("--columns", spl.columns, "Column map file");
  split->add_option("--fractions", spl.fractions, "Part proportions")
      ->delimiter(',')
      ->required();
  split->add_option("--seed", spl.seed, "Seed");
  split->add_option("--out-dir", spl.out_dir, "Output directory")->required();

  AggregateFlags agg;
  CLI::App* aggregate =
      app.add_subcommand("aggregate", "Build a thresholded, noised report");
  aggregate->add_option("--input", agg.input, "Granular CSV")->required();
  aggregate->add_option("--columns", agg.columns, "Column map file");
  aggregate->add_option("--out-dir", agg.out_dir, "Output directory")
      ->required();
  aggregate->add_option("--sigma", agg.sigma, "Noise standard deviation");
  aggregate->add_option("--epsilon", agg.epsilon,
                        "Privacy budget; overrides --sigma");
  aggregate->add_option("--delta", agg.delta, "Privacy slack");
  aggregate->add_option("--threshold", agg.threshold,
                        "Drop lines with fewer displays");
  aggregate->add_flag("--reparameterize", agg.reparameterize,
                      "Release (D - C, C - S, S)");
  aggregate->add_option("--hashed-p", agg.hashed_p,
                        "Hashed encoder space size (0: exact)");
  aggregate->add_option("--hashed-salt", agg.hashed_salt, "Hash salt");
  aggregate->add_option("--seed", agg.seed, "Noise seed");

  TrainFlags tr;
  CLI::App* train = app.add_subcommand("train", "Fit a model");
  train->add_option("--method", tr.method, "agglogistic|enrich|skyline|fake")
      ->required();
  train->add_option("--report", tr.report, "Report CSV");
  train->add_option("--report-meta", tr.report_meta,
                    "Report metadata (default: report.meta beside it)");
  train->add_option("--vocab", tr.vocab,
                    "Vocabulary (default: vocab.csv beside the report)");
  train->add_option("--unlabeled", tr.unlabeled, "Unlabeled granular CSV");
  train->add_option("--labeled", tr.labeled, "Labeled granular CSV");
  train->add_option("--validation", tr.validation,
                    "Labeled CSV for choosing the prior weight");
  train->add_option("--columns", tr.columns, "Column map file");
  train->add_option("--label", tr.label, "click or sale");
  tr.optimizer.Register(train);
  train->add_option("--rescaling", tr.rescaling, "coordinate or global");
  train->add_option("--raw-count", tr.raw_count,
                    "Raw set size (default: estimated from the report)");
  train->add_option("--prior-weight", tr.prior_weights,
                    "Beta prior weight(s)")
      ->delimiter(',');
  train->add_flag("--include-counts", tr.include_counts,
                  "Add display counts to enriched columns");
  train->add_option("--enrich-l2", tr.enrich_l2, "Enriched learner L2");
  train->add_option("--learning-rate", tr.learning_rate,
                    "Enriched learner step");
  train->add_option("--enrich-iterations", tr.enrich_iterations,
                    "Enriched learner iterations");
  train->add_option("--export-enriched", tr.export_enriched,
                    "Write the enriched labeled set here");
  train->add_option("--num-fake", tr.num_fake, "Fake granular rows");
  train->add_option("--hashed-p", tr.hashed_p,
                    "Skyline hashed space size (0: exact)");
  train->add_option("--hashed-salt", tr.hashed_salt, "Skyline hash salt");
  train->add_option("--seed", tr.seed, "Seed");
  train->add_option("--out-dir", tr.out_dir, "Output directory")->required();

  PredictFlags pr;
  CLI::App* predict = app.add_subcommand("predict", "Score a granular CSV");
  predict->add_option("--model", pr.model, "Model file")->required();
  predict->add_option("--input", pr.input, "Granular CSV")->required();
  predict->add_option("--columns", pr.columns, "Column map file");
  predict->add_option("--vocab", pr.vocab,
                      "Vocabulary (default: vocab.csv beside the model)");
  predict->add_option("--out", pr.out, "Predictions CSV")->required();

  EvaluateFlags ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions");
  evaluate->add_option("--predictions", ev.predictions, "Predictions CSV")
      ->required();
  evaluate->add_option("--labels", ev.labels, "Granular CSV with labels")
      ->required();
  evaluate->add_option("--columns", ev.columns, "Column map file");
  evaluate->add_option("--label", ev.label, "click or sale");
  evaluate->add_option("--clip", ev.clip, "Probability clipping");
  evaluate->add_option("--bootstrap", ev.bootstrap, "Bootstrap resamples");
  evaluate->add_option("--against", ev.against,
                       "Competing predictions for the bootstrap");
  evaluate->add_option("--skyline-loss", ev.skyline_loss,
                       "Skyline log-loss for the degradation row");
  evaluate->add_option("--seed", ev.seed, "Bootstrap seed");
  evaluate->add_option("--out", ev.out, "Output CSV")->required();

  SweepFlags sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Synthetic experiment sweep");
  sweep->add_option("--kind", sw.kind, "noise|granular-size|l2-ablation")
      ->required();
  sweep->add_option("--grid", sw.grid, "Sigma or size grid")->delimiter(',');
  sweep->add_option("--seeds", sw.seeds, "Seeds")->delimiter(',');
  sw.synth.Register(sweep);
  sweep->add_option("--data-seed", sw.data_seed, "Base synthetic seed");
  sweep->add_option("--raw-rows", sw.raw_rows, "Aggregated rows");
  sweep->add_option("--labeled-rows", sw.labeled_rows, "Labeled rows");
  sweep->add_option("--fresh-rows", sw.fresh_rows, "Fresh unlabeled rows");
  sweep->add_option("--test-rows", sw.test_rows, "Test rows");
  sweep->add_option("--label", sw.label, "click or sale");
  sweep->add_option("--sigma", sw.sigma, "Noise for size and L2 sweeps");
  sweep->add_option("--threshold", sw.threshold, "Display threshold");
  sweep->add_option("--hashed-p", sw.hashed_p, "Hashed space size (0: exact)");
  sweep->add_option("--unlabeled", sw.unlabeled,
                    "AggLogistic rows in the noise sweep: test or fresh");
  sw.optimizer.Register(sweep);
  sweep->add_option("--l2-grid", sw.l2_grid, "AggLogistic L2 grid")
      ->delimiter(',');
  sweep->add_option("--prior-weights", sw.prior_weights, "Enrich prior grid")
      ->delimiter(',');
  sweep->add_option("--enrich-l2", sw.enrich_l2, "Enriched learner L2");
  sweep->add_option("--enrich-iterations", sw.enrich_iterations,
                    "Enriched learner iterations");
  sweep->add_flag("--no-counts", sw.no_counts,
                  "Leave display counts out of enriched columns");
  sweep->add_option("--out-dir", sw.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) ApplyConfigFile(sub, config);
    SetWorkerCount(threads);
    if (sub == generate) return RunGenerate(gen);
    if (sub == split) return RunSplit(spl, sub);
    if (sub == aggregate) return RunAggregate(agg, sub);
    if (sub == train) return RunTrain(tr, sub);
    if (sub == predict) return RunPredict(pr);
    if (sub == evaluate) return RunEvaluate(ev);
    return RunSweep(sw, sub);
  } catch (const Error& e) {
    std::cerr << "aggdp: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const CLI::Error& e) {
    std::cerr << "aggdp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "aggdp: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace
}  // namespace aggdp

int main(int argc, char** argv) { return aggdp::Main(argc, argv); }
