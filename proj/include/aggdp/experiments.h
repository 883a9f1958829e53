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

// Experiment sweeps on synthetic data. Each grid point draws a fresh
// synthetic population per seed, splits it into raw (aggregated), labeled,
// fresh unlabeled and test parts, and scores every method on the test part.
//
// Sweep CSV header: sweep_param,value,method,seed,l2,log_loss,nce,error
// A failed fit becomes a row with empty metrics and the message in `error`.

#ifndef AGGDP_EXPERIMENTS_H_
#define AGGDP_EXPERIMENTS_H_

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "aggdp/agg_logistic.h"
#include "aggdp/aggregation.h"
#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/enrichment.h"
#include "aggdp/evaluation.h"
#include "aggdp/model.h"
#include "aggdp/skyline.h"
#include "aggdp/synthetic.h"

namespace aggdp {

enum class UnlabeledSource { kTest, kFresh };

inline UnlabeledSource ParseUnlabeledSource(std::string_view s) {
  if (s == "test") return UnlabeledSource::kTest;
  if (s == "fresh") return UnlabeledSource::kFresh;
  throw InvalidArgument("unlabeled source must be test or fresh, got '" +
                        std::string(s) + "'");
}

struct ExperimentSetup {
  SyntheticSpec synthetic;  // num_rows is derived from the part sizes
  size_t raw_rows = 200000;
  size_t labeled_rows = 2000;
  size_t fresh_rows = 20000;
  size_t test_rows = 20000;
  LabelKind label = LabelKind::kClick;
  double sigma = 17.0;
  double threshold = 10.0;
  // 0 keeps the exact encoder.
  uint64_t hashed_p = 0;
  UnlabeledSource unlabeled = UnlabeledSource::kTest;
  OptimizerConfig optimizer;
  std::vector<double> l2_grid = {1, 4, 16, 64, 256};
  std::vector<double> prior_weights = {1, 10, 100, 1000};
  EnrichedTrainConfig enrich;
  bool enrich_counts = true;
  std::vector<uint64_t> seeds = {0};
};

struct ExperimentData {
  GranularDataset raw;
  GranularDataset labeled;
  GranularDataset fresh;
  GranularDataset test;
  TrueModel truth;
};

struct SweepRow {
  std::string sweep_param;
  std::string value;
  std::string method;
  uint64_t seed = 0;
  std::optional<double> l2;
  double log_loss = std::numeric_limits<double>::quiet_NaN();
  double nce = std::numeric_limits<double>::quiet_NaN();
  std::string error;

  bool ok() const { return error.empty(); }
};

namespace internal {

inline GranularDataset Slice(const GranularDataset& d, size_t begin,
                             size_t end) {
  std::vector<size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return d.Subset(idx);
}

inline std::string CsvNumber(double v) {
  return std::isfinite(v) ? FormatDouble(v) : std::string();
}

}  // namespace internal

// Rows are i.i.d., so contiguous slices are independent random parts.
inline ExperimentData PrepareExperiment(const ExperimentSetup& setup,
                                        uint64_t seed) {
  SyntheticSpec spec = setup.synthetic;
  spec.seed = SplitMix64(setup.synthetic.seed ^ SplitMix64(seed));
  spec.num_rows = setup.raw_rows + setup.labeled_rows + setup.fresh_rows +
                  setup.test_rows;
  SyntheticData synth = GenerateSynthetic(spec);
  ExperimentData out;
  size_t at = 0;
  auto take = [&](size_t n) {
    GranularDataset part = internal::Slice(synth.dataset, at, at + n);
    at += n;
    return part;
  };
  out.raw = take(setup.raw_rows);
  out.labeled = take(setup.labeled_rows);
  out.fresh = take(setup.fresh_rows);
  out.test = take(setup.test_rows);
  out.truth = std::move(synth.truth);
  return out;
}

inline Encoder ExperimentEncoder(const ExperimentSetup& setup,
                                 const GranularDataset& data) {
  if (setup.hashed_p == 0) return Encoder::Exact(data.schema());
  HashedEncoderConfig cfg;
  cfg.p = setup.hashed_p;
  return Encoder::Hashed(data.schema_ptr(), cfg);
}

// Threshold, then (for hashed reports) densify, then noise.
inline AggregationReport PrivatizeReport(const AggregationReport& exact,
                                         double sigma, double threshold,
                                         uint64_t noise_seed) {
  AggregationReport report =
      threshold > 0 ? ThresholdReport(exact, threshold) : exact;
  if (sigma > 0) {
    if (report.encoder.kind == EncoderKind::kHashed) {
      report = FillHashedSupport(report);
    }
    report = AddGaussianNoise(report, sigma, noise_seed);
  }
  return report;
}

inline AggregationReport ExperimentReport(const ExperimentSetup& setup,
                                          const ExperimentData& data,
                                          double sigma, uint64_t seed) {
  const Encoder enc = ExperimentEncoder(setup, data.raw);
  return PrivatizeReport(Aggregate(data.raw, enc), sigma, setup.threshold,
                         SplitMix64(seed ^ 0x4015Eu));
}

inline EvalResult Score(const std::vector<double>& predictions,
                        const GranularDataset& test, LabelKind label) {
  return Nce(predictions, test.Labels(label));
}

// Fits AggLogistic at every L2 grid point and appends one row per point
// plus a `<method>-best` row (best test NCE).
inline void RunAggLogisticGrid(const ExperimentSetup& setup,
                               const AggregationReport& report,
                               const GranularDataset& unlabeled,
                               const GranularDataset& test,
                               Rescaling rescaling, const SweepRow& prototype,
                               std::vector<SweepRow>* rows) {
  std::optional<SweepRow> best;
  for (double l2 : setup.l2_grid) {
    SweepRow row = prototype;
    row.l2 = l2;
    try {
      TrainConfig cfg;
      cfg.optimizer = setup.optimizer;
      cfg.optimizer.l2 = l2;
      cfg.rescaling = rescaling;
      cfg.label = setup.label;
      const TrainResult fit = Train(report, unlabeled, cfg);
      const EvalResult ev =
          Score(PredictDataset(fit.model, test), test, setup.label);
      row.log_loss = ev.log_loss;
      row.nce = ev.nce;
      if (!best || row.nce > best->nce) best = row;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows->push_back(row);
  }
  SweepRow summary = best ? *best : prototype;
  summary.method = prototype.method + "-best";
  if (!best) summary.error = "no grid point succeeded";
  rows->push_back(summary);
}

// Fits the enrichment learner for every prior weight.
inline void RunEnrichGrid(const ExperimentSetup& setup,
                          const AggregationReport& report,
                          const GranularDataset& labeled,
                          const GranularDataset& test,
                          const SweepRow& prototype,
                          std::vector<SweepRow>* rows) {
  std::optional<SweepRow> best;
  for (double w : setup.prior_weights) {
    SweepRow row = prototype;
    row.method = prototype.method + "[w=" + FormatDouble(w) + "]";
    row.l2 = setup.enrich.l2;
    try {
      const CtrTable table = ComputeCtrTable(report, setup.label, w);
      const EnrichedModel model = TrainEnrichedFromReport(
          labeled, table, setup.enrich_counts, setup.enrich);
      const EvalResult ev =
          Score(PredictEnrichedDataset(model, test), test, setup.label);
      row.log_loss = ev.log_loss;
      row.nce = ev.nce;
      if (!best || row.nce > best->nce) best = row;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows->push_back(row);
  }
  SweepRow summary = best ? *best : prototype;
  summary.method = prototype.method + "-best";
  if (!best) summary.error = "no grid point succeeded";
  rows->push_back(summary);
}

namespace internal {

inline void CheckGrid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw InvalidArgument(std::string(name) + " is empty");
}

// Runs `point(i, seed, rows)` over the grid x seeds in parallel and
// concatenates the results in grid order.
template <typename Fn>
std::vector<SweepRow> RunGrid(size_t grid_size,
                              const std::vector<uint64_t>& seeds, Fn&& point) {
  if (seeds.empty()) throw InvalidArgument("no seeds given");
  const size_t tasks = grid_size * seeds.size();
  std::vector<std::vector<SweepRow>> parts(tasks);
  ParallelTasks(tasks, [&](size_t t) {
    point(t / seeds.size(), seeds[t % seeds.size()], &parts[t]);
  });
  std::vector<SweepRow> out;
  for (auto& part : parts) {
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline void FailAll(const SweepRow& prototype, const std::string& what,
                    std::vector<SweepRow>* rows) {
  SweepRow row = prototype;
  row.error = what;
  rows->push_back(row);
}

}  // namespace internal

// Noise level sweep: AggLogistic (unlabeled rows from the configured
// source) against Enrich (labeled rows), one report per sigma.
inline std::vector<SweepRow> NoiseSweep(const ExperimentSetup& setup,
                                        const std::vector<double>& sigmas) {
  internal::CheckGrid(sigmas, "sigma grid");
  return internal::RunGrid(
      sigmas.size(), setup.seeds,
      [&](size_t i, uint64_t seed, std::vector<SweepRow>* rows) {
        SweepRow proto;
        proto.sweep_param = "sigma";
        proto.value = FormatDouble(sigmas[i]);
        proto.seed = seed;
        try {
          const ExperimentData data = PrepareExperiment(setup, seed);
          const AggregationReport report =
              ExperimentReport(setup, data, sigmas[i], seed);
          const GranularDataset& unlabeled =
              setup.unlabeled == UnlabeledSource::kTest ? data.test
                                                        : data.fresh;
          proto.method = "agglogistic";
          RunAggLogisticGrid(setup, report, unlabeled, data.test,
                             Rescaling::kCoordinate, proto, rows);
          proto.method = "enrich";
          RunEnrichGrid(setup, report, data.labeled, data.test, proto, rows);
        } catch (const Error& e) {
          proto.method = "setup";
          internal::FailAll(proto, e.what(), rows);
        }
      });
}

// Granular size sweep: the first n labeled rows feed Enrich and the first
// n fresh unlabeled rows feed AggLogistic. Pools must hold max(sizes).
inline std::vector<SweepRow> GranularSizeSweep(
    const ExperimentSetup& setup, const std::vector<double>& sizes) {
  internal::CheckGrid(sizes, "size grid");
  ExperimentSetup pooled = setup;
  for (double s : sizes) {
    if (!(s >= 1) || s != std::floor(s)) {
      throw InvalidArgument("granular sizes must be positive integers");
    }
    pooled.labeled_rows = std::max(pooled.labeled_rows, size_t(s));
    pooled.fresh_rows = std::max(pooled.fresh_rows, size_t(s));
  }
  return internal::RunGrid(
      sizes.size(), setup.seeds,
      [&](size_t i, uint64_t seed, std::vector<SweepRow>* rows) {
        const size_t n = static_cast<size_t>(sizes[i]);
        SweepRow proto;
        proto.sweep_param = "granular_size";
        proto.value = std::to_string(n);
        proto.seed = seed;
        try {
          const ExperimentData data = PrepareExperiment(pooled, seed);
          const AggregationReport report =
              ExperimentReport(pooled, data, pooled.sigma, seed);
          proto.method = "agglogistic";
          RunAggLogisticGrid(pooled, report, data.fresh.Head(n), data.test,
                             Rescaling::kCoordinate, proto, rows);
          proto.method = "enrich";
          RunEnrichGrid(pooled, report, data.labeled.Head(n), data.test, proto,
                        rows);
        } catch (const Error& e) {
          proto.method = "setup";
          internal::FailAll(proto, e.what(), rows);
        }
      });
}

// Regularization ablation: global vs coordinate-wise rescaling on fresh
// unlabeled rows, and coordinate-wise rescaling on the test rows.
inline std::vector<SweepRow> L2Ablation(const ExperimentSetup& setup) {
  internal::CheckGrid(setup.l2_grid, "l2 grid");
  struct Variant {
    const char* method;
    Rescaling rescaling;
    bool on_test;
  };
  static constexpr Variant kVariants[] = {
      {"agglogistic-simple", Rescaling::kGlobal, false},
      {"agglogistic-rescaled", Rescaling::kCoordinate, false},
      {"agglogistic-test", Rescaling::kCoordinate, true},
  };
  return internal::RunGrid(
      1, setup.seeds,
      [&](size_t, uint64_t seed, std::vector<SweepRow>* rows) {
        SweepRow proto;
        proto.sweep_param = "l2";
        proto.seed = seed;
        try {
          const ExperimentData data = PrepareExperiment(setup, seed);
          const AggregationReport report =
              ExperimentReport(setup, data, setup.sigma, seed);
          for (const Variant& v : kVariants) {
            proto.method = v.method;
            std::vector<SweepRow> grid;
            RunAggLogisticGrid(setup, report, v.on_test ? data.test : data.fresh,
                               data.test, v.rescaling, proto, &grid);
            grid.pop_back();  // the grid itself is the ablation
            for (SweepRow& row : grid) {
              row.value = FormatDouble(*row.l2);
              rows->push_back(row);
            }
          }
        } catch (const Error& e) {
          proto.method = "setup";
          internal::FailAll(proto, e.what(), rows);
        }
      });
}

inline std::string FormatSweepCsv(const std::vector<SweepRow>& rows) {
  std::string out = "sweep_param,value,method,seed,l2,log_loss,nce,error\n";
  for (const SweepRow& r : rows) {
    out += CsvEscape(r.sweep_param) + "," + CsvEscape(r.value) + "," +
           CsvEscape(r.method) + "," + std::to_string(r.seed) + "," +
           (r.l2 ? FormatDouble(*r.l2) : std::string()) + "," +
           internal::CsvNumber(r.log_loss) + "," + internal::CsvNumber(r.nce) +
           "," + CsvEscape(r.error) + "\n";
  }
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_EXPERIMENTS_H_
