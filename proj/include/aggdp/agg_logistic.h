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

// Aggregated logistic regression: a logistic model over K(x) trained from
// an aggregated report plus unlabeled granular rows.
//
// The log-likelihood gradient sum_x y K(x) - sum_x P(x) K(x) is estimated
// with the report's label vector for the first term and the unlabeled rows
// for the second, scaled either globally by #raw / #unlabeled or per
// coordinate by D_i / G_i, where G = sum over unlabeled rows of K(x).

#ifndef AGGDP_AGG_LOGISTIC_H_
#define AGGDP_AGG_LOGISTIC_H_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aggdp/aggregation.h"
#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/model.h"
#include "aggdp/optimizer.h"

namespace aggdp {

enum class Rescaling { kGlobal, kCoordinate };

struct TrainConfig {
  OptimizerConfig optimizer;
  Rescaling rescaling = Rescaling::kCoordinate;
  // Overrides the report-based estimate of #raw in the global ratio.
  std::optional<double> raw_count;
  LabelKind label = LabelKind::kClick;
  // Echoed into model files; training itself is deterministic full-batch.
  uint64_t seed = 0;
};

struct TrainResult {
  Model model;
  std::vector<TrainLogEntry> log;
};

// ---------------------------------------------------------------------------
// Report totals.

namespace internal {

// Per-feature sums of `column` over the single-feature tables. Hashed
// reports have no identifiable tables: every row contributes NumBlocks
// units to the whole vector, so the total divided by NumBlocks plays the
// same role.
inline std::vector<double> SingleTableSums(const AggregationReport& report,
                                           const std::vector<double>& column,
                                           bool clamp_negative) {
  auto value = [&](size_t k) {
    return clamp_negative ? std::max(column[k], 0.0) : column[k];
  };
  if (report.encoder.kind == EncoderKind::kHashed) {
    std::vector<double> all(report.size());
    for (size_t k = 0; k < report.size(); ++k) all[k] = value(k);
    return {PairwiseSum(all) /
            static_cast<double>(NumBlocks(report.encoder.num_features))};
  }
  const FeatureIndexMap map(report.encoder.cardinalities);
  std::vector<double> sums;
  bool any_single = false;
  for (size_t f = 0; f < map.num_features(); ++f) {
    const uint64_t lo = map.single_offset(f);
    const uint64_t hi = lo + map.cardinalities()[f];
    auto begin = std::lower_bound(report.coords.begin(), report.coords.end(), lo);
    auto end = std::lower_bound(report.coords.begin(), report.coords.end(), hi);
    std::vector<double> vals;
    for (auto it = begin; it != end; ++it) {
      vals.push_back(value(static_cast<size_t>(it - report.coords.begin())));
    }
    any_single = any_single || !vals.empty();
    sums.push_back(PairwiseSum(vals));
  }
  if (!any_single) {
    throw FailedPrecondition("report contains no single-feature tables");
  }
  return sums;
}

inline double Mean(const std::vector<double>& v) {
  return PairwiseSum(v) / static_cast<double>(v.size());
}

}  // namespace internal

// #raw estimate: mean over single-feature tables of their display sums,
// floored at 1.
inline double EstimateRawCount(const AggregationReport& report) {
  if (report.empty()) throw FailedPrecondition("report is empty");
  const AggregationReport std_report = StandardMetrics(report);
  return std::max(
      1.0, internal::Mean(internal::SingleTableSums(
               std_report, std_report.displays, false)));
}

// Estimated number of positive labels, same construction as the raw count.
inline double EstimateLabelTotal(const AggregationReport& report,
                                 LabelKind label) {
  const AggregationReport std_report = StandardMetrics(report);
  return internal::Mean(internal::SingleTableSums(
      std_report, std_report.labels(label), false));
}

// Global positive rate from clamped single-table totals, or nullopt when
// the clamped display total is zero.
inline std::optional<double> EstimateGlobalRate(const AggregationReport& report,
                                                LabelKind label) {
  const AggregationReport std_report = StandardMetrics(report);
  const double d = PairwiseSum(
      internal::SingleTableSums(std_report, std_report.displays, true));
  const double c = PairwiseSum(
      internal::SingleTableSums(std_report, std_report.labels(label), true));
  if (!(d > 0)) return std::nullopt;
  return std::clamp(c / d, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Gradient problems.

// Exact log-likelihood gradient on labeled rows.
inline GradientProblem ExactProblem(const EncodedRows& rows,
                                    const std::vector<double>& labels) {
  GradientProblem p = BuildProblem(rows, {});
  for (size_t c = 0; c < p.dim(); ++c) {
    double t = 0.0;
    for (size_t k = p.col_ptr[c]; k < p.col_ptr[c + 1]; ++k) {
      t += labels[p.col_row[k]] * p.col_val[k];
    }
    p.target[c] = t;
    p.ratio[c] = 1.0;
  }
  p.curvature = ColumnSums(p);
  p.bias_target = PairwiseSum(labels);
  p.bias_ratio = 1.0;
  p.bias_curvature = static_cast<double>(rows.num_rows());
  p.surrogate_ratio = 1.0;
  return p;
}

// Aggregated estimator over unlabeled rows. Coordinates outside the report
// support carry no likelihood term. With per-coordinate rescaling,
// coordinates that no unlabeled row touches (G_i = 0) carry none either,
// and negative noisy displays are clamped to 0 inside the ratio.
inline GradientProblem AggregatedProblem(const AggregationReport& raw_report,
                                         const EncodedRows& unlabeled,
                                         LabelKind label, Rescaling rescaling,
                                         std::optional<double> raw_count) {
  if (unlabeled.num_rows() == 0) {
    throw InvalidArgument("the unlabeled granular set is empty");
  }
  const AggregationReport report = StandardMetrics(raw_report);
  const double n_raw = raw_count ? *raw_count : EstimateRawCount(report);
  const double rho = n_raw / static_cast<double>(unlabeled.num_rows());
  const std::vector<double>& labels = report.labels(label);

  GradientProblem p = BuildProblem(
      unlabeled,
      rescaling == Rescaling::kGlobal ? report.coords : std::vector<uint64_t>{});
  const std::vector<double> g = ColumnSums(p);
  for (size_t c = 0; c < p.dim(); ++c) {
    p.curvature[c] = rho * g[c];
    const size_t k = report.Find(p.coords[c]);
    if (k == std::string::npos) continue;
    if (rescaling == Rescaling::kGlobal) {
      p.target[c] = labels[k];
      p.ratio[c] = rho;
    } else if (g[c] > 0) {
      p.target[c] = labels[k];
      p.ratio[c] = std::max(report.displays[k], 0.0) / g[c];
    }
  }
  p.bias_target = EstimateLabelTotal(report, label);
  p.bias_ratio = rho;
  p.bias_curvature = n_raw;
  p.surrogate_ratio = rho;
  return p;
}

namespace internal {

inline Encoder EncoderFor(const EncoderSpec& spec,
                          const GranularDataset& dataset) {
  return Encoder::FromSpec(spec, dataset.schema_ptr());
}

}  // namespace internal

// Exact gradient of the log-likelihood of `model` on `labeled`.
inline Gradient ExactGradient(const Model& model,
                              const GranularDataset& labeled,
                              LabelKind label) {
  const Encoder enc = internal::EncoderFor(model.encoder, labeled);
  const GradientProblem p =
      ExactProblem(enc.EncodeRows(labeled), labeled.Labels(label));
  return ToGradient(p, Evaluate(p, LocalWeights(p, model), model.bias));
}

// Log-likelihood of `model` on `labeled` (natural log, summed).
inline double LogLikelihood(const Model& model, const GranularDataset& labeled,
                            LabelKind label) {
  const Encoder enc = internal::EncoderFor(model.encoder, labeled);
  const GradientProblem p =
      ExactProblem(enc.EncodeRows(labeled), labeled.Labels(label));
  return Evaluate(p, LocalWeights(p, model), model.bias).surrogate;
}

// Globally rescaled estimate: C - (raw_count / #unlabeled) sum P(x) K(x).
inline Gradient EstimateGradientSimple(const Model& model,
                                       const AggregationReport& report,
                                       const GranularDataset& unlabeled,
                                       double raw_count, LabelKind label) {
  if (!(report.encoder == model.encoder)) {
    throw SchemaError("report and model use different encoders");
  }
  const Encoder enc = internal::EncoderFor(model.encoder, unlabeled);
  const GradientProblem p =
      AggregatedProblem(report, enc.EncodeRows(unlabeled), label,
                        Rescaling::kGlobal, raw_count);
  return ToGradient(p, Evaluate(p, LocalWeights(p, model), model.bias));
}

// Coordinate-wise rescaled estimate: C - (D / G) . sum P(x) K(x).
inline Gradient EstimateGradientRescaled(const Model& model,
                                         const AggregationReport& report,
                                         const GranularDataset& unlabeled,
                                         LabelKind label) {
  if (!(report.encoder == model.encoder)) {
    throw SchemaError("report and model use different encoders");
  }
  const Encoder enc = internal::EncoderFor(model.encoder, unlabeled);
  const GradientProblem p =
      AggregatedProblem(report, enc.EncodeRows(unlabeled), label,
                        Rescaling::kCoordinate, std::nullopt);
  return ToGradient(p, Evaluate(p, LocalWeights(p, model), model.bias));
}

inline std::map<std::string, std::string> ConfigEcho(const TrainConfig& c) {
  return {
      {"optimizer", c.optimizer.kind == OptimizerKind::kAdam
                        ? "adam"
                        : "preconditioned"},
      {"step_size", FormatDouble(c.optimizer.step_size)},
      {"l2", FormatDouble(c.optimizer.l2)},
      {"l1", FormatDouble(c.optimizer.l1)},
      {"iterations", std::to_string(c.optimizer.num_iterations)},
      {"rescaling",
       c.rescaling == Rescaling::kGlobal ? "global" : "coordinate"},
      {"raw_count", c.raw_count ? FormatDouble(*c.raw_count) : "estimated"},
      {"seed", std::to_string(c.seed)},
  };
}

// Trains from theta = 0 with the intercept at the logit of the report's
// global positive rate.
inline TrainResult Train(const AggregationReport& report,
                         const GranularDataset& unlabeled,
                         const TrainConfig& config) {
  if (report.empty()) throw InvalidArgument("the report is empty");
  const Encoder enc = internal::EncoderFor(report.encoder, unlabeled);
  const GradientProblem p =
      AggregatedProblem(report, enc.EncodeRows(unlabeled), config.label,
                        config.rescaling, config.raw_count);
  const double rate =
      std::clamp(EstimateGlobalRate(report, config.label).value_or(0.5), 1e-4,
                 1.0 - 1e-4);
  OptimizeResult res = Optimize(p, config.optimizer,
                                std::vector<double>(p.dim(), 0.0), Logit(rate));
  TrainResult out;
  out.model.method = "agglogistic";
  out.model.label = config.label;
  out.model.encoder = report.encoder;
  out.model.theta = GlobalWeights(p, res.theta);
  out.model.bias = res.bias;
  out.model.config = ConfigEcho(config);
  out.log = std::move(res.log);
  return out;
}

// Unlabeled rows drawn i.i.d. with features independent, each from its
// single-table display marginal (negative noisy counts clamped to 0).
inline GranularDataset GenerateFakeGranular(
    const AggregationReport& raw_report, size_t n, uint64_t seed,
    std::shared_ptr<const Schema> schema = nullptr) {
  if (raw_report.encoder.kind != EncoderKind::kExact) {
    throw FailedPrecondition(
        "fake granular sampling needs single-feature tables (exact encoder)");
  }
  const AggregationReport report = StandardMetrics(raw_report);
  const FeatureIndexMap map(report.encoder.cardinalities);
  if (!schema) {
    schema = std::make_shared<const Schema>(
        Schema::WithCardinalities(map.cardinalities()));
  } else if (schema->cardinalities() != map.cardinalities()) {
    throw SchemaError("schema does not match the report's encoder");
  }
  std::vector<std::vector<double>> cdf(map.num_features());
  for (size_t f = 0; f < map.num_features(); ++f) {
    double total = 0.0;
    for (uint32_t m = 0; m < map.cardinalities()[f]; ++m) {
      const size_t k = report.Find(map.single_offset(f) + m);
      if (k != std::string::npos) total += std::max(report.displays[k], 0.0);
      cdf[f].push_back(total);
    }
    if (!(total > 0)) {
      throw FailedPrecondition("feature " + std::to_string(f) +
                               " has an all-zero display marginal");
    }
  }
  GranularDataset out(schema);
  out.Reserve(n);
  Rng rng(seed);
  std::vector<uint32_t> row(map.num_features());
  for (size_t r = 0; r < n; ++r) {
    for (size_t f = 0; f < map.num_features(); ++f) {
      const double u = rng.Uniform() * cdf[f].back();
      auto it = std::upper_bound(cdf[f].begin(), cdf[f].end(), u);
      if (it == cdf[f].end()) --it;
      row[f] = static_cast<uint32_t>(it - cdf[f].begin());
    }
    out.AddRow(row, 0, 0);
  }
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_AGG_LOGISTIC_H_
