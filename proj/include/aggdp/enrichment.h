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

// Enrichment: target encoding of a small labeled granular set with
// smoothed rates read from an aggregated report, plus a built-in logistic
// learner over the enriched columns.
//
// Smoothed rate of a report line with (noisy) label count C and display
// count D, prior weight w and global rate p0:
//
//   rate = (max(C, 0) + w * p0) / (max(D, 0) + w), clamped to [0, 1],
//
// i.e. the posterior mean under a Beta(w p0, w (1 - p0)) prior. A zero
// denominator, or a line absent from the report, yields p0.
//
// Enriched CSV export:
//   feat_0..feat_{F-1}, ctr_f0..ctr_f{F-1}, ctr_p_0_1..ctr_p_{F-2}_{F-1},
//   [cnt_f0.., cnt_p_0_1..], label
// Modality indices in feat_* (empty when out of vocabulary), raw display
// counts in cnt_*.

#ifndef AGGDP_ENRICHMENT_H_
#define AGGDP_ENRICHMENT_H_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aggdp/agg_logistic.h"
#include "aggdp/aggregation.h"
#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/report_io.h"

namespace aggdp {

struct CtrTable {
  EncoderSpec encoder;
  LabelKind label = LabelKind::kClick;
  double prior_weight = 0.0;
  double global_rate = 0.0;
  std::vector<uint64_t> coords;
  std::vector<double> rate;
  std::vector<double> displays;

  size_t Find(uint64_t coord) const {
    auto it = std::lower_bound(coords.begin(), coords.end(), coord);
    if (it == coords.end() || *it != coord) return std::string::npos;
    return static_cast<size_t>(it - coords.begin());
  }
  double Rate(uint64_t coord) const {
    const size_t k = coord == kAbsentCoordinate ? std::string::npos : Find(coord);
    return k == std::string::npos ? global_rate : rate[k];
  }
  double Displays(uint64_t coord) const {
    const size_t k = coord == kAbsentCoordinate ? std::string::npos : Find(coord);
    return k == std::string::npos ? 0.0 : displays[k];
  }
};

inline double SmoothedRate(double label_count, double display_count,
                           double prior_weight, double global_rate) {
  const double num = std::max(label_count, 0.0) + prior_weight * global_rate;
  const double den = std::max(display_count, 0.0) + prior_weight;
  if (!(den > 0)) return global_rate;
  return std::clamp(num / den, 0.0, 1.0);
}

inline CtrTable ComputeCtrTable(const AggregationReport& raw_report,
                                LabelKind label, double prior_weight,
                                std::optional<double> global_rate =
                                    std::nullopt) {
  if (!(prior_weight >= 0)) {
    throw InvalidArgument("prior weight must be non-negative");
  }
  const AggregationReport report = StandardMetrics(raw_report);
  CtrTable table;
  table.encoder = report.encoder;
  table.label = label;
  table.prior_weight = prior_weight;
  table.global_rate =
      global_rate ? *global_rate
                  : (report.empty()
                         ? 0.0
                         : EstimateGlobalRate(report, label).value_or(0.0));
  const std::vector<double>& labels = report.labels(label);
  table.coords = report.coords;
  table.displays = report.displays;
  table.rate.resize(report.size());
  for (size_t k = 0; k < report.size(); ++k) {
    table.rate[k] = SmoothedRate(labels[k], report.displays[k], prior_weight,
                                 table.global_rate);
  }
  return table;
}

// Enriched rows: original modalities, numeric columns and labels, all
// row-major.
struct EnrichedDataset {
  size_t num_features = 0;
  bool include_counts = false;
  std::vector<std::string> numeric_names;
  std::vector<uint32_t> modalities;
  std::vector<double> numeric;
  std::vector<double> labels;

  size_t num_rows() const { return labels.size(); }
  size_t num_numeric() const { return numeric_names.size(); }
  std::span<const double> row(size_t r) const {
    return {numeric.data() + r * num_numeric(), num_numeric()};
  }
  std::span<const uint32_t> row_modalities(size_t r) const {
    return {modalities.data() + r * num_features, num_features};
  }
};

inline std::vector<std::string> EnrichedColumnNames(size_t num_features,
                                                    bool include_counts) {
  std::vector<std::string> names;
  for (const char* prefix : {"ctr", "cnt"}) {
    if (std::string(prefix) == "cnt" && !include_counts) break;
    for (size_t i = 0; i < num_features; ++i) {
      names.push_back(std::string(prefix) + "_f" + std::to_string(i));
    }
    for (size_t i = 0; i < num_features; ++i) {
      for (size_t j = i + 1; j < num_features; ++j) {
        names.push_back(std::string(prefix) + "_p_" + std::to_string(i) + "_" +
                        std::to_string(j));
      }
    }
  }
  return names;
}

inline EnrichedDataset Enrich(const GranularDataset& dataset,
                              const CtrTable& table, bool include_counts) {
  const Encoder encoder = Encoder::FromSpec(table.encoder, dataset.schema_ptr());
  EnrichedDataset out;
  out.num_features = dataset.num_features();
  out.include_counts = include_counts;
  out.numeric_names = EnrichedColumnNames(out.num_features, include_counts);
  const size_t nb = encoder.num_blocks();
  const size_t width = out.num_numeric();
  const size_t n = dataset.num_rows();
  out.numeric.resize(n * width);
  out.labels = dataset.Labels(table.label);
  out.modalities.reserve(n * out.num_features);
  for (size_t r = 0; r < n; ++r) {
    auto f = dataset.features(r);
    out.modalities.insert(out.modalities.end(), f.begin(), f.end());
  }
  ParallelFor(n, [&](size_t begin, size_t end) {
    std::vector<uint64_t> blocks(nb);
    for (size_t r = begin; r < end; ++r) {
      encoder.BlockCoordinates(dataset.features(r), blocks);
      double* dst = out.numeric.data() + r * width;
      for (size_t b = 0; b < nb; ++b) {
        dst[b] = table.Rate(blocks[b]);
        if (include_counts) dst[nb + b] = table.Displays(blocks[b]);
      }
    }
  });
  return out;
}

inline std::string FormatEnrichedCsv(const EnrichedDataset& data) {
  std::string out;
  for (size_t i = 0; i < data.num_features; ++i) {
    out += "feat_" + std::to_string(i) + ",";
  }
  for (const auto& name : data.numeric_names) out += name + ",";
  out += "label\n";
  for (size_t r = 0; r < data.num_rows(); ++r) {
    for (uint32_t m : data.row_modalities(r)) {
      if (m != kOutOfVocabulary) out += std::to_string(m);
      out += ',';
    }
    for (double v : data.row(r)) {
      out += FormatDouble(v);
      out += ',';
    }
    out += data.labels[r] > 0.5 ? "1\n" : "0\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in learner.

struct EnrichedTrainConfig {
  double l2 = 1.0;
  double learning_rate = 0.05;
  int num_iterations = 300;
  uint64_t seed = 0;
};

// Logistic regression on standardized numeric columns (counts go through
// log1p first) plus one-hot singles of the original modalities.
struct EnrichedModel {
  LabelKind label = LabelKind::kClick;
  bool include_counts = false;
  std::vector<uint32_t> cardinalities;
  std::vector<double> mean;
  std::vector<double> scale;  // 0 for constant columns
  std::vector<double> weight;
  std::vector<double> onehot;  // indexed by exact single coordinate
  double bias = 0.0;
  CtrTable ctr;
  EnrichedTrainConfig config;
};

namespace internal {

inline double NumericInput(const EnrichedDataset& data, size_t r, size_t c,
                           size_t num_blocks) {
  const double v = data.numeric[r * data.num_numeric() + c];
  return c >= num_blocks ? std::log1p(std::max(v, 0.0)) : v;
}

inline std::vector<uint64_t> OnehotOffsets(const std::vector<uint32_t>& d) {
  std::vector<uint64_t> off(d.size() + 1, 0);
  for (size_t i = 0; i < d.size(); ++i) off[i + 1] = off[i] + d[i];
  return off;
}

}  // namespace internal

inline double EnrichedMargin(const EnrichedModel& model,
                             const EnrichedDataset& data, size_t r) {
  const size_t nb = NumBlocks(data.num_features);
  const auto off = internal::OnehotOffsets(model.cardinalities);
  double m = model.bias;
  for (size_t c = 0; c < model.weight.size(); ++c) {
    if (model.scale[c] == 0.0) continue;
    m += model.weight[c] *
         (internal::NumericInput(data, r, c, nb) - model.mean[c]) /
         model.scale[c];
  }
  auto mods = data.row_modalities(r);
  for (size_t f = 0; f < mods.size(); ++f) {
    if (mods[f] != kOutOfVocabulary && mods[f] < model.cardinalities[f]) {
      m += model.onehot[off[f] + mods[f]];
    }
  }
  return m;
}

inline EnrichedModel TrainEnriched(const EnrichedDataset& data,
                                   const std::vector<uint32_t>& cardinalities,
                                   const CtrTable& table,
                                   const EnrichedTrainConfig& config) {
  const size_t n = data.num_rows();
  if (n == 0) throw InvalidArgument("the enriched training set is empty");
  const double positives = PairwiseSum(data.labels);
  if (positives == 0 || positives == static_cast<double>(n)) {
    throw InvalidArgument("labels are single-class; the fit is degenerate");
  }
  if (config.num_iterations < 1 || !(config.learning_rate > 0) ||
      !(config.l2 >= 0)) {
    throw InvalidArgument("bad enriched learner configuration");
  }
  const size_t nb = NumBlocks(data.num_features);
  const size_t width = data.num_numeric();
  EnrichedModel model;
  model.label = table.label;
  model.include_counts = data.include_counts;
  model.cardinalities = cardinalities;
  model.ctr = table;
  model.config = config;
  model.mean.assign(width, 0.0);
  model.scale.assign(width, 0.0);
  model.weight.assign(width, 0.0);
  const auto off = internal::OnehotOffsets(cardinalities);
  model.onehot.assign(off.back(), 0.0);
  model.bias = Logit(positives / static_cast<double>(n));

  // Standardized design matrix.
  std::vector<double> z(n * width);
  for (size_t c = 0; c < width; ++c) {
    std::vector<double> col(n);
    for (size_t r = 0; r < n; ++r) col[r] = internal::NumericInput(data, r, c, nb);
    const double mean = PairwiseSum(col) / n;
    for (double& v : col) v = (v - mean) * (v - mean);
    const double sd = std::sqrt(PairwiseSum(col) / n);
    model.mean[c] = mean;
    model.scale[c] = sd > 1e-12 ? sd : 0.0;
    for (size_t r = 0; r < n; ++r) {
      z[r * width + c] =
          model.scale[c] == 0.0
              ? 0.0
              : (internal::NumericInput(data, r, c, nb) - mean) / model.scale[c];
    }
  }

  // Full-batch Adam on the mean penalized log-likelihood.
  const size_t dim = width + model.onehot.size() + 1;
  std::vector<double> m1(dim, 0.0), m2(dim, 0.0), grad(dim);
  std::vector<double> resid(n);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < config.num_iterations; ++it) {
    for (size_t r = 0; r < n; ++r) {
      double m = model.bias;
      for (size_t c = 0; c < width; ++c) m += model.weight[c] * z[r * width + c];
      auto mods = data.row_modalities(r);
      for (size_t f = 0; f < mods.size(); ++f) {
        if (mods[f] != kOutOfVocabulary) m += model.onehot[off[f] + mods[f]];
      }
      resid[r] = data.labels[r] - Sigmoid(m);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t r = 0; r < n; ++r) {
      for (size_t c = 0; c < width; ++c) grad[c] += resid[r] * z[r * width + c];
      auto mods = data.row_modalities(r);
      for (size_t f = 0; f < mods.size(); ++f) {
        if (mods[f] != kOutOfVocabulary) {
          grad[width + off[f] + mods[f]] += resid[r];
        }
      }
      grad[dim - 1] += resid[r];
    }
    auto param = [&](size_t k) -> double& {
      if (k < width) return model.weight[k];
      if (k + 1 < dim) return model.onehot[k - width];
      return model.bias;
    };
    const double t = it + 1;
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (size_t k = 0; k < dim; ++k) {
      double& w = param(k);
      const double penalty = k + 1 < dim ? config.l2 * w : 0.0;
      const double g = (grad[k] - penalty) * inv_n;
      m1[k] = kBeta1 * m1[k] + (1 - kBeta1) * g;
      m2[k] = kBeta2 * m2[k] + (1 - kBeta2) * g * g;
      w += config.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + kEps);
    }
  }
  return model;
}

inline double PredictEnriched(const EnrichedModel& model,
                              const EnrichedDataset& data, size_t r) {
  return Sigmoid(EnrichedMargin(model, data, r));
}

inline std::vector<double> PredictEnrichedDataset(
    const EnrichedModel& model, const GranularDataset& dataset) {
  if (dataset.schema().cardinalities() != model.cardinalities) {
    throw SchemaError("dataset schema does not match the enriched model");
  }
  const EnrichedDataset data = Enrich(dataset, model.ctr, model.include_counts);
  std::vector<double> out(data.num_rows());
  for (size_t r = 0; r < out.size(); ++r) out[r] = PredictEnriched(model, data, r);
  return out;
}

// Enriches `labeled` with `table` and fits the built-in learner.
inline EnrichedModel TrainEnrichedFromReport(
    const GranularDataset& labeled, const CtrTable& table, bool include_counts,
    const EnrichedTrainConfig& config) {
  return TrainEnriched(Enrich(labeled, table, include_counts),
                       labeled.schema().cardinalities(), table, config);
}

// ---------------------------------------------------------------------------
// Enriched model file: header keys, then [numeric], [onehot] and [ctr]
// sections.

inline std::string FormatEnrichedModel(const EnrichedModel& model) {
  std::string out = "format=aggdp-enriched-model-v1\nmethod=enrich\n";
  out += std::string("label=") + LabelName(model.label) + "\n";
  out += "bias=" + FormatDouble(model.bias) + "\n";
  out += "include_counts=" + std::to_string(model.include_counts) + "\n";
  out += "prior_weight=" + FormatDouble(model.ctr.prior_weight) + "\n";
  out += "global_rate=" + FormatDouble(model.ctr.global_rate) + "\n";
  out += "config.l2=" + FormatDouble(model.config.l2) + "\n";
  out += "config.learning_rate=" + FormatDouble(model.config.learning_rate) +
         "\n";
  out += "config.iterations=" + std::to_string(model.config.num_iterations) +
         "\n";
  out += "config.seed=" + std::to_string(model.config.seed) + "\n";
  out += "onehot_cardinalities=";
  for (size_t i = 0; i < model.cardinalities.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(model.cardinalities[i]);
  }
  out += "\n" + model.ctr.encoder.Describe();
  out += "[numeric]\nname,mean,scale,weight\n";
  const auto names =
      EnrichedColumnNames(model.cardinalities.size(), model.include_counts);
  for (size_t c = 0; c < model.weight.size(); ++c) {
    out += names[c] + "," + FormatDouble(model.mean[c]) + "," +
           FormatDouble(model.scale[c]) + "," + FormatDouble(model.weight[c]) +
           "\n";
  }
  out += "[onehot]\nfeature,modality,weight\n";
  const auto off = internal::OnehotOffsets(model.cardinalities);
  for (size_t f = 0; f < model.cardinalities.size(); ++f) {
    for (uint32_t m = 0; m < model.cardinalities[f]; ++m) {
      out += std::to_string(f) + "," + std::to_string(m) + "," +
             FormatDouble(model.onehot[off[f] + m]) + "\n";
    }
  }
  out += "[ctr]\n" + std::string(kCoordinateHeader) + ",rate,displays\n";
  CoordinateFormatter fmt(model.ctr.encoder);
  for (size_t k = 0; k < model.ctr.coords.size(); ++k) {
    out += fmt.Format(model.ctr.coords[k]) + "," +
           FormatDouble(model.ctr.rate[k]) + "," +
           FormatDouble(model.ctr.displays[k]) + "\n";
  }
  return out;
}

inline EnrichedModel ParseEnrichedModel(const SectionedFile& file,
                                        const std::string& origin) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = file.header.find(key);
    if (it == file.header.end()) {
      throw ParseError(origin + ": model lacks '" + key + "'");
    }
    return it->second;
  };
  auto number = [&](const std::string& s) {
    double v;
    if (!ParseDouble(s, &v)) throw ParseError(origin + ": bad number '" + s + "'");
    return v;
  };
  if (get("format") != "aggdp-enriched-model-v1") {
    throw ParseError(origin + ": unsupported enriched model format");
  }
  EnrichedModel model;
  model.label = ParseLabelKind(get("label"));
  model.bias = number(get("bias"));
  model.include_counts = get("include_counts") == "1";
  model.config.l2 = number(get("config.l2"));
  model.config.learning_rate = number(get("config.learning_rate"));
  if (!ParseInt(get("config.iterations"), &model.config.num_iterations) ||
      !ParseInt(get("config.seed"), &model.config.seed)) {
    throw ParseError(origin + ": bad learner config");
  }
  for (const auto& item : SplitList(get("onehot_cardinalities"))) {
    uint32_t d;
    if (!ParseInt(item, &d)) throw ParseError(origin + ": bad cardinality");
    model.cardinalities.push_back(d);
  }
  model.ctr.encoder = EncoderSpec::FromKeyValues(file.header);
  model.ctr.label = model.label;
  model.ctr.prior_weight = number(get("prior_weight"));
  model.ctr.global_rate = number(get("global_rate"));

  const auto& numeric = file.Section("numeric");
  for (size_t i = 1; i < numeric.size(); ++i) {
    const auto f = SplitCsvLine(numeric[i]);
    if (f.size() != 4) throw ParseError(origin + ": bad numeric row");
    model.mean.push_back(number(f[1]));
    model.scale.push_back(number(f[2]));
    model.weight.push_back(number(f[3]));
  }
  if (model.weight.size() !=
      EnrichedColumnNames(model.cardinalities.size(), model.include_counts)
          .size()) {
    throw ParseError(origin + ": numeric column count mismatch");
  }
  const auto& onehot = file.Section("onehot");
  for (size_t i = 1; i < onehot.size(); ++i) {
    const auto f = SplitCsvLine(onehot[i]);
    if (f.size() != 3) throw ParseError(origin + ": bad onehot row");
    model.onehot.push_back(number(f[2]));
  }
  if (model.onehot.size() !=
      internal::OnehotOffsets(model.cardinalities).back()) {
    throw ParseError(origin + ": onehot size mismatch");
  }
  CoordinateFormatter fmt(model.ctr.encoder);
  const auto& ctr = file.Section("ctr");
  for (size_t i = 1; i < ctr.size(); ++i) {
    const auto f = SplitCsvLine(ctr[i]);
    const std::string where = origin + ": ctr row " + std::to_string(i);
    if (f.size() != 7) throw ParseError(where + ": expected 7 fields");
    model.ctr.coords.push_back(fmt.Parse(f, where));
    model.ctr.rate.push_back(number(f[5]));
    model.ctr.displays.push_back(number(f[6]));
  }
  return model;
}

}  // namespace aggdp

#endif  // AGGDP_ENRICHMENT_H_
