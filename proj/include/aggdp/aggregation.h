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

// Aggregated reports: the display/click/sale contingency vectors D, C and
// S over K(x) coordinates, count thresholding, Gaussian-mechanism noise
// and the metric re-parameterization that lowers L2 sensitivity.

#ifndef AGGDP_AGGREGATION_H_
#define AGGDP_AGGREGATION_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"

namespace aggdp {

// Columnar sparse report. The three metric columns share one support. When
// `reparameterized` is set the columns hold, in order, displays without a
// click, clicks without a sale, and sales (see Reparameterize).
struct AggregationReport {
  EncoderSpec encoder;
  std::vector<uint64_t> coords;
  std::vector<double> displays;
  std::vector<double> clicks;
  std::vector<double> sales;

  bool noised = false;
  bool thresholded = false;
  bool reparameterized = false;
  double sigma = 0.0;
  int64_t threshold = 0;
  uint64_t noise_seed = 0;

  size_t size() const { return coords.size(); }
  bool empty() const { return coords.empty(); }

  size_t Find(uint64_t coord) const {
    auto it = std::lower_bound(coords.begin(), coords.end(), coord);
    if (it == coords.end() || *it != coord) return std::string::npos;
    return static_cast<size_t>(it - coords.begin());
  }

  const std::vector<double>& labels(LabelKind kind) const {
    return kind == LabelKind::kClick ? clicks : sales;
  }

  SparseVector Column(const std::vector<double>& column) const {
    return SparseVector{coords, column};
  }
  SparseVector D() const { return Column(displays); }
  SparseVector C() const { return Column(clicks); }
  SparseVector S() const { return Column(sales); }

  bool operator==(const AggregationReport& other) const = default;
};

struct PrivacyParams {
  double epsilon = 10.0;
  double delta = 1e-10;
  double l2_sensitivity = 0.0;
  double sigma = 0.0;
};

// D, C and S summed over every row's encoding. Counts stay exact integers
// in double precision, so the result is independent of summation order.
inline AggregationReport Aggregate(const GranularDataset& dataset,
                                   const Encoder& encoder) {
  encoder.CheckCompatible(dataset.schema());
  struct Cell {
    double displays = 0, clicks = 0, sales = 0;
  };
  std::unordered_map<uint64_t, Cell> cells;
  std::vector<uint64_t> blocks(encoder.num_blocks());
  for (size_t r = 0; r < dataset.num_rows(); ++r) {
    encoder.BlockCoordinates(dataset.features(r), blocks);
    const double click = dataset.click(r);
    const double sale = dataset.sale(r);
    for (uint64_t c : blocks) {
      if (c == kAbsentCoordinate) continue;
      Cell& cell = cells[c];
      cell.displays += 1.0;
      cell.clicks += click;
      cell.sales += sale;
    }
  }
  AggregationReport report;
  report.encoder = encoder.spec();
  report.coords.reserve(cells.size());
  for (const auto& [coord, cell] : cells) report.coords.push_back(coord);
  std::sort(report.coords.begin(), report.coords.end());
  for (uint64_t c : report.coords) {
    const Cell& cell = cells[c];
    report.displays.push_back(cell.displays);
    report.clicks.push_back(cell.clicks);
    report.sales.push_back(cell.sales);
  }
  return report;
}

// Coordinate-wise sum of two noiseless reports over the same encoder.
inline AggregationReport MergeReports(const AggregationReport& a,
                                      const AggregationReport& b) {
  if (!(a.encoder == b.encoder)) {
    throw SchemaError("cannot merge reports with different encoders");
  }
  if (a.noised || b.noised || a.thresholded || b.thresholded ||
      a.reparameterized != b.reparameterized) {
    throw FailedPrecondition("only raw noiseless reports can be merged");
  }
  AggregationReport out;
  out.encoder = a.encoder;
  out.reparameterized = a.reparameterized;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.coords[i] < b.coords[j])) {
      out.coords.push_back(a.coords[i]);
      out.displays.push_back(a.displays[i]);
      out.clicks.push_back(a.clicks[i]);
      out.sales.push_back(a.sales[i]);
      ++i;
    } else if (i == a.size() || b.coords[j] < a.coords[i]) {
      out.coords.push_back(b.coords[j]);
      out.displays.push_back(b.displays[j]);
      out.clicks.push_back(b.clicks[j]);
      out.sales.push_back(b.sales[j]);
      ++j;
    } else {
      out.coords.push_back(a.coords[i]);
      out.displays.push_back(a.displays[i] + b.displays[j]);
      out.clicks.push_back(a.clicks[i] + b.clicks[j]);
      out.sales.push_back(a.sales[i] + b.sales[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

// True display count of entry k, whichever parameterization is stored.
inline double TrueDisplays(const AggregationReport& report, size_t k) {
  return report.reparameterized
             ? report.displays[k] + report.clicks[k] + report.sales[k]
             : report.displays[k];
}

// Drops coordinates whose true display count is below `min_count`. Only
// defined on true counts, hence before noise.
inline AggregationReport ThresholdReport(const AggregationReport& report,
                                         int64_t min_count) {
  if (report.noised) {
    throw FailedPrecondition(
        "thresholding must use true counts: the report is already noised");
  }
  if (min_count < 0) throw InvalidArgument("threshold must be non-negative");
  AggregationReport out = report;
  out.coords.clear();
  out.displays.clear();
  out.clicks.clear();
  out.sales.clear();
  for (size_t k = 0; k < report.size(); ++k) {
    if (TrueDisplays(report, k) < static_cast<double>(min_count)) continue;
    out.coords.push_back(report.coords[k]);
    out.displays.push_back(report.displays[k]);
    out.clicks.push_back(report.clicks[k]);
    out.sales.push_back(report.sales[k]);
  }
  out.thresholded = true;
  out.threshold = min_count;
  return out;
}

// Classical Gaussian mechanism: sigma = sensitivity * sqrt(2 ln(1.25/delta))
// / epsilon.
inline double CalibrateSigma(double epsilon, double delta,
                             double l2_sensitivity) {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  if (!(delta > 0 && delta < 1)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (!(l2_sensitivity >= 0)) {
    throw InvalidArgument("l2 sensitivity must be non-negative");
  }
  return l2_sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

// One record moves one line per table, and each of the `metrics_per_line`
// counts on it by at most one. Re-parameterized metrics are mutually
// exclusive, so only one of them moves.
inline double L2Sensitivity(int64_t num_tables, int metrics_per_line,
                            bool reparameterized) {
  if (num_tables < 1) throw InvalidArgument("need at least one table");
  if (metrics_per_line < 1 || metrics_per_line > 3) {
    throw InvalidArgument("metrics per line must be 1, 2 or 3");
  }
  return std::sqrt(static_cast<double>(num_tables) *
                   (reparameterized ? 1 : metrics_per_line));
}

inline PrivacyParams MakePrivacyParams(double epsilon, double delta,
                                       double l2_sensitivity) {
  return {epsilon, delta, l2_sensitivity,
          CalibrateSigma(epsilon, delta, l2_sensitivity)};
}

// Adds N(0, sigma^2) to every stored value. The draw for (metric,
// coordinate) is a pure function of (seed, metric, coordinate). Negative
// results are kept.
inline AggregationReport AddGaussianNoise(const AggregationReport& report,
                                          double sigma, uint64_t seed) {
  if (report.noised) throw FailedPrecondition("report is already noised");
  if (!(sigma >= 0) || !std::isfinite(sigma)) {
    throw InvalidArgument("sigma must be finite and non-negative");
  }
  AggregationReport out = report;
  if (sigma > 0) {
    std::vector<double>* columns[3] = {&out.displays, &out.clicks, &out.sales};
    ParallelFor(out.size(), [&](size_t begin, size_t end) {
      for (size_t k = begin; k < end; ++k) {
        for (uint64_t m = 0; m < 3; ++m) {
          (*columns[m])[k] += sigma * CounterNormal(seed, m, out.coords[k]);
        }
      }
    });
  }
  out.noised = true;
  out.sigma = sigma;
  out.noise_seed = seed;
  return out;
}

// Stores (displays - clicks, clicks - sales, sales) in place of (D, C, S).
// A record then increments exactly one metric per line.
inline AggregationReport Reparameterize(const AggregationReport& report) {
  if (report.noised) {
    throw FailedPrecondition("re-parameterization needs true counts");
  }
  if (report.reparameterized) {
    throw FailedPrecondition("report is already re-parameterized");
  }
  AggregationReport out = report;
  for (size_t k = 0; k < out.size(); ++k) {
    out.displays[k] = report.displays[k] - report.clicks[k];
    out.clicks[k] = report.clicks[k] - report.sales[k];
  }
  out.reparameterized = true;
  return out;
}

// Inverse of Reparameterize by prefix sums; valid on noised reports too.
// Reports that are already standard come back unchanged.
inline AggregationReport StandardMetrics(const AggregationReport& report) {
  if (!report.reparameterized) return report;
  AggregationReport out = report;
  for (size_t k = 0; k < out.size(); ++k) {
    out.clicks[k] = report.clicks[k] + report.sales[k];
    out.displays[k] = report.displays[k] + out.clicks[k];
  }
  out.reparameterized = false;
  return out;
}

// Adds explicit zero entries for every coordinate of a hashed report so
// that noise covers the whole hash space.
inline AggregationReport FillHashedSupport(const AggregationReport& report) {
  if (report.encoder.kind != EncoderKind::kHashed) {
    throw InvalidArgument("only hashed reports can be densified");
  }
  if (report.noised) throw FailedPrecondition("report is already noised");
  const uint64_t p = report.encoder.hashed.p;
  AggregationReport out = report;
  out.coords.resize(p);
  out.displays.assign(p, 0.0);
  out.clicks.assign(p, 0.0);
  out.sales.assign(p, 0.0);
  for (uint64_t c = 0; c < p; ++c) out.coords[c] = c;
  for (size_t k = 0; k < report.size(); ++k) {
    const uint64_t c = report.coords[k];
    out.displays[c] = report.displays[k];
    out.clicks[c] = report.clicks[k];
    out.sales[c] = report.sales[k];
  }
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_AGGREGATION_H_
