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

// Text formats for reports.
//
// report.csv
//   kind,feat_i,feat_j,mod_i,mod_j,displays,clicks,sales
//   one row per stored coordinate; kind is `single`, `pair` or `hashed`.
//   Singles leave feat_j and mod_j empty; hashed rows carry the hashed
//   coordinate in mod_i and leave the feature columns empty. Rows follow
//   coordinate order, which for the exact layout is (kind with single
//   first, feat_i, feat_j, mod_i, mod_j). Values are shortest round-trip
//   decimals.
//
// report.meta
//   key=value lines: format, encoder descriptor, flags, sigma, threshold
//   and noise seed.

#ifndef AGGDP_REPORT_IO_H_
#define AGGDP_REPORT_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "aggdp/aggregation.h"
#include "aggdp/common.h"
#include "aggdp/encoding.h"

namespace aggdp {

inline constexpr std::string_view kCoordinateHeader =
    "kind,feat_i,feat_j,mod_i,mod_j";

// Renders the five coordinate columns of `coord`.
class CoordinateFormatter {
 public:
  explicit CoordinateFormatter(const EncoderSpec& spec)
      : spec_(spec),
        map_(spec.kind == EncoderKind::kExact
                 ? FeatureIndexMap(spec.cardinalities)
                 : FeatureIndexMap()) {}

  std::string Format(uint64_t coord) const {
    if (spec_.kind == EncoderKind::kHashed) {
      return "hashed,,," + std::to_string(coord) + ",";
    }
    const CoordinateKey key = map_.Decode(coord);
    if (!key.is_pair) {
      return "single," + std::to_string(key.feature_i) + ",," +
             std::to_string(key.modality_i) + ",";
    }
    return "pair," + std::to_string(key.feature_i) + "," +
           std::to_string(key.feature_j) + "," +
           std::to_string(key.modality_i) + "," +
           std::to_string(key.modality_j);
  }

  // Parses the first five fields of a row back into a coordinate.
  uint64_t Parse(const std::vector<std::string>& fields,
                 const std::string& where) const {
    if (fields.size() < 5) throw ParseError(where + ": too few fields");
    auto num = [&](const std::string& s, auto* out) {
      if (!ParseInt(s, out)) {
        throw ParseError(where + ": bad integer '" + s + "'");
      }
    };
    const std::string& kind = fields[0];
    if (spec_.kind == EncoderKind::kHashed) {
      if (kind != "hashed") throw ParseError(where + ": expected kind hashed");
      uint64_t coord = 0;
      num(fields[3], &coord);
      if (coord >= spec_.hashed.p) {
        throw ParseError(where + ": hashed coordinate out of range");
      }
      return coord;
    }
    size_t fi = 0, fj = 0;
    uint32_t mi = 0, mj = 0;
    try {
      if (kind == "single") {
        num(fields[1], &fi);
        num(fields[3], &mi);
        return map_.CoordinateOf(fi, mi);
      }
      if (kind == "pair") {
        num(fields[1], &fi);
        num(fields[2], &fj);
        num(fields[3], &mi);
        num(fields[4], &mj);
        return map_.CoordinateOfPair(fi, fj, mi, mj);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse) throw;
      throw ParseError(where + ": " + e.what());
    }
    throw ParseError(where + ": unknown kind '" + kind + "'");
  }

 private:
  EncoderSpec spec_;
  FeatureIndexMap map_;
};

inline std::string FormatReportCsv(const AggregationReport& report) {
  CoordinateFormatter fmt(report.encoder);
  std::string out(kCoordinateHeader);
  out += ",displays,clicks,sales\n";
  for (size_t k = 0; k < report.size(); ++k) {
    out += fmt.Format(report.coords[k]);
    out += ',';
    out += FormatDouble(report.displays[k]);
    out += ',';
    out += FormatDouble(report.clicks[k]);
    out += ',';
    out += FormatDouble(report.sales[k]);
    out += '\n';
  }
  return out;
}

inline std::string FormatReportMeta(const AggregationReport& report) {
  std::string out = "format=aggdp-report-v1\n";
  out += report.encoder.Describe();
  out += "noised=" + std::to_string(report.noised) + "\n";
  out += "thresholded=" + std::to_string(report.thresholded) + "\n";
  out += "reparameterized=" + std::to_string(report.reparameterized) + "\n";
  out += "sigma=" + FormatDouble(report.sigma) + "\n";
  out += "threshold=" + std::to_string(report.threshold) + "\n";
  out += "seed=" + std::to_string(report.noise_seed) + "\n";
  out += "coordinates=" + std::to_string(report.size()) + "\n";
  return out;
}

inline AggregationReport ParseReport(std::string_view csv,
                                     std::string_view meta,
                                     const std::string& origin = "<report>") {
  const auto kv = ParseKeyValueText(meta, origin + ".meta");
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(origin + ": meta lacks '" + key + "'");
    return it->second;
  };
  if (get("format") != "aggdp-report-v1") {
    throw ParseError(origin + ": unsupported report format");
  }
  AggregationReport report;
  report.encoder = EncoderSpec::FromKeyValues(kv);
  report.noised = get("noised") == "1";
  report.thresholded = get("thresholded") == "1";
  report.reparameterized = get("reparameterized") == "1";
  if (!ParseDouble(get("sigma"), &report.sigma) ||
      !ParseInt(get("threshold"), &report.threshold) ||
      !ParseInt(get("seed"), &report.noise_seed)) {
    throw ParseError(origin + ": malformed meta values");
  }

  CoordinateFormatter fmt(report.encoder);
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < csv.size()) {
    size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    const std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1 || Trim(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto fields = SplitCsvLine(line);
    if (fields.size() != 8) throw ParseError(where + ": expected 8 fields");
    const uint64_t coord = fmt.Parse(fields, where);
    if (!report.coords.empty() && coord <= report.coords.back()) {
      throw ParseError(where + ": rows are not in coordinate order");
    }
    double d, c, s;
    if (!ParseDouble(fields[5], &d) || !ParseDouble(fields[6], &c) ||
        !ParseDouble(fields[7], &s)) {
      throw ParseError(where + ": bad metric value");
    }
    report.coords.push_back(coord);
    report.displays.push_back(d);
    report.clicks.push_back(c);
    report.sales.push_back(s);
  }
  return report;
}

inline void WriteReport(const AggregationReport& report,
                        const std::string& csv_path,
                        const std::string& meta_path) {
  WriteFile(csv_path, FormatReportCsv(report));
  WriteFile(meta_path, FormatReportMeta(report));
}

inline AggregationReport ReadReport(const std::string& csv_path,
                                    const std::string& meta_path) {
  return ParseReport(ReadFile(csv_path), ReadFile(meta_path), csv_path);
}

// ---------------------------------------------------------------------------
// Sectioned text files: `key=value` header lines, then blocks introduced by
// a `[name]` line whose remaining lines are kept verbatim.

struct SectionedFile {
  std::map<std::string, std::string> header;
  std::vector<std::pair<std::string, std::vector<std::string>>> sections;

  const std::vector<std::string>& Section(const std::string& name) const {
    for (const auto& [n, lines] : sections) {
      if (n == name) return lines;
    }
    throw ParseError("missing section [" + name + "]");
  }
};

inline SectionedFile ParseSectionedFile(std::string_view text,
                                        const std::string& origin) {
  SectionedFile out;
  std::string header_text;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const std::string_view trimmed = Trim(line);
    if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
      out.sections.emplace_back(
          std::string(trimmed.substr(1, trimmed.size() - 2)),
          std::vector<std::string>{});
    } else if (out.sections.empty()) {
      header_text += line;
      header_text += '\n';
    } else if (!trimmed.empty()) {
      out.sections.back().second.emplace_back(trimmed);
    }
  }
  out.header = ParseKeyValueText(header_text, origin);
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_REPORT_IO_H_
