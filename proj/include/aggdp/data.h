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

// Granular categorical datasets: schema/vocabulary, CSV ingestion and
// export, and seeded row-level splits.

#ifndef AGGDP_DATA_H_
#define AGGDP_DATA_H_

#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aggdp/common.h"

namespace aggdp {

// Modality index for raw values that are not in a fixed vocabulary. Such
// values contribute no coordinates to the encoding.
inline constexpr uint32_t kOutOfVocabulary = UINT32_MAX;

enum class LabelKind { kClick, kSale };

inline const char* LabelName(LabelKind kind) {
  return kind == LabelKind::kClick ? "click" : "sale";
}

inline LabelKind ParseLabelKind(std::string_view name) {
  if (name == "click") return LabelKind::kClick;
  if (name == "sale") return LabelKind::kSale;
  throw InvalidArgument("unknown label kind '" + std::string(name) +
                        "' (expected click or sale)");
}

// Per-feature vocabularies. Dense indices are assigned in first-seen order.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<std::string> feature_names)
      : feature_names_(std::move(feature_names)),
        values_(feature_names_.size()),
        vocab_(feature_names_.size()) {}

  // Schema whose modalities are the decimal strings "0".."d-1".
  static Schema WithCardinalities(const std::vector<uint32_t>& cardinalities) {
    std::vector<std::string> names;
    for (size_t i = 0; i < cardinalities.size(); ++i) {
      names.push_back("f" + std::to_string(i));
    }
    Schema schema(std::move(names));
    for (size_t i = 0; i < cardinalities.size(); ++i) {
      for (uint32_t m = 0; m < cardinalities[i]; ++m) {
        schema.Intern(i, std::to_string(m));
      }
    }
    return schema;
  }

  size_t num_features() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  uint32_t cardinality(size_t feature) const {
    return static_cast<uint32_t>(values_[feature].size());
  }
  std::vector<uint32_t> cardinalities() const {
    std::vector<uint32_t> out;
    for (size_t i = 0; i < num_features(); ++i) out.push_back(cardinality(i));
    return out;
  }
  const std::string& value(size_t feature, uint32_t modality) const {
    return values_[feature][modality];
  }

  uint32_t Intern(size_t feature, std::string_view raw) {
    auto& vocab = vocab_[feature];
    auto it = vocab.find(std::string(raw));
    if (it != vocab.end()) return it->second;
    const auto index = static_cast<uint32_t>(values_[feature].size());
    vocab.emplace(std::string(raw), index);
    values_[feature].emplace_back(raw);
    return index;
  }

  uint32_t Lookup(size_t feature, std::string_view raw) const {
    auto it = vocab_[feature].find(std::string(raw));
    return it == vocab_[feature].end() ? kOutOfVocabulary : it->second;
  }

  bool SameVocabulary(const Schema& other) const {
    return values_ == other.values_;
  }

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::vector<std::string>> values_;
  std::vector<std::unordered_map<std::string, uint32_t>> vocab_;
};

struct GranularRow {
  std::vector<uint32_t> features;
  uint8_t y_click = 0;
  uint8_t y_sale = 0;
};

// Row-major dense modality indices plus two binary label columns. The
// schema is shared (and immutable) across datasets derived from one
// another.
class GranularDataset {
 public:
  GranularDataset() : schema_(std::make_shared<const Schema>()) {}
  explicit GranularDataset(std::shared_ptr<const Schema> schema)
      : schema_(std::move(schema)) {}

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  size_t num_features() const { return schema_->num_features(); }
  size_t num_rows() const { return clicks_.size(); }
  bool empty() const { return clicks_.empty(); }

  std::span<const uint32_t> features(size_t row) const {
    return {features_.data() + row * num_features(), num_features()};
  }
  uint8_t click(size_t row) const { return clicks_[row]; }
  uint8_t sale(size_t row) const { return sales_[row]; }
  uint8_t label(size_t row, LabelKind kind) const {
    return kind == LabelKind::kClick ? clicks_[row] : sales_[row];
  }
  std::vector<double> Labels(LabelKind kind) const {
    const auto& src = kind == LabelKind::kClick ? clicks_ : sales_;
    return std::vector<double>(src.begin(), src.end());
  }

  GranularRow row(size_t r) const {
    auto f = features(r);
    return {std::vector<uint32_t>(f.begin(), f.end()), clicks_[r], sales_[r]};
  }

  void AddRow(std::span<const uint32_t> row_features, uint8_t click,
              uint8_t sale) {
    if (row_features.size() != num_features()) {
      throw SchemaError("row has " + std::to_string(row_features.size()) +
                        " features, schema has " +
                        std::to_string(num_features()));
    }
    for (size_t i = 0; i < row_features.size(); ++i) {
      if (row_features[i] != kOutOfVocabulary &&
          row_features[i] >= schema_->cardinality(i)) {
        throw SchemaError("modality " + std::to_string(row_features[i]) +
                          " out of range for feature " +
                          schema_->feature_names()[i]);
      }
    }
    if (click > 1 || sale > 1) throw ParseError("labels must be 0 or 1");
    features_.insert(features_.end(), row_features.begin(),
                     row_features.end());
    clicks_.push_back(click);
    sales_.push_back(sale);
  }
  void AddRow(const GranularRow& row) {
    AddRow(row.features, row.y_click, row.y_sale);
  }

  void Reserve(size_t rows) {
    features_.reserve(rows * num_features());
    clicks_.reserve(rows);
    sales_.reserve(rows);
  }

  GranularDataset Subset(std::span<const size_t> rows) const {
    GranularDataset out(schema_);
    out.Reserve(rows.size());
    for (size_t r : rows) {
      auto f = features(r);
      out.features_.insert(out.features_.end(), f.begin(), f.end());
      out.clicks_.push_back(clicks_[r]);
      out.sales_.push_back(sales_[r]);
    }
    return out;
  }

  // First `n` rows (or all of them).
  GranularDataset Head(size_t n) const {
    std::vector<size_t> idx(std::min(n, num_rows()));
    std::iota(idx.begin(), idx.end(), size_t{0});
    return Subset(idx);
  }

  // Concatenation; both datasets must share one vocabulary.
  static GranularDataset Concat(const GranularDataset& a,
                                const GranularDataset& b) {
    if (a.schema_ != b.schema_ && !a.schema().SameVocabulary(b.schema())) {
      throw SchemaError("cannot concatenate datasets with different schemas");
    }
    GranularDataset out = a;
    out.features_.insert(out.features_.end(), b.features_.begin(),
                         b.features_.end());
    out.clicks_.insert(out.clicks_.end(), b.clicks_.begin(), b.clicks_.end());
    out.sales_.insert(out.sales_.end(), b.sales_.begin(), b.sales_.end());
    return out;
  }

  bool operator==(const GranularDataset& other) const {
    return features_ == other.features_ && clicks_ == other.clicks_ &&
           sales_ == other.sales_;
  }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<uint32_t> features_;
  std::vector<uint8_t> clicks_;
  std::vector<uint8_t> sales_;
};

// ---------------------------------------------------------------------------
// CSV ingestion.

struct ColumnMap {
  // Ordered feature columns. Empty means "every column that is not a label".
  std::vector<std::string> feature_columns;
  std::string click_column = "click";
  // Empty disables the sale label (all zeros).
  std::string sale_column = "sale";
};

// Reads `feature_columns`, `click_column` and `sale_column` from a flat
// key=value file. Unset keys keep their defaults.
inline ColumnMap ReadColumnMap(const std::string& path) {
  const auto kv = ReadKeyValueFile(path);
  ColumnMap map;
  if (auto it = kv.find("feature_columns"); it != kv.end()) {
    map.feature_columns = SplitList(it->second);
  }
  if (auto it = kv.find("click_column"); it != kv.end()) {
    map.click_column = it->second;
  }
  if (auto it = kv.find("sale_column"); it != kv.end()) {
    map.sale_column = it->second;
  }
  return map;
}

struct LoadOptions {
  // When set, raw values are looked up in this vocabulary (unknown values
  // become kOutOfVocabulary) instead of growing a fresh one.
  std::shared_ptr<const Schema> vocabulary;
  // When false, absent label columns read as all-zero labels.
  bool require_labels = true;
};

namespace internal {

inline uint8_t ParseLabel(std::string_view text, const std::string& path,
                          size_t line_no, const std::string& column) {
  text = Trim(text);
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw ParseError(path + ":" + std::to_string(line_no) + ": label column '" +
                   column + "' has non-binary value '" + std::string(text) +
                   "'");
}

}  // namespace internal

inline GranularDataset ParseGranularCsv(std::string_view text,
                                        const ColumnMap& column_map,
                                        const LoadOptions& options = {},
                                        const std::string& origin = "<csv>") {
  size_t pos = 0;
  size_t line_no = 0;
  auto next_line = [&](std::string_view* line) {
    if (pos >= text.size()) return false;
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    *line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(&line)) throw ParseError(origin + ": missing header row");
  const std::vector<std::string> header = SplitCsvLine(line);
  auto column_index = [&](const std::string& name) -> long {
    for (size_t i = 0; i < header.size(); ++i) {
      if (std::string_view(Trim(header[i])) == name) return static_cast<long>(i);
    }
    return -1;
  };

  auto label_column = [&](const std::string& name) -> long {
    if (name.empty()) return -1;
    const long idx = column_index(name);
    if (idx < 0 && options.require_labels) {
      throw SchemaError(origin + ": missing label column '" + name + "'");
    }
    return idx;
  };
  const long click_idx = label_column(column_map.click_column);
  const long sale_idx = label_column(column_map.sale_column);

  std::vector<std::string> feature_names = column_map.feature_columns;
  if (feature_names.empty()) {
    for (const auto& h : header) {
      const std::string name(Trim(h));
      if (name != column_map.click_column && name != column_map.sale_column) {
        feature_names.push_back(name);
      }
    }
  }
  std::vector<size_t> feature_idx;
  for (const auto& name : feature_names) {
    const long idx = column_index(name);
    if (idx < 0) {
      throw SchemaError(origin + ": missing feature column '" + name + "'");
    }
    feature_idx.push_back(static_cast<size_t>(idx));
  }

  std::shared_ptr<Schema> fresh;
  if (options.vocabulary) {
    if (options.vocabulary->num_features() != feature_names.size()) {
      throw SchemaError(origin + ": vocabulary has " +
                        std::to_string(options.vocabulary->num_features()) +
                        " features, column map names " +
                        std::to_string(feature_names.size()));
    }
  } else {
    fresh = std::make_shared<Schema>(feature_names);
  }

  std::vector<uint32_t> row(feature_names.size());
  std::vector<uint32_t> features;
  std::vector<uint8_t> clicks;
  std::vector<uint8_t> sales;
  while (next_line(&line)) {
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    for (size_t f = 0; f < feature_idx.size(); ++f) {
      const std::string_view raw = Trim(fields[feature_idx[f]]);
      row[f] = fresh ? fresh->Intern(f, raw)
                     : options.vocabulary->Lookup(f, raw);
    }
    features.insert(features.end(), row.begin(), row.end());
    clicks.push_back(click_idx < 0
                         ? 0
                         : internal::ParseLabel(fields[click_idx], origin,
                                                line_no,
                                                column_map.click_column));
    sales.push_back(sale_idx < 0
                        ? 0
                        : internal::ParseLabel(fields[sale_idx], origin,
                                               line_no,
                                               column_map.sale_column));
  }

  std::shared_ptr<const Schema> schema =
      fresh ? std::shared_ptr<const Schema>(std::move(fresh))
            : options.vocabulary;
  GranularDataset out(schema);
  out.Reserve(clicks.size());
  const size_t nf = feature_names.size();
  for (size_t r = 0; r < clicks.size(); ++r) {
    out.AddRow(std::span<const uint32_t>(features.data() + r * nf, nf),
               clicks[r], sales[r]);
  }
  return out;
}

inline GranularDataset LoadGranularCsv(const std::string& path,
                                       const ColumnMap& column_map,
                                       const LoadOptions& options = {}) {
  return ParseGranularCsv(ReadFile(path), column_map, options, path);
}

// Writes raw values with `click` and `sale` label columns. Out-of-
// vocabulary cells are written empty.
inline std::string FormatGranularCsv(const GranularDataset& dataset) {
  const Schema& schema = dataset.schema();
  std::string out;
  for (size_t f = 0; f < schema.num_features(); ++f) {
    out += CsvEscape(schema.feature_names()[f]);
    out += ',';
  }
  out += "click,sale\n";
  for (size_t r = 0; r < dataset.num_rows(); ++r) {
    auto row = dataset.features(r);
    for (size_t f = 0; f < row.size(); ++f) {
      if (row[f] != kOutOfVocabulary) out += CsvEscape(schema.value(f, row[f]));
      out += ',';
    }
    out += dataset.click(r) ? '1' : '0';
    out += ',';
    out += dataset.sale(r) ? '1' : '0';
    out += '\n';
  }
  return out;
}

// Vocabulary file: `feature,index,value` rows in feature/index order.
inline std::string FormatVocabulary(const Schema& schema) {
  std::string out = "feature,index,value\n";
  for (size_t f = 0; f < schema.num_features(); ++f) {
    for (uint32_t m = 0; m < schema.cardinality(f); ++m) {
      out += CsvEscape(schema.feature_names()[f]) + "," + std::to_string(m) +
             "," + CsvEscape(schema.value(f, m)) + "\n";
    }
  }
  return out;
}

inline std::shared_ptr<const Schema> ParseVocabulary(
    std::string_view text, const std::string& origin = "<vocab>") {
  std::vector<std::string> names;
  std::vector<std::vector<std::pair<uint32_t, std::string>>> entries;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1 || Trim(line).empty()) continue;
    auto fields = SplitCsvLine(line);
    uint32_t index = 0;
    if (fields.size() != 3 || !ParseInt(fields[1], &index)) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": malformed vocabulary row");
    }
    if (names.empty() || names.back() != fields[0]) {
      names.push_back(fields[0]);
      entries.emplace_back();
    }
    entries.back().emplace_back(index, fields[2]);
  }
  auto schema = std::make_shared<Schema>(names);
  for (size_t f = 0; f < names.size(); ++f) {
    for (size_t k = 0; k < entries[f].size(); ++k) {
      if (entries[f][k].first != k ||
          schema->Intern(f, entries[f][k].second) != k) {
        throw ParseError(origin + ": vocabulary for feature '" + names[f] +
                         "' is not a dense first-seen index");
      }
    }
  }
  return schema;
}

// ---------------------------------------------------------------------------
// Splits.

// Row-level random partition. Part k receives the shuffled rows between
// round(n * sum(fractions[0..k))) and round(n * sum(fractions[0..k])); rows
// inside each part keep their original order.
inline std::vector<GranularDataset> Split(const GranularDataset& dataset,
                                          const std::vector<double>& fractions,
                                          uint64_t seed) {
  if (fractions.empty()) throw InvalidArgument("split needs fractions");
  double total = 0;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw InvalidArgument("split fraction " + FormatDouble(f) +
                            " outside [0,1]");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions sum to " + FormatDouble(total));
  }
  const size_t n = dataset.num_rows();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.Below(i)]);
  }
  std::vector<GranularDataset> parts;
  double cumulative = 0;
  size_t begin = 0;
  for (size_t k = 0; k < fractions.size(); ++k) {
    cumulative += fractions[k];
    size_t end = k + 1 == fractions.size()
                     ? n
                     : static_cast<size_t>(std::llround(cumulative * n));
    end = std::clamp(end, begin, n);
    std::vector<size_t> rows(order.begin() + begin, order.begin() + end);
    std::sort(rows.begin(), rows.end());
    parts.push_back(dataset.Subset(rows));
    begin = end;
  }
  return parts;
}

}  // namespace aggdp

#endif  // AGGDP_DATA_H_
