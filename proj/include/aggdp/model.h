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

// Logistic models over K(x): parameters, prediction and the model file.
//
// model.bin (text despite the name)
//   key=value header: format, method, label, bias, encoder descriptor and
//   `config.*` echo keys, then
//   [weights]
//   kind,feat_i,feat_j,mod_i,mod_j,weight
//   one row per non-zero weight in coordinate order.

#ifndef AGGDP_MODEL_H_
#define AGGDP_MODEL_H_

#include <map>
#include <string>
#include <vector>

#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/report_io.h"

namespace aggdp {

struct Model {
  std::string method = "agglogistic";
  LabelKind label = LabelKind::kClick;
  EncoderSpec encoder;
  SparseVector theta;
  double bias = 0.0;
  std::map<std::string, std::string> config;
};

inline double Margin(const Model& model, const uint64_t* coords,
                     const double* values, size_t n) {
  double margin = model.bias;
  for (size_t k = 0; k < n; ++k) {
    margin += model.theta.Get(coords[k]) * values[k];
  }
  return margin;
}

// sigma(theta . K(x) + bias) for one row.
inline double Predict(const Model& model, const Encoder& encoder,
                      std::span<const uint32_t> x) {
  if (!(encoder.spec() == model.encoder)) {
    throw SchemaError("model and encoder disagree");
  }
  const SparseVector kx = encoder.Encode(x);
  return Sigmoid(Margin(model, kx.index.data(), kx.value.data(), kx.size()));
}

// Predictions for every row. Constant models (no weights) accept any
// schema.
inline std::vector<double> PredictDataset(const Model& model,
                                          const GranularDataset& dataset) {
  const size_t n = dataset.num_rows();
  if (model.theta.empty()) return std::vector<double>(n, Sigmoid(model.bias));
  const Encoder encoder = Encoder::FromSpec(model.encoder, dataset.schema_ptr());
  const EncodedRows rows = encoder.EncodeRows(dataset);
  std::vector<double> out(n);
  ParallelFor(n, [&](size_t begin, size_t end) {
    for (size_t r = begin; r < end; ++r) {
      const size_t b = rows.row_ptr[r];
      out[r] = Sigmoid(Margin(model, rows.coord.data() + b,
                              rows.value.data() + b, rows.row_ptr[r + 1] - b));
    }
  });
  return out;
}

inline std::string FormatModel(const Model& model) {
  std::string out = "format=aggdp-model-v1\n";
  out += "method=" + model.method + "\n";
  out += std::string("label=") + LabelName(model.label) + "\n";
  out += "bias=" + FormatDouble(model.bias) + "\n";
  out += model.encoder.Describe();
  for (const auto& [k, v] : model.config) out += "config." + k + "=" + v + "\n";
  out += "[weights]\n";
  out += std::string(kCoordinateHeader) + ",weight\n";
  CoordinateFormatter fmt(model.encoder);
  for (size_t k = 0; k < model.theta.size(); ++k) {
    out += fmt.Format(model.theta.index[k]) + "," +
           FormatDouble(model.theta.value[k]) + "\n";
  }
  return out;
}

inline Model ParseModel(const SectionedFile& file, const std::string& origin) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = file.header.find(key);
    if (it == file.header.end()) {
      throw ParseError(origin + ": model lacks '" + key + "'");
    }
    return it->second;
  };
  if (get("format") != "aggdp-model-v1") {
    throw ParseError(origin + ": unsupported model format");
  }
  Model model;
  model.method = get("method");
  model.label = ParseLabelKind(get("label"));
  if (!ParseDouble(get("bias"), &model.bias)) {
    throw ParseError(origin + ": bad bias");
  }
  model.encoder = EncoderSpec::FromKeyValues(file.header);
  for (const auto& [k, v] : file.header) {
    if (k.rfind("config.", 0) == 0) model.config[k.substr(7)] = v;
  }
  CoordinateFormatter fmt(model.encoder);
  const auto& lines = file.Section("weights");
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string where = origin + ": weight row " + std::to_string(i);
    const auto fields = SplitCsvLine(lines[i]);
    if (fields.size() != 6) throw ParseError(where + ": expected 6 fields");
    const uint64_t coord = fmt.Parse(fields, where);
    double w;
    if (!ParseDouble(fields[5], &w)) throw ParseError(where + ": bad weight");
    if (!model.theta.index.empty() && coord <= model.theta.index.back()) {
      throw ParseError(where + ": weights out of coordinate order");
    }
    model.theta.index.push_back(coord);
    model.theta.value.push_back(w);
  }
  return model;
}

inline Model ParseModel(std::string_view text,
                        const std::string& origin = "<model>") {
  return ParseModel(ParseSectionedFile(text, origin), origin);
}

}  // namespace aggdp

#endif  // AGGDP_MODEL_H_
