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

// The sparse cross-feature encoding K(x): one one-hot block per feature
// followed by one block per feature pair i < j, in exact and hashed
// variants.
//
// Exact layout. Single blocks come first in feature order; pair blocks
// follow in lexicographic (i, j) order. Inside a pair block coordinates
// are row-major with the modality of feature i as the major index:
//
//   single(i, m)          = offset(i) + m
//   pair(i, j, m_i, m_j)  = offset(i, j) + m_i * d_j + m_j
//
// Hashed layout. Each single (f, raw) and pair (f, raw_f, g, raw_g) is
// mapped to HashKey(salt, key) mod p where the key bytes are
//
//   single:  decimal(f) 0x1F raw
//   pair:    decimal(f) 0x1F raw_f 0x1F decimal(g) 0x1F raw_g
//
// and HashKey is 64-bit FNV-1a over the 8 little-endian salt bytes followed
// by the key bytes, finished with the SplitMix64 mixer. Colliding blocks
// add up, so hashed values can exceed 1.

#ifndef AGGDP_ENCODING_H_
#define AGGDP_ENCODING_H_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aggdp/common.h"
#include "aggdp/data.h"

namespace aggdp {

inline constexpr uint64_t kAbsentCoordinate = UINT64_MAX;

inline size_t NumBlocks(size_t num_features) {
  return num_features + num_features * (num_features - 1) / 2;
}

// Sorted (coordinate, value) pairs with distinct coordinates.
struct SparseVector {
  std::vector<uint64_t> index;
  std::vector<double> value;

  size_t size() const { return index.size(); }
  bool empty() const { return index.empty(); }

  // Position of `coord`, or npos.
  size_t Find(uint64_t coord) const {
    auto it = std::lower_bound(index.begin(), index.end(), coord);
    if (it == index.end() || *it != coord) return std::string::npos;
    return static_cast<size_t>(it - index.begin());
  }
  double Get(uint64_t coord) const {
    const size_t pos = Find(coord);
    return pos == std::string::npos ? 0.0 : value[pos];
  }
  double Sum() const { return PairwiseSum(value); }

  // Sorts and merges duplicate coordinates by addition.
  static SparseVector FromEntries(
      std::vector<std::pair<uint64_t, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector out;
    for (const auto& [coord, v] : entries) {
      if (!out.index.empty() && out.index.back() == coord) {
        out.value.back() += v;
      } else {
        out.index.push_back(coord);
        out.value.push_back(v);
      }
    }
    return out;
  }

  bool operator==(const SparseVector&) const = default;
};

// Decoded coordinate of the exact layout. For singles `feature_j` and
// `modality_j` are unused.
struct CoordinateKey {
  bool is_pair = false;
  size_t feature_i = 0;
  size_t feature_j = 0;
  uint32_t modality_i = 0;
  uint32_t modality_j = 0;

  bool operator==(const CoordinateKey&) const = default;
};

class FeatureIndexMap {
 public:
  FeatureIndexMap() = default;
  explicit FeatureIndexMap(std::vector<uint32_t> cardinalities)
      : cardinalities_(std::move(cardinalities)) {
    const size_t f = cardinalities_.size();
    pair_block_.assign(f * f, 0);
    uint64_t offset = 0;
    for (size_t i = 0; i < f; ++i) {
      block_start_.push_back(offset);
      block_features_.emplace_back(i, i);
      offset += cardinalities_[i];
    }
    for (size_t i = 0; i < f; ++i) {
      for (size_t j = i + 1; j < f; ++j) {
        pair_block_[i * f + j] = block_start_.size();
        block_start_.push_back(offset);
        block_features_.emplace_back(i, j);
        offset += uint64_t{cardinalities_[i]} * cardinalities_[j];
      }
    }
    total_dim_ = offset;
  }

  size_t num_features() const { return cardinalities_.size(); }
  size_t num_blocks() const { return block_start_.size(); }
  uint64_t total_dim() const { return total_dim_; }
  const std::vector<uint32_t>& cardinalities() const { return cardinalities_; }

  uint64_t single_offset(size_t i) const { return block_start_[i]; }
  uint64_t pair_offset(size_t i, size_t j) const {
    return block_start_[pair_block_[i * num_features() + j]];
  }

  uint64_t CoordinateOf(size_t feature, uint32_t modality) const {
    if (feature >= num_features() || modality >= cardinalities_[feature]) {
      throw InvalidArgument("single coordinate (" + std::to_string(feature) +
                            ", " + std::to_string(modality) +
                            ") out of range");
    }
    return single_offset(feature) + modality;
  }

  uint64_t CoordinateOfPair(size_t i, size_t j, uint32_t modality_i,
                            uint32_t modality_j) const {
    if (i >= j || j >= num_features() || modality_i >= cardinalities_[i] ||
        modality_j >= cardinalities_[j]) {
      throw InvalidArgument("pair coordinate (" + std::to_string(i) + ", " +
                            std::to_string(j) + ", " +
                            std::to_string(modality_i) + ", " +
                            std::to_string(modality_j) + ") out of range");
    }
    return pair_offset(i, j) + uint64_t{modality_i} * cardinalities_[j] +
           modality_j;
  }

  CoordinateKey Decode(uint64_t coord) const {
    if (coord >= total_dim_) {
      throw InvalidArgument("coordinate " + std::to_string(coord) +
                            " out of range");
    }
    // Last block whose start is <= coord; empty blocks share a start, so
    // upper_bound skips past them.
    auto it = std::upper_bound(block_start_.begin(), block_start_.end(), coord);
    const size_t block = static_cast<size_t>(it - block_start_.begin()) - 1;
    const uint64_t local = coord - block_start_[block];
    const auto [i, j] = block_features_[block];
    CoordinateKey key;
    key.feature_i = i;
    if (block < num_features()) {
      key.modality_i = static_cast<uint32_t>(local);
      return key;
    }
    key.is_pair = true;
    key.feature_j = j;
    key.modality_i = static_cast<uint32_t>(local / cardinalities_[j]);
    key.modality_j = static_cast<uint32_t>(local % cardinalities_[j]);
    return key;
  }

 private:
  std::vector<uint32_t> cardinalities_;
  std::vector<uint64_t> block_start_;
  std::vector<std::pair<size_t, size_t>> block_features_;
  std::vector<size_t> pair_block_;
  uint64_t total_dim_ = 0;
};

// K(x) under the exact layout. Out-of-vocabulary modalities drop every
// block they take part in.
inline SparseVector Encode(std::span<const uint32_t> x,
                           const FeatureIndexMap& map) {
  const size_t f = map.num_features();
  if (x.size() != f) {
    throw SchemaError("row has " + std::to_string(x.size()) +
                      " features, encoder expects " + std::to_string(f));
  }
  for (size_t i = 0; i < f; ++i) {
    if (x[i] != kOutOfVocabulary && x[i] >= map.cardinalities()[i]) {
      throw SchemaError("encoding: modality " + std::to_string(x[i]) +
                        " out of range for feature " + std::to_string(i));
    }
  }
  SparseVector out;
  for (size_t i = 0; i < f; ++i) {
    if (x[i] == kOutOfVocabulary) continue;
    out.index.push_back(map.single_offset(i) + x[i]);
  }
  for (size_t i = 0; i < f; ++i) {
    if (x[i] == kOutOfVocabulary) continue;
    for (size_t j = i + 1; j < f; ++j) {
      if (x[j] == kOutOfVocabulary) continue;
      out.index.push_back(map.pair_offset(i, j) +
                          uint64_t{x[i]} * map.cardinalities()[j] + x[j]);
    }
  }
  out.value.assign(out.index.size(), 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Hashing.

struct HashedEncoderConfig {
  uint64_t p = uint64_t{1} << 24;
  uint64_t salt = 0;
};

inline constexpr uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001B3ULL;
inline constexpr char kKeySeparator = '\x1F';

inline uint64_t FnvExtend(uint64_t state, std::string_view bytes) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

inline uint64_t FnvSeed(uint64_t salt) {
  uint64_t state = kFnvOffset;
  for (int b = 0; b < 8; ++b) {
    state ^= (salt >> (8 * b)) & 0xFF;
    state *= kFnvPrime;
  }
  return state;
}

inline uint64_t HashKey(uint64_t salt, std::string_view key) {
  return SplitMix64(FnvExtend(FnvSeed(salt), key));
}

inline std::string SingleHashKey(size_t feature, std::string_view raw) {
  std::string key = std::to_string(feature);
  key += kKeySeparator;
  key += raw;
  return key;
}

inline std::string PairHashKey(size_t f, std::string_view raw_f, size_t g,
                               std::string_view raw_g) {
  std::string key = SingleHashKey(f, raw_f);
  key += kKeySeparator;
  key += SingleHashKey(g, raw_g);
  return key;
}

// Hashed K(x) from raw feature values.
inline SparseVector HashedEncode(std::span<const std::string_view> raw,
                                 const HashedEncoderConfig& config) {
  if (config.p < 1) throw InvalidArgument("hash space must be non-empty");
  std::vector<std::pair<uint64_t, double>> entries;
  for (size_t f = 0; f < raw.size(); ++f) {
    entries.emplace_back(HashKey(config.salt, SingleHashKey(f, raw[f])) %
                             config.p,
                         1.0);
  }
  for (size_t f = 0; f < raw.size(); ++f) {
    for (size_t g = f + 1; g < raw.size(); ++g) {
      entries.emplace_back(
          HashKey(config.salt, PairHashKey(f, raw[f], g, raw[g])) % config.p,
          1.0);
    }
  }
  return SparseVector::FromEntries(std::move(entries));
}

// ---------------------------------------------------------------------------
// Encoder descriptors and dataset-level encoding.

enum class EncoderKind { kExact, kHashed };

// Everything needed to rebuild an encoder given a schema.
struct EncoderSpec {
  EncoderKind kind = EncoderKind::kExact;
  std::vector<uint32_t> cardinalities;  // exact
  HashedEncoderConfig hashed;           // hashed
  size_t num_features = 0;

  static EncoderSpec Exact(std::vector<uint32_t> cardinalities) {
    EncoderSpec spec;
    spec.num_features = cardinalities.size();
    spec.cardinalities = std::move(cardinalities);
    return spec;
  }
  static EncoderSpec Hashed(size_t num_features, HashedEncoderConfig config) {
    EncoderSpec spec;
    spec.kind = EncoderKind::kHashed;
    spec.num_features = num_features;
    spec.hashed = config;
    return spec;
  }

  uint64_t dim() const {
    return kind == EncoderKind::kExact
               ? FeatureIndexMap(cardinalities).total_dim()
               : hashed.p;
  }

  // key=value lines, as found in report and model metadata.
  std::string Describe() const {
    std::string out = "encoder=";
    out += kind == EncoderKind::kExact ? "exact\n" : "hashed\n";
    out += "num_features=" + std::to_string(num_features) + "\n";
    if (kind == EncoderKind::kExact) {
      out += "cardinalities=";
      for (size_t i = 0; i < cardinalities.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(cardinalities[i]);
      }
      out += "\n";
    } else {
      out += "hash_p=" + std::to_string(hashed.p) + "\n";
      out += "hash_salt=" + std::to_string(hashed.salt) + "\n";
    }
    return out;
  }

  static EncoderSpec FromKeyValues(
      const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end()) throw ParseError("metadata lacks '" + key + "'");
      return it->second;
    };
    EncoderSpec spec;
    if (!ParseInt(get("num_features"), &spec.num_features)) {
      throw ParseError("bad num_features");
    }
    const std::string& kind = get("encoder");
    if (kind == "exact") {
      for (const auto& item : SplitList(get("cardinalities"))) {
        uint32_t d = 0;
        if (!ParseInt(item, &d)) throw ParseError("bad cardinality " + item);
        spec.cardinalities.push_back(d);
      }
      if (spec.cardinalities.size() != spec.num_features) {
        throw ParseError("cardinalities do not match num_features");
      }
    } else if (kind == "hashed") {
      spec.kind = EncoderKind::kHashed;
      if (!ParseInt(get("hash_p"), &spec.hashed.p) ||
          !ParseInt(get("hash_salt"), &spec.hashed.salt) || spec.hashed.p < 1) {
        throw ParseError("bad hashed encoder parameters");
      }
    } else {
      throw ParseError("unknown encoder kind '" + kind + "'");
    }
    return spec;
  }

  bool operator==(const EncoderSpec& other) const {
    if (kind != other.kind || num_features != other.num_features) return false;
    if (kind == EncoderKind::kExact) return cardinalities == other.cardinalities;
    return hashed.p == other.hashed.p && hashed.salt == other.hashed.salt;
  }
};

// Row-compressed encoded dataset: row r owns entries [row_ptr[r],
// row_ptr[r+1]), sorted by coordinate.
struct EncodedRows {
  std::vector<size_t> row_ptr{0};
  std::vector<uint64_t> coord;
  std::vector<double> value;

  size_t num_rows() const { return row_ptr.size() - 1; }
  size_t nnz() const { return coord.size(); }
};

// Encoder bound to a vocabulary. Hashed encoders hash raw strings, so they
// keep the schema they were built from.
class Encoder {
 public:
  static Encoder Exact(const std::vector<uint32_t>& cardinalities) {
    Encoder e;
    e.spec_ = EncoderSpec::Exact(cardinalities);
    e.map_ = FeatureIndexMap(cardinalities);
    return e;
  }
  static Encoder Exact(const Schema& schema) {
    return Exact(schema.cardinalities());
  }

  static Encoder Hashed(std::shared_ptr<const Schema> schema,
                        HashedEncoderConfig config) {
    if (config.p < 1) throw InvalidArgument("hash space must be non-empty");
    Encoder e;
    e.spec_ = EncoderSpec::Hashed(schema->num_features(), config);
    e.schema_ = std::move(schema);
    const Schema& s = *e.schema_;
    const uint64_t seed = FnvSeed(config.salt);
    e.single_state_.resize(s.num_features());
    e.single_coord_.resize(s.num_features());
    e.pair_suffix_.resize(s.num_features());
    for (size_t f = 0; f < s.num_features(); ++f) {
      for (uint32_t m = 0; m < s.cardinality(f); ++m) {
        const uint64_t state =
            FnvExtend(seed, SingleHashKey(f, s.value(f, m)));
        e.single_state_[f].push_back(state);
        e.single_coord_[f].push_back(SplitMix64(state) % config.p);
        std::string suffix(1, kKeySeparator);
        suffix += SingleHashKey(f, s.value(f, m));
        e.pair_suffix_[f].push_back(std::move(suffix));
      }
    }
    return e;
  }

  // Rebuilds the encoder described by `spec` for rows under `schema`.
  static Encoder FromSpec(const EncoderSpec& spec,
                          std::shared_ptr<const Schema> schema) {
    if (schema->num_features() != spec.num_features) {
      throw SchemaError("encoder expects " + std::to_string(spec.num_features) +
                        " features, data has " +
                        std::to_string(schema->num_features()));
    }
    if (spec.kind == EncoderKind::kHashed) {
      return Hashed(std::move(schema), spec.hashed);
    }
    if (schema->cardinalities() != spec.cardinalities) {
      throw SchemaError("encoder cardinalities do not match the data schema");
    }
    return Exact(spec.cardinalities);
  }

  const EncoderSpec& spec() const { return spec_; }
  EncoderKind kind() const { return spec_.kind; }
  uint64_t dim() const {
    return kind() == EncoderKind::kExact ? map_.total_dim() : spec_.hashed.p;
  }
  size_t num_features() const { return spec_.num_features; }
  size_t num_blocks() const { return NumBlocks(num_features()); }
  // Only meaningful for exact encoders.
  const FeatureIndexMap& index_map() const { return map_; }

  // One coordinate per block (singles, then pairs lexicographically), or
  // kAbsentCoordinate when a block involves an out-of-vocabulary value.
  void BlockCoordinates(std::span<const uint32_t> row,
                        std::span<uint64_t> out) const {
    const size_t f = num_features();
    if (row.size() != f) {
      throw SchemaError("row has " + std::to_string(row.size()) +
                        " features, encoder expects " + std::to_string(f));
    }
    if (kind() == EncoderKind::kExact) {
      for (size_t i = 0; i < f; ++i) {
        if (row[i] != kOutOfVocabulary && row[i] >= map_.cardinalities()[i]) {
          throw SchemaError("encoding: modality " + std::to_string(row[i]) +
                            " out of range for feature " + std::to_string(i));
        }
      }
    }
    size_t b = 0;
    for (size_t i = 0; i < f; ++i, ++b) {
      if (row[i] == kOutOfVocabulary) {
        out[b] = kAbsentCoordinate;
      } else if (kind() == EncoderKind::kExact) {
        out[b] = map_.single_offset(i) + row[i];
      } else {
        out[b] = single_coord_[i][row[i]];
      }
    }
    for (size_t i = 0; i < f; ++i) {
      for (size_t j = i + 1; j < f; ++j, ++b) {
        if (row[i] == kOutOfVocabulary || row[j] == kOutOfVocabulary) {
          out[b] = kAbsentCoordinate;
        } else if (kind() == EncoderKind::kExact) {
          out[b] = map_.pair_offset(i, j) +
                   uint64_t{row[i]} * map_.cardinalities()[j] + row[j];
        } else {
          out[b] = SplitMix64(FnvExtend(single_state_[i][row[i]],
                                        pair_suffix_[j][row[j]])) %
                   spec_.hashed.p;
        }
      }
    }
  }

  SparseVector Encode(std::span<const uint32_t> row) const {
    std::vector<uint64_t> blocks(num_blocks());
    BlockCoordinates(row, blocks);
    std::vector<std::pair<uint64_t, double>> entries;
    for (uint64_t c : blocks) {
      if (c != kAbsentCoordinate) entries.emplace_back(c, 1.0);
    }
    return SparseVector::FromEntries(std::move(entries));
  }

  void CheckCompatible(const Schema& schema) const {
    if (schema.num_features() != num_features()) {
      throw SchemaError("encoder expects " + std::to_string(num_features()) +
                        " features, data has " +
                        std::to_string(schema.num_features()));
    }
    if (kind() == EncoderKind::kExact) {
      if (schema.cardinalities() != spec_.cardinalities) {
        throw SchemaError("encoder cardinalities do not match the data schema");
      }
    } else if (&schema != schema_.get() && !schema.SameVocabulary(*schema_)) {
      throw SchemaError("hashed encoder was built for a different vocabulary");
    }
  }

  EncodedRows EncodeRows(const GranularDataset& dataset) const {
    CheckCompatible(dataset.schema());
    const size_t n = dataset.num_rows();
    const size_t nb = num_blocks();
    std::vector<uint64_t> blocks(n * nb);
    ParallelFor(n, [&](size_t begin, size_t end) {
      std::vector<uint64_t> tmp(nb);
      for (size_t r = begin; r < end; ++r) {
        BlockCoordinates(dataset.features(r), tmp);
        std::sort(tmp.begin(), tmp.end());
        std::copy(tmp.begin(), tmp.end(), blocks.begin() + r * nb);
      }
    });
    EncodedRows out;
    out.row_ptr.reserve(n + 1);
    out.coord.reserve(n * nb);
    out.value.reserve(n * nb);
    for (size_t r = 0; r < n; ++r) {
      const size_t row_start = out.coord.size();
      for (size_t b = 0; b < nb; ++b) {
        const uint64_t c = blocks[r * nb + b];
        if (c == kAbsentCoordinate) break;  // sorted: absent entries last
        if (out.coord.size() > row_start && out.coord.back() == c) {
          out.value.back() += 1.0;
        } else {
          out.coord.push_back(c);
          out.value.push_back(1.0);
        }
      }
      out.row_ptr.push_back(out.coord.size());
    }
    return out;
  }

 private:
  EncoderSpec spec_;
  FeatureIndexMap map_;
  std::shared_ptr<const Schema> schema_;
  std::vector<std::vector<uint64_t>> single_state_;
  std::vector<std::vector<uint64_t>> single_coord_;
  std::vector<std::vector<std::string>> pair_suffix_;
};

}  // namespace aggdp

#endif  // AGGDP_ENCODING_H_
