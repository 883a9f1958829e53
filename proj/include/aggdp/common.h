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

// Shared plumbing: error type, number formatting, deterministic random
// streams, a fixed-partition parallel loop and small text helpers.

#ifndef AGGDP_COMMON_H_
#define AGGDP_COMMON_H_

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

namespace aggdp {

enum class ErrorCode {
  kInvalidArgument,     // bad flags, grids, hyper-parameters
  kSchema,              // missing columns, encoder/schema mismatch
  kParse,               // malformed input files
  kFailedPrecondition,  // operation ordering violations
  kDivergence,          // non-finite parameters during training
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string& m) {
  return Error(ErrorCode::kInvalidArgument, m);
}
inline Error SchemaError(const std::string& m) {
  return Error(ErrorCode::kSchema, m);
}
inline Error ParseError(const std::string& m) {
  return Error(ErrorCode::kParse, m);
}
inline Error FailedPrecondition(const std::string& m) {
  return Error(ErrorCode::kFailedPrecondition, m);
}

// Shortest decimal string that parses back to exactly `value`.
inline std::string FormatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline bool ParseDouble(std::string_view text, double* out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto res = std::from_chars(text.data(), text.data() + text.size(), *out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

template <typename Int>
bool ParseInt(std::string_view text, Int* out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), *out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline double Sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

// log(1 + exp(margin)) without overflow.
inline double Softplus(double margin) {
  if (margin > 0) return margin + std::log1p(std::exp(-margin));
  return std::log1p(std::exp(margin));
}

inline double Logit(double p) { return std::log(p / (1.0 - p)); }

// ---------------------------------------------------------------------------
// Random streams.
//
// Everything random in the library is derived from 64-bit seeds through
// SplitMix64 and mt19937_64 bit streams; distributions are computed here
// rather than through <random> distribution objects, whose output is
// implementation-defined.

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform double in the open interval (0, 1) from 53 random bits.
inline double BitsToOpenUnit(uint64_t bits) {
  return ((bits >> 11) + 0.5) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  uint64_t Bits() { return engine_(); }
  double Uniform() { return BitsToOpenUnit(engine_()); }
  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer in [0, n) by rejection.
  uint64_t Below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double Normal() {
    const double u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Counter-based standard normal: the value depends only on (seed, stream,
// counter), never on the order in which values are requested.
inline double CounterNormal(uint64_t seed, uint64_t stream, uint64_t counter) {
  const uint64_t key =
      SplitMix64(SplitMix64(seed ^ SplitMix64(stream)) ^ counter);
  const double u1 = BitsToOpenUnit(SplitMix64(key));
  const double u2 = BitsToOpenUnit(SplitMix64(key ^ 0xD1B54A32D192ED03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Parallel loops.
//
// ParallelFor splits [0, n) into contiguous ranges. Callers only write
// to outputs owned by their index range, so results never depend on the
// worker count.

inline std::atomic<int>& WorkerCountStorage() {
  static std::atomic<int> count{1};
  return count;
}

inline void SetWorkerCount(int n) { WorkerCountStorage() = std::max(1, n); }
inline int WorkerCount() { return WorkerCountStorage(); }

template <typename Fn>
void ParallelFor(size_t n, Fn&& fn) {
  const size_t workers =
      std::min<size_t>(static_cast<size_t>(WorkerCount()), n / 1024 + 1);
  if (workers <= 1) {
    fn(size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 1; w < workers; ++w) {
    const size_t begin = std::min(n, w * chunk);
    const size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(size_t{0}, std::min(n, chunk));
  for (auto& t : threads) t.join();
}

// Runs fn(i) for every i in [0, n) on up to WorkerCount() threads, one
// task at a time per thread. The first exception (by index) is rethrown.
template <typename Fn>
void ParallelTasks(size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t workers =
      std::min<size_t>(static_cast<size_t>(WorkerCount()), n);
  std::vector<std::thread> threads;
  for (size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Pairwise summation in a fixed tree shape.
inline double PairwiseSum(const double* values, size_t n) {
  if (n <= 16) {
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  const size_t half = n / 2;
  return PairwiseSum(values, half) + PairwiseSum(values + half, n - half);
}

inline double PairwiseSum(const std::vector<double>& values) {
  return PairwiseSum(values.data(), values.size());
}

// ---------------------------------------------------------------------------
// Text helpers.

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV record. Double-quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported.
inline std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

inline std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::vector<std::string> SplitList(std::string_view text,
                                          char sep = ',') {
  std::vector<std::string> out;
  if (Trim(text).empty()) return out;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    out.emplace_back(Trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Flat `key = value` files. Blank lines and lines starting with '#' are
// ignored; later keys override earlier ones.
inline std::map<std::string, std::string> ParseKeyValueText(
    std::string_view text, const std::string& origin) {
  std::map<std::string, std::string> out;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    std::string_view value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[std::string(Trim(line.substr(0, eq)))] = std::string(value);
  }
  return out;
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::map<std::string, std::string> ReadKeyValueFile(
    const std::string& path) {
  return ParseKeyValueText(ReadFile(path), path);
}

inline void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << contents;
  if (!out) throw ParseError("failed writing " + path);
}

}  // namespace aggdp

#endif  // AGGDP_COMMON_H_
