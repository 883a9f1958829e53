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

// Log-loss, label entropy, normalized cross-entropy (NCE), Skyline
// degradation and paired bootstrap comparisons.
//
// Losses are means over samples (natural log) rather than sums, and
// predictions are clipped to [clip, 1 - clip] before taking logs.

#ifndef AGGDP_EVALUATION_H_
#define AGGDP_EVALUATION_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "aggdp/common.h"

namespace aggdp {

inline constexpr double kDefaultClipEpsilon = 1e-7;

struct EvalResult {
  double log_loss = 0.0;
  double entropy = 0.0;
  double nce = 0.0;
  size_t num_samples = 0;
  double clip_epsilon = kDefaultClipEpsilon;
};

namespace internal {

inline void CheckAligned(size_t a, size_t b) {
  if (a != b) {
    throw InvalidArgument("predictions (" + std::to_string(a) +
                          ") and labels (" + std::to_string(b) +
                          ") differ in length");
  }
}

inline double SampleLoss(double p, double y, double clip) {
  p = std::clamp(p, clip, 1.0 - clip);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

}  // namespace internal

inline double LogLoss(std::span<const double> predictions,
                      std::span<const double> labels,
                      double clip_epsilon = kDefaultClipEpsilon) {
  internal::CheckAligned(predictions.size(), labels.size());
  if (predictions.empty()) throw InvalidArgument("log-loss of no samples");
  std::vector<double> terms(predictions.size());
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i])) {
      throw InvalidArgument("non-finite prediction at index " +
                            std::to_string(i));
    }
    terms[i] = internal::SampleLoss(predictions[i], labels[i], clip_epsilon);
  }
  return PairwiseSum(terms) / static_cast<double>(terms.size());
}

// Binary entropy (nats) of rate p.
inline double BinaryEntropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
}

inline double LabelEntropy(std::span<const double> labels) {
  if (labels.empty()) throw InvalidArgument("entropy of no labels");
  return BinaryEntropy(PairwiseSum(labels.data(), labels.size()) /
                       static_cast<double>(labels.size()));
}

// (H(Y) - L) / H(Y). Undefined when every label is identical.
inline EvalResult Nce(std::span<const double> predictions,
                      std::span<const double> labels,
                      double clip_epsilon = kDefaultClipEpsilon) {
  EvalResult r;
  r.log_loss = LogLoss(predictions, labels, clip_epsilon);
  r.entropy = LabelEntropy(labels);
  if (!(r.entropy > 0)) {
    throw InvalidArgument("labels have zero entropy; NCE is undefined");
  }
  r.nce = (r.entropy - r.log_loss) / r.entropy;
  r.num_samples = labels.size();
  r.clip_epsilon = clip_epsilon;
  return r;
}

// Signed relative log-loss change vs the Skyline, in percent. Negative
// means worse than the Skyline.
inline double SkylineDegradation(double loss, double skyline_loss) {
  if (!(skyline_loss > 0)) {
    throw InvalidArgument("skyline loss must be positive");
  }
  return -100.0 * (loss - skyline_loss) / skyline_loss;
}

struct BootstrapResult {
  double mean_delta = 0.0;  // mean of loss(a) - loss(b) over resamples
  double p_value = 1.0;
};

// Paired bootstrap over sample indices. The p-value is twice the smaller
// of the fractions of resamples with delta <= 0 and delta >= 0, capped
// at 1.
inline BootstrapResult BootstrapCompare(std::span<const double> preds_a,
                                        std::span<const double> preds_b,
                                        std::span<const double> labels,
                                        int num_bootstraps, uint64_t seed,
                                        double clip_epsilon =
                                            kDefaultClipEpsilon) {
  internal::CheckAligned(preds_a.size(), labels.size());
  internal::CheckAligned(preds_b.size(), labels.size());
  if (labels.empty()) throw InvalidArgument("bootstrap of no samples");
  if (num_bootstraps < 100) {
    throw InvalidArgument("need at least 100 bootstrap resamples");
  }
  const size_t n = labels.size();
  std::vector<double> diff(n);
  for (size_t i = 0; i < n; ++i) {
    diff[i] = internal::SampleLoss(preds_a[i], labels[i], clip_epsilon) -
              internal::SampleLoss(preds_b[i], labels[i], clip_epsilon);
  }
  std::vector<double> deltas(num_bootstraps);
  ParallelFor(deltas.size(), [&](size_t begin, size_t end) {
    std::vector<double> sample(n);
    for (size_t b = begin; b < end; ++b) {
      Rng rng(SplitMix64(seed) ^ SplitMix64(b + 1));
      for (size_t i = 0; i < n; ++i) sample[i] = diff[rng.Below(n)];
      deltas[b] = PairwiseSum(sample) / static_cast<double>(n);
    }
  });
  size_t non_positive = 0, non_negative = 0;
  for (double d : deltas) {
    non_positive += d <= 0.0;
    non_negative += d >= 0.0;
  }
  BootstrapResult r;
  r.mean_delta = PairwiseSum(deltas) / static_cast<double>(num_bootstraps);
  r.p_value = std::min(
      1.0, 2.0 * static_cast<double>(std::min(non_positive, non_negative)) /
               static_cast<double>(num_bootstraps));
  return r;
}

inline std::string FormatEvalCsv(const EvalResult& r) {
  std::string out = "metric,value\n";
  out += "log_loss," + FormatDouble(r.log_loss) + "\n";
  out += "entropy," + FormatDouble(r.entropy) + "\n";
  out += "nce," + FormatDouble(r.nce) + "\n";
  out += "num_samples," + std::to_string(r.num_samples) + "\n";
  out += "clip_epsilon," + FormatDouble(r.clip_epsilon) + "\n";
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_EVALUATION_H_
