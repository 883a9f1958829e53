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

// Synthetic granular data drawn from a known logistic model on K(x).
//
// Features are independent, feature i following a Zipf law with exponent
// s_i over its d_i modalities (P(m) proportional to (m + 1)^-s_i). Each
// coordinate of the true weight vector is nonzero with probability
// `true_weight_density` and then Gaussian with standard deviation
// `weight_scale`. The intercept is set by bisection so that the mean
// predicted probability over the drawn rows equals `base_rate`. A second,
// independent model drives the sale label.

#ifndef AGGDP_SYNTHETIC_H_
#define AGGDP_SYNTHETIC_H_

#include <cmath>
#include <memory>
#include <vector>

#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/model.h"

namespace aggdp {

struct SyntheticSpec {
  size_t num_features = 5;
  std::vector<uint32_t> cardinalities = {8, 10, 12, 6, 15};
  // One exponent per feature, or a single value applied to all.
  std::vector<double> marginal_skew = {1.0};
  double true_weight_density = 0.3;
  double weight_scale = 1.0;
  double base_rate = 0.1;
  double sale_rate = 0.005;
  size_t num_rows = 10000;
  uint64_t seed = 0;
};

struct TrueModel {
  Model click;
  Model sale;
};

struct SyntheticData {
  GranularDataset dataset;
  TrueModel truth;
};

namespace internal {

// Bias b with mean(sigmoid(margins + b)) == rate.
inline double CalibrateBias(const std::vector<double>& margins, double rate) {
  if (margins.empty()) return Logit(rate);
  auto mean_at = [&](double b) {
    std::vector<double> p(margins.size());
    for (size_t r = 0; r < margins.size(); ++r) p[r] = Sigmoid(margins[r] + b);
    return PairwiseSum(p) / static_cast<double>(p.size());
  };
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline Model DrawTrueWeights(const SyntheticSpec& spec, uint64_t dim,
                             uint64_t stream) {
  Model model;
  model.method = "truth";
  model.encoder = EncoderSpec::Exact(spec.cardinalities);
  Rng rng(SplitMix64(spec.seed ^ SplitMix64(stream)));
  std::vector<std::pair<uint64_t, double>> entries;
  for (uint64_t c = 0; c < dim; ++c) {
    if (rng.Uniform() < spec.true_weight_density) {
      entries.emplace_back(c, spec.weight_scale * rng.Normal());
    }
  }
  model.theta = SparseVector::FromEntries(std::move(entries));
  return model;
}

}  // namespace internal

inline void ValidateSyntheticSpec(const SyntheticSpec& spec) {
  if (spec.cardinalities.size() != spec.num_features) {
    throw InvalidArgument("need one cardinality per feature");
  }
  for (uint32_t d : spec.cardinalities) {
    if (d < 2) throw InvalidArgument("cardinalities must be at least 2");
  }
  if (spec.marginal_skew.size() != 1 &&
      spec.marginal_skew.size() != spec.num_features) {
    throw InvalidArgument("need one skew exponent or one per feature");
  }
  for (double s : spec.marginal_skew) {
    if (!(s >= 0) || !std::isfinite(s)) {
      throw InvalidArgument("skew exponents must be finite and >= 0");
    }
  }
  if (!(spec.base_rate > 0 && spec.base_rate < 1) ||
      !(spec.sale_rate > 0 && spec.sale_rate < 1)) {
    throw InvalidArgument("positive rates must lie in (0, 1)");
  }
  if (!(spec.true_weight_density >= 0 && spec.true_weight_density <= 1)) {
    throw InvalidArgument("weight density must lie in [0, 1]");
  }
  if (!(spec.weight_scale >= 0) || !std::isfinite(spec.weight_scale)) {
    throw InvalidArgument("weight scale must be finite and >= 0");
  }
}

inline SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  ValidateSyntheticSpec(spec);
  const size_t nf = spec.num_features;
  const FeatureIndexMap map(spec.cardinalities);
  auto schema = std::make_shared<const Schema>(
      Schema::WithCardinalities(spec.cardinalities));

  std::vector<std::vector<double>> cdf(nf);
  for (size_t f = 0; f < nf; ++f) {
    const double s =
        spec.marginal_skew.size() == 1 ? spec.marginal_skew[0]
                                       : spec.marginal_skew[f];
    double total = 0.0;
    for (uint32_t m = 0; m < spec.cardinalities[f]; ++m) {
      total += std::pow(m + 1.0, -s);
      cdf[f].push_back(total);
    }
  }

  const size_t n = spec.num_rows;
  std::vector<uint32_t> features(n * nf);
  Rng rng(SplitMix64(spec.seed ^ 0x5EA7u));
  for (size_t r = 0; r < n; ++r) {
    for (size_t f = 0; f < nf; ++f) {
      const double u = rng.Uniform() * cdf[f].back();
      auto it = std::upper_bound(cdf[f].begin(), cdf[f].end(), u);
      if (it == cdf[f].end()) --it;
      features[r * nf + f] = static_cast<uint32_t>(it - cdf[f].begin());
    }
  }

  SyntheticData out;
  out.truth.click = internal::DrawTrueWeights(spec, map.total_dim(), 1);
  out.truth.sale = internal::DrawTrueWeights(spec, map.total_dim(), 2);
  const Encoder encoder = Encoder::Exact(spec.cardinalities);
  std::vector<double> click_margin(n), sale_margin(n);
  ParallelFor(n, [&](size_t begin, size_t end) {
    for (size_t r = begin; r < end; ++r) {
      const SparseVector kx = encoder.Encode(
          std::span<const uint32_t>(features.data() + r * nf, nf));
      click_margin[r] =
          Margin(out.truth.click, kx.index.data(), kx.value.data(), kx.size());
      sale_margin[r] =
          Margin(out.truth.sale, kx.index.data(), kx.value.data(), kx.size());
    }
  });
  out.truth.click.bias = internal::CalibrateBias(click_margin, spec.base_rate);
  out.truth.sale.bias = internal::CalibrateBias(sale_margin, spec.sale_rate);

  // Labels use counter-based uniforms so that rows are independent of
  // evaluation order.
  const uint64_t label_seed = SplitMix64(spec.seed ^ 0x1ABE1u);
  auto uniform = [&](uint64_t stream, size_t r) {
    return BitsToOpenUnit(SplitMix64(SplitMix64(label_seed ^ stream) ^ r));
  };
  out.dataset = GranularDataset(schema);
  out.dataset.Reserve(n);
  for (size_t r = 0; r < n; ++r) {
    const uint8_t click =
        uniform(1, r) < Sigmoid(click_margin[r] + out.truth.click.bias);
    const uint8_t sale =
        uniform(2, r) < Sigmoid(sale_margin[r] + out.truth.sale.bias);
    out.dataset.AddRow(
        std::span<const uint32_t>(features.data() + r * nf, nf), click, sale);
  }
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_SYNTHETIC_H_
