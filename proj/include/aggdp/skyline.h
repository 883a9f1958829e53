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

// Granular baselines: the Skyline logistic fit on fully labeled rows and
// the constant Dummy predictor.

#ifndef AGGDP_SKYLINE_H_
#define AGGDP_SKYLINE_H_

#include <vector>

#include "aggdp/agg_logistic.h"
#include "aggdp/common.h"
#include "aggdp/data.h"
#include "aggdp/encoding.h"
#include "aggdp/model.h"
#include "aggdp/optimizer.h"

namespace aggdp {

struct SkylineConfig {
  OptimizerConfig optimizer;
  LabelKind label = LabelKind::kClick;
};

// L2-regularized logistic regression on K(x) with the same optimizer as
// the aggregated learner, started from theta = 0 and the logit of the
// label mean.
inline TrainResult TrainSkyline(const GranularDataset& labeled,
                                const Encoder& encoder,
                                const SkylineConfig& config) {
  if (labeled.empty()) throw InvalidArgument("the labeled set is empty");
  const std::vector<double> labels = labeled.Labels(config.label);
  const double positives = PairwiseSum(labels);
  if (positives == 0 || positives == static_cast<double>(labels.size())) {
    throw InvalidArgument("labels are single-class; the fit is degenerate");
  }
  const GradientProblem p = ExactProblem(encoder.EncodeRows(labeled), labels);
  const double rate = positives / static_cast<double>(labels.size());
  OptimizeResult res = Optimize(p, config.optimizer,
                                std::vector<double>(p.dim(), 0.0), Logit(rate));
  TrainResult out;
  out.model.method = "skyline";
  out.model.label = config.label;
  out.model.encoder = encoder.spec();
  out.model.theta = GlobalWeights(p, res.theta);
  out.model.bias = res.bias;
  TrainConfig echo;
  echo.optimizer = config.optimizer;
  out.model.config = ConfigEcho(echo);
  out.model.config.erase("rescaling");
  out.model.config.erase("raw_count");
  out.log = std::move(res.log);
  return out;
}

// Constant predictor at the label mean, kept inside [clip, 1 - clip] so
// that its logit is finite.
inline Model DummyModel(const std::vector<double>& labels,
                        double clip_epsilon = 1e-7) {
  if (labels.empty()) throw InvalidArgument("dummy model needs labels");
  const double mean = PairwiseSum(labels) / static_cast<double>(labels.size());
  Model model;
  model.method = "dummy";
  model.bias = Logit(std::clamp(mean, clip_epsilon, 1.0 - clip_epsilon));
  return model;
}

}  // namespace aggdp

#endif  // AGGDP_SKYLINE_H_
