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

#include "aggdp/skyline.h"

#include <cmath>
#include <vector>

#include "aggdp/evaluation.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggdp {
namespace {

TEST(SkylineTest, ApproachesTrueModel) {
  const SyntheticData s = testing::SmallSynthetic(60000, 1);
  const auto parts = Split(s.dataset, {0.5, 0.5}, 2);
  const Encoder enc = Encoder::Exact(s.dataset.schema());
  SkylineConfig cfg;
  cfg.optimizer.l2 = 4;
  const TrainResult t = TrainSkyline(parts[0], enc, cfg);
  EXPECT_EQ(t.model.method, "skyline");
  const auto labels = parts[1].Labels(LabelKind::kClick);
  const double sky = Nce(PredictDataset(t.model, parts[1]), labels).nce;
  const double truth = Nce(PredictDataset(s.truth.click, parts[1]), labels).nce;
  EXPECT_GT(sky, 0.0);
  EXPECT_NEAR(sky, truth, 0.02);
}

TEST(SkylineTest, RegularizationShrinksWeights) {
  const SyntheticData s = testing::SmallSynthetic(3000, 2);
  const Encoder enc = Encoder::Exact(s.dataset.schema());
  auto norm = [&](double l2) {
    SkylineConfig cfg;
    cfg.optimizer.l2 = l2;
    const Model m = TrainSkyline(s.dataset, enc, cfg).model;
    double sq = 0;
    for (double v : m.theta.value) sq += v * v;
    return sq;
  };
  EXPECT_GT(norm(1), norm(100));
  EXPECT_GT(norm(100), norm(10000));
}

TEST(SkylineTest, SaleLabelAndHashedEncoder) {
  const SyntheticData s = testing::SmallSynthetic(5000, 3);
  const Encoder enc = Encoder::Hashed(s.dataset.schema_ptr(), {1 << 10, 7});
  SkylineConfig cfg;
  cfg.label = LabelKind::kSale;
  const Model m = TrainSkyline(s.dataset, enc, cfg).model;
  EXPECT_EQ(m.label, LabelKind::kSale);
  EXPECT_EQ(m.encoder, enc.spec());
  for (double p : PredictDataset(m, s.dataset)) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(SkylineTest, RejectsDegenerateLabels) {
  const GranularDataset zeros = ParseGranularCsv(
      "feat1,feat2,click\n3,A,0\n7,B,0\n", testing::ClickOnly());
  const Encoder enc = Encoder::Exact(zeros.schema());
  EXPECT_THROW(TrainSkyline(zeros, enc, {}), Error);
  const GranularDataset empty =
      ParseGranularCsv("feat1,feat2,click\n", testing::ClickOnly());
  EXPECT_THROW(TrainSkyline(empty, Encoder::Exact(empty.schema()), {}), Error);
}

TEST(DummyModelTest, HasZeroNce) {
  const GranularDataset d = testing::SmallSynthetic(1000, 4).dataset;
  const auto labels = d.Labels(LabelKind::kClick);
  const Model m = DummyModel(labels);
  EXPECT_TRUE(m.theta.empty());
  EXPECT_NEAR(Nce(PredictDataset(m, d), labels).nce, 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(DummyModel({1, 1, 1}).bias));
  EXPECT_THROW(DummyModel({}), Error);
}

}  // namespace
}  // namespace aggdp
