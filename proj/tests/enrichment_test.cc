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

#include "aggdp/enrichment.h"

#include <cmath>
#include <string>
#include <vector>

#include "aggdp/aggregation.h"
#include "aggdp/evaluation.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggdp {
namespace {

TEST(SmoothedRateTest, ClosedForm) {
  EXPECT_DOUBLE_EQ(SmoothedRate(3, 10, 0, 0.5), 0.3);
  EXPECT_DOUBLE_EQ(SmoothedRate(3, 10, 10, 0.5), (3 + 5) / 20.0);
  EXPECT_DOUBLE_EQ(SmoothedRate(0, 0, 100, 0.2), 0.2);
  EXPECT_DOUBLE_EQ(SmoothedRate(0, 0, 0, 0.2), 0.2);
}

TEST(SmoothedRateTest, NoisyCountsStayInUnitInterval) {
  EXPECT_DOUBLE_EQ(SmoothedRate(-4, 10, 0, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(SmoothedRate(30, 10, 0, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(SmoothedRate(5, -3, 0, 0.1), 0.1);
  for (double c : {-50.0, -1.0, 0.0, 2.0, 80.0}) {
    for (double d : {-20.0, 0.0, 1.0, 40.0}) {
      const double r = SmoothedRate(c, d, 10, 0.3);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
    }
  }
}

TEST(SmoothedRateTest, LargePriorTendsToGlobalRate) {
  EXPECT_NEAR(SmoothedRate(9, 10, 1e9, 0.05), 0.05, 1e-8);
}

TEST(CtrTableTest, FromSampleReport) {
  const GranularDataset d = testing::SampleDataset();
  const AggregationReport r = Aggregate(d, Encoder::Exact(d.schema()));
  const CtrTable t = ComputeCtrTable(r, LabelKind::kClick, 0.0);
  EXPECT_DOUBLE_EQ(t.global_rate, 0.4);
  const FeatureIndexMap map(d.schema().cardinalities());
  EXPECT_DOUBLE_EQ(t.Rate(map.CoordinateOf(0, 0)), 0.5);
  EXPECT_DOUBLE_EQ(t.Rate(map.CoordinateOfPair(0, 1, 2, 1)), 0.5);
  EXPECT_DOUBLE_EQ(t.Rate(map.CoordinateOf(1, 1)), 1.0 / 3);
  EXPECT_DOUBLE_EQ(t.Displays(map.CoordinateOf(1, 1)), 3.0);
  // Coordinates outside the report fall back to the global rate.
  EXPECT_DOUBLE_EQ(t.Rate(map.CoordinateOfPair(0, 1, 0, 1)), 0.4);
  EXPECT_DOUBLE_EQ(t.Displays(map.CoordinateOfPair(0, 1, 0, 1)), 0.0);
  EXPECT_DOUBLE_EQ(t.Rate(kAbsentCoordinate), 0.4);

  const CtrTable w = ComputeCtrTable(r, LabelKind::kClick, 10.0, 0.1);
  EXPECT_DOUBLE_EQ(w.Rate(map.CoordinateOf(0, 0)), (1 + 1.0) / 12);
  EXPECT_THROW(ComputeCtrTable(r, LabelKind::kClick, -1), Error);
}

TEST(CtrTableTest, ReparameterizedReportGivesSameRates) {
  const GranularDataset d = testing::SmallSynthetic(1000, 1).dataset;
  const AggregationReport r = Aggregate(d, Encoder::Exact(d.schema()));
  const CtrTable a = ComputeCtrTable(r, LabelKind::kClick, 10);
  const CtrTable b = ComputeCtrTable(Reparameterize(r), LabelKind::kClick, 10);
  ASSERT_EQ(a.coords, b.coords);
  for (size_t k = 0; k < a.rate.size(); ++k) {
    EXPECT_NEAR(a.rate[k], b.rate[k], 1e-12);
  }
}

TEST(EnrichTest, SampleColumns) {
  const GranularDataset d = testing::SampleDataset();
  const AggregationReport r = Aggregate(d, Encoder::Exact(d.schema()));
  const EnrichedDataset e =
      Enrich(d, ComputeCtrTable(r, LabelKind::kClick, 0.0), true);
  EXPECT_EQ(e.numeric_names,
            (std::vector<std::string>{"ctr_f0", "ctr_f1", "ctr_p_0_1",
                                      "cnt_f0", "cnt_f1", "cnt_p_0_1"}));
  ASSERT_EQ(e.num_rows(), 5u);
  // Row 3 is feat1 = 8, feat2 = B.
  const auto row = e.row(3);
  EXPECT_DOUBLE_EQ(row[0], 0.5);
  EXPECT_DOUBLE_EQ(row[1], 1.0 / 3);
  EXPECT_DOUBLE_EQ(row[2], 0.5);
  EXPECT_DOUBLE_EQ(row[3], 2.0);
  EXPECT_DOUBLE_EQ(row[4], 3.0);
  EXPECT_DOUBLE_EQ(row[5], 2.0);
  EXPECT_EQ(e.labels, (std::vector<double>{0, 1, 0, 1, 0}));
  EXPECT_EQ(Enrich(d, ComputeCtrTable(r, LabelKind::kClick, 0), false)
                .num_numeric(),
            3u);
  const std::string csv = FormatEnrichedCsv(e);
  EXPECT_NE(csv.find("label\n"), std::string::npos);
}

TEST(EnrichTest, RejectsMismatchedSchema) {
  const GranularDataset d = testing::SampleDataset();
  const AggregationReport r = Aggregate(d, Encoder::Exact(d.schema()));
  const GranularDataset other = testing::SmallSynthetic(10, 1).dataset;
  EXPECT_THROW(Enrich(other, ComputeCtrTable(r, LabelKind::kClick, 1), false),
               Error);
}

TEST(EnrichTest, HashedTable) {
  const GranularDataset d = testing::SmallSynthetic(2000, 2).dataset;
  const Encoder enc = Encoder::Hashed(d.schema_ptr(), {1 << 14, 3});
  const CtrTable t =
      ComputeCtrTable(Aggregate(d, enc), LabelKind::kClick, 10);
  const EnrichedDataset e = Enrich(d, t, true);
  EXPECT_EQ(e.num_numeric(), 2 * NumBlocks(3));
  for (double v : e.numeric) EXPECT_TRUE(std::isfinite(v));
}

TEST(TrainEnrichedTest, BeatsDummyAndIsDeterministic) {
  const SyntheticData s = testing::SmallSynthetic(40000, 3);
  const auto parts = Split(s.dataset, {0.9, 0.05, 0.05}, 4);
  const AggregationReport r = AddGaussianNoise(
      ThresholdReport(Aggregate(parts[0], Encoder::Exact(s.dataset.schema())),
                      10),
      17.0, 1);
  const CtrTable t = ComputeCtrTable(r, LabelKind::kClick, 100);
  const EnrichedModel m =
      TrainEnrichedFromReport(parts[1], t, true, EnrichedTrainConfig{});
  const auto labels = parts[2].Labels(LabelKind::kClick);
  EXPECT_GT(Nce(PredictEnrichedDataset(m, parts[2]), labels).nce, 0.05);
  const EnrichedModel again =
      TrainEnrichedFromReport(parts[1], t, true, EnrichedTrainConfig{});
  EXPECT_EQ(FormatEnrichedModel(m), FormatEnrichedModel(again));
}

TEST(TrainEnrichedTest, RejectsDegenerateInput) {
  const GranularDataset d = testing::SampleDataset();
  const AggregationReport r = Aggregate(d, Encoder::Exact(d.schema()));
  const CtrTable t = ComputeCtrTable(r, LabelKind::kClick, 1);
  const GranularDataset ones = ParseGranularCsv(
      "feat1,feat2,click\n3,A,1\n7,B,1\n", testing::ClickOnly());
  EnrichedTrainConfig cfg;
  EXPECT_THROW(TrainEnrichedFromReport(ones, t, false, cfg), Error);
  cfg.learning_rate = 0;
  EXPECT_THROW(TrainEnrichedFromReport(d, t, false, cfg), Error);
}

TEST(TrainEnrichedTest, ModelRoundTrip) {
  const SyntheticData s = testing::SmallSynthetic(3000, 5);
  const AggregationReport r =
      Aggregate(s.dataset, Encoder::Exact(s.dataset.schema()));
  const EnrichedModel m = TrainEnrichedFromReport(
      s.dataset, ComputeCtrTable(r, LabelKind::kClick, 10), true, {});
  const std::string text = FormatEnrichedModel(m);
  const EnrichedModel back =
      ParseEnrichedModel(ParseSectionedFile(text, "m"), "m");
  EXPECT_EQ(FormatEnrichedModel(back), text);
  EXPECT_EQ(PredictEnrichedDataset(back, s.dataset),
            PredictEnrichedDataset(m, s.dataset));
  const GranularDataset other = testing::SmallSynthetic(10, 1, {4, 4}).dataset;
  EXPECT_THROW(PredictEnrichedDataset(m, other), Error);
}

}  // namespace
}  // namespace aggdp
