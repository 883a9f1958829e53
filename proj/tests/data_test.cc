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

#include "aggdp/data.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "aggdp/synthetic.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggdp {
namespace {

using testing::ClickOnly;
using testing::kSampleCsv;
using testing::SampleDataset;

TEST(LoadCsvTest, SampleRows) {
  const GranularDataset d = SampleDataset();
  EXPECT_EQ(d.num_rows(), 5u);
  ASSERT_EQ(d.num_features(), 2u);
  EXPECT_EQ(d.schema().cardinality(0), 3u);
  EXPECT_EQ(d.schema().cardinality(1), 2u);
  // First-seen order.
  EXPECT_EQ(d.schema().value(0, 0), "3");
  EXPECT_EQ(d.schema().value(0, 1), "7");
  EXPECT_EQ(d.schema().value(0, 2), "8");
  EXPECT_EQ(d.features(3)[0], 2u);
  EXPECT_EQ(d.click(1), 1);
  EXPECT_EQ(d.sale(1), 0);
}

TEST(LoadCsvTest, HeaderOnlyGivesEmptyDataset) {
  const GranularDataset d =
      ParseGranularCsv("a,b,click,sale\n", ColumnMap{});
  EXPECT_EQ(d.num_rows(), 0u);
  EXPECT_EQ(d.schema().cardinalities(), (std::vector<uint32_t>{0, 0}));
}

TEST(LoadCsvTest, NonBinaryLabelNamesLine) {
  try {
    ParseGranularCsv("a,click\nx,1\ny,2\n", ClickOnly(), {}, "in.csv");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("in.csv:3"), std::string::npos);
  }
}

TEST(LoadCsvTest, MissingColumnNamesIt) {
  ColumnMap map = ClickOnly();
  map.feature_columns = {"a", "zzz"};
  try {
    ParseGranularCsv("a,click\nx,1\n", map);
    FAIL() << "expected a schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find("zzz"), std::string::npos);
  }
  EXPECT_THROW(ParseGranularCsv("a,b\nx,1\n", ColumnMap{}), Error);
}

TEST(LoadCsvTest, ColumnMapSelectsAndOrdersFeatures) {
  ColumnMap map;
  map.feature_columns = {"c", "a"};
  map.click_column = "y";
  map.sale_column = "s";
  const GranularDataset d =
      ParseGranularCsv("a,b,c,y,s\n1,2,3,1,0\n4,5,6,0,1\n", map);
  ASSERT_EQ(d.num_features(), 2u);
  EXPECT_EQ(d.schema().feature_names()[0], "c");
  EXPECT_EQ(d.schema().value(0, d.features(1)[0]), "6");
  EXPECT_EQ(d.schema().value(1, d.features(1)[1]), "4");
  EXPECT_EQ(d.sale(1), 1);
}

TEST(LoadCsvTest, ColumnMapFile) {
  const std::string dir = testing::TempDir("colmap");
  WriteFile(dir + "/map.conf",
            "# challenge columns\nfeature_columns = b, a\nclick_column=y\n"
            "sale_column=\n");
  const ColumnMap map = ReadColumnMap(dir + "/map.conf");
  EXPECT_EQ(map.feature_columns, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(map.click_column, "y");
  EXPECT_TRUE(map.sale_column.empty());
}

TEST(LoadCsvTest, FixedVocabularyMapsUnknownToOov) {
  const GranularDataset train = SampleDataset();
  LoadOptions opts;
  opts.vocabulary = train.schema_ptr();
  const GranularDataset d =
      ParseGranularCsv("feat1,feat2,click\n9,A,1\n", ClickOnly(), opts);
  EXPECT_EQ(d.features(0)[0], kOutOfVocabulary);
  EXPECT_EQ(d.features(0)[1], 0u);
}

TEST(LoadCsvTest, ExportRoundTripsDenseIndices) {
  const GranularDataset d = testing::SmallSynthetic(200, 4).dataset;
  const GranularDataset back =
      ParseGranularCsv(FormatGranularCsv(d), ColumnMap{});
  ASSERT_EQ(back.num_rows(), d.num_rows());
  // Vocabularies are rebuilt in first-seen order, so compare raw values.
  for (size_t r = 0; r < d.num_rows(); ++r) {
    for (size_t f = 0; f < d.num_features(); ++f) {
      EXPECT_EQ(d.schema().value(f, d.features(r)[f]),
                back.schema().value(f, back.features(r)[f]));
    }
    EXPECT_EQ(d.click(r), back.click(r));
    EXPECT_EQ(d.sale(r), back.sale(r));
  }
  LoadOptions opts;
  opts.vocabulary = d.schema_ptr();
  EXPECT_EQ(ParseGranularCsv(FormatGranularCsv(d), ColumnMap{}, opts), d);
}

TEST(VocabularyTest, RoundTrip) {
  const GranularDataset d = SampleDataset();
  auto schema = ParseVocabulary(FormatVocabulary(d.schema()));
  EXPECT_TRUE(schema->SameVocabulary(d.schema()));
  EXPECT_EQ(schema->feature_names(), d.schema().feature_names());
}

TEST(DatasetTest, AddRowValidates) {
  GranularDataset d(std::make_shared<const Schema>(
      Schema::WithCardinalities({2, 2})));
  const std::vector<uint32_t> bad = {0, 2};
  EXPECT_THROW(d.AddRow(bad, 0, 0), Error);
  const std::vector<uint32_t> short_row = {0};
  EXPECT_THROW(d.AddRow(short_row, 0, 0), Error);
  const std::vector<uint32_t> ok = {1, 1};
  EXPECT_THROW(d.AddRow(ok, 2, 0), Error);
  d.AddRow(ok, 1, 0);
  EXPECT_EQ(d.num_rows(), 1u);
}

std::vector<std::vector<uint32_t>> RowMultiset(const GranularDataset& d) {
  std::vector<std::vector<uint32_t>> rows;
  for (size_t r = 0; r < d.num_rows(); ++r) {
    auto f = d.features(r);
    std::vector<uint32_t> row(f.begin(), f.end());
    row.push_back(d.click(r));
    row.push_back(d.sale(r));
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

TEST(SplitTest, SizesFollowFractions) {
  const GranularDataset d = testing::SmallSynthetic(1000, 1).dataset;
  const auto parts = Split(d, {0.88, 0.001, 0.119}, 7);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].num_rows(), 880u);
  EXPECT_EQ(parts[1].num_rows(), 1u);
  EXPECT_EQ(parts[2].num_rows(), 119u);
}

TEST(SplitTest, IsAPartition) {
  const GranularDataset d = testing::SmallSynthetic(500, 2).dataset;
  const auto parts = Split(d, {0.3, 0.3, 0.4}, 11);
  GranularDataset all = parts[0];
  for (size_t k = 1; k < parts.size(); ++k) {
    all = GranularDataset::Concat(all, parts[k]);
  }
  EXPECT_EQ(RowMultiset(all), RowMultiset(d));
}

TEST(SplitTest, IdentityAndDeterminism) {
  const GranularDataset d = testing::SmallSynthetic(300, 3).dataset;
  EXPECT_EQ(Split(d, {1.0}, 5)[0], d);
  const auto a = Split(d, {0.5, 0.5}, 5);
  const auto b = Split(d, {0.5, 0.5}, 5);
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(a[1], b[1]);
  EXPECT_FALSE(Split(d, {0.5, 0.5}, 6)[0] == a[0]);
}

TEST(SplitTest, RejectsBadFractions) {
  const GranularDataset d = SampleDataset();
  EXPECT_THROW(Split(d, {1.5, -0.5}, 0), Error);
  EXPECT_THROW(Split(d, {0.5, 0.4}, 0), Error);
  EXPECT_THROW(Split(d, {}, 0), Error);
}

TEST(SyntheticTest, EmptyAndInvalidSpecs) {
  SyntheticSpec spec;
  spec.num_rows = 0;
  EXPECT_EQ(GenerateSynthetic(spec).dataset.num_rows(), 0u);
  spec.cardinalities = {8, 1, 12, 6, 15};
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec.cardinalities = {8, 10};
  EXPECT_THROW(GenerateSynthetic(spec), Error);
}

TEST(SyntheticTest, PositiveRateNearBaseRate) {
  SyntheticSpec spec;
  spec.num_features = 3;
  spec.cardinalities = {5, 5, 5};
  spec.num_rows = 100000;
  spec.base_rate = 0.1;
  spec.seed = 9;
  const SyntheticData s = GenerateSynthetic(spec);
  const auto y = s.dataset.Labels(LabelKind::kClick);
  const double rate = PairwiseSum(y) / y.size();
  EXPECT_GE(rate, 0.08);
  EXPECT_LE(rate, 0.12);
  const auto sales = s.dataset.Labels(LabelKind::kSale);
  EXPECT_NEAR(PairwiseSum(sales) / sales.size(), spec.sale_rate, 0.002);
}

TEST(SyntheticTest, Deterministic) {
  EXPECT_EQ(testing::SmallSynthetic(500, 8).dataset,
            testing::SmallSynthetic(500, 8).dataset);
  EXPECT_FALSE(testing::SmallSynthetic(500, 8).dataset ==
               testing::SmallSynthetic(500, 9).dataset);
}

TEST(SyntheticTest, ZipfMarginalsAreSkewed) {
  SyntheticSpec spec;
  spec.num_rows = 20000;
  spec.marginal_skew = {1.5};
  const GranularDataset d = GenerateSynthetic(spec).dataset;
  std::vector<size_t> counts(spec.cardinalities[0], 0);
  for (size_t r = 0; r < d.num_rows(); ++r) ++counts[d.features(r)[0]];
  for (size_t m = 1; m < counts.size(); ++m) {
    EXPECT_GT(counts[m - 1], counts[m]);
  }
}

// Without signal, even a model trained on all labels cannot beat the mean.
TEST(SyntheticTest, ZeroDensityHasNoSignal) {
  SyntheticSpec spec;
  spec.true_weight_density = 0.0;
  spec.num_rows = 60000;
  spec.seed = 4;
  const GranularDataset d = GenerateSynthetic(spec).dataset;
  const auto clicks = d.Labels(LabelKind::kClick);
  double rate = 0;
  for (double y : clicks) rate += y;
  rate /= clicks.size();
  // Every modality shows the global click rate up to sampling error.
  for (size_t f = 0; f < d.num_features(); ++f) {
    std::vector<double> n(d.schema().cardinality(f)), c(n.size());
    for (size_t r = 0; r < d.num_rows(); ++r) {
      n[d.features(r)[f]] += 1;
      c[d.features(r)[f]] += clicks[r];
    }
    for (size_t m = 0; m < n.size(); ++m) {
      if (n[m] < 100) continue;
      EXPECT_NEAR(c[m] / n[m], rate,
                  4.5 * std::sqrt(rate * (1 - rate) / n[m]))
          << "feature " << f << " modality " << m;
    }
  }
}

}  // namespace
}  // namespace aggdp
