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

#include "aggdp/evaluation.h"

#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace aggdp {
namespace {

const std::vector<double> kLabels = {0, 1, 0, 0, 1, 0, 0, 0};

TEST(LogLossTest, KnownValues) {
  EXPECT_DOUBLE_EQ(LogLoss(std::vector<double>{0.5, 0.5},
                           std::vector<double>{0, 1}),
                   std::log(2.0));
  EXPECT_DOUBLE_EQ(LogLoss(std::vector<double>{0.8}, std::vector<double>{1}),
                   -std::log(0.8));
  EXPECT_THROW(LogLoss(std::vector<double>{0.5}, std::vector<double>{1, 0}),
               Error);
}

TEST(LogLossTest, ClippingKeepsLossFinite) {
  const double l =
      LogLoss(std::vector<double>{0.0, 1.0}, std::vector<double>{1, 0});
  EXPECT_NEAR(l, -std::log(1e-7), 1e-9);
  EXPECT_NEAR(LogLoss(std::vector<double>{0.0}, std::vector<double>{1}, 1e-3),
              -std::log(1e-3), 1e-12);
}

TEST(EntropyTest, Values) {
  EXPECT_DOUBLE_EQ(BinaryEntropy(0.5), std::log(2.0));
  EXPECT_EQ(BinaryEntropy(0.0), 0.0);
  EXPECT_EQ(BinaryEntropy(1.0), 0.0);
  EXPECT_DOUBLE_EQ(LabelEntropy(kLabels), BinaryEntropy(0.25));
}

TEST(NceTest, Identities) {
  const std::vector<double> perfect(kLabels.begin(), kLabels.end());
  EXPECT_NEAR(Nce(perfect, kLabels).nce, 1.0, 1e-6);
  const std::vector<double> mean(kLabels.size(), 0.25);
  EXPECT_NEAR(Nce(mean, kLabels).nce, 0.0, 1e-12);
  const std::vector<double> worse(kLabels.size(), 0.9);
  EXPECT_LT(Nce(worse, kLabels).nce, 0.0);
  const EvalResult r = Nce(mean, kLabels);
  EXPECT_EQ(r.num_samples, kLabels.size());
  EXPECT_DOUBLE_EQ(r.nce, (r.entropy - r.log_loss) / r.entropy);
}

TEST(NceTest, UndefinedForSingleClass) {
  const std::vector<double> ones(4, 1.0);
  EXPECT_THROW(Nce(ones, ones), Error);
}

TEST(SkylineDegradationTest, Sign) {
  EXPECT_DOUBLE_EQ(SkylineDegradation(0.5, 0.5), 0.0);
  EXPECT_NEAR(SkylineDegradation(0.55, 0.5), -10.0, 1e-12);
  EXPECT_GT(SkylineDegradation(0.45, 0.5), 0.0);
  EXPECT_THROW(SkylineDegradation(0.5, 0.0), Error);
}

TEST(BootstrapTest, IdenticalPredictions) {
  const std::vector<double> p(kLabels.size(), 0.3);
  const BootstrapResult r = BootstrapCompare(p, p, kLabels, 200, 1);
  EXPECT_EQ(r.mean_delta, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(BootstrapTest, DetectsClearDifference) {
  std::vector<double> labels, good, bad;
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double y = rng.Uniform() < 0.3 ? 1 : 0;
    labels.push_back(y);
    good.push_back(y ? 0.7 : 0.2);
    bad.push_back(0.3);
  }
  const BootstrapResult r = BootstrapCompare(good, bad, labels, 500, 7);
  EXPECT_LT(r.mean_delta, 0.0);
  EXPECT_LT(r.p_value, 0.01);
  const BootstrapResult again = BootstrapCompare(good, bad, labels, 500, 7);
  EXPECT_EQ(r.mean_delta, again.mean_delta);
}

TEST(BootstrapTest, RejectsFewResamples) {
  const std::vector<double> p(kLabels.size(), 0.3);
  EXPECT_THROW(BootstrapCompare(p, p, kLabels, 99, 0), Error);
}

TEST(FormatEvalCsvTest, Layout) {
  const std::vector<double> mean(kLabels.size(), 0.25);
  const std::string csv = FormatEvalCsv(Nce(mean, kLabels));
  EXPECT_EQ(csv.substr(0, 22), "metric,value\nlog_loss,");
  EXPECT_NE(csv.find("\nnum_samples,8\n"), std::string::npos);
}

}  // namespace
}  // namespace aggdp
