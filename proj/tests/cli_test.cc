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

// End-to-end checks of the command-line tool.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aggdp/common.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace aggdp {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir(
        ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return dir_ + "/" + name; }

  // Runs the tool and returns its exit code; stderr lands in err.txt.
  int Run(const std::string& args) const {
    const std::string cmd = std::string(AGGDP_CLI_PATH) + " " + args +
                            " >" + Path("out.txt") + " 2>" + Path("err.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string Slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void Generate(const std::string& name, int rows, int seed) const {
    ASSERT_EQ(Run("generate --features 3 --cardinalities 4,5,6 --rows " +
                  std::to_string(rows) + " --seed " + std::to_string(seed) +
                  " --out " + Path(name)),
              0)
        << Slurp(Path("err.txt"));
  }

  std::string dir_;
};

TEST_F(CliTest, FullPipeline) {
  Generate("data.csv", 20000, 1);
  ASSERT_EQ(Run("split --input " + Path("data.csv") +
                " --fractions 0.8,0.1,0.1 --seed 3 --out-dir " + Path("s")),
            0);
  for (const char* part : {"part_0.csv", "part_1.csv", "part_2.csv"}) {
    EXPECT_TRUE(fs::exists(Path(std::string("s/") + part)));
  }
  ASSERT_EQ(Run("aggregate --input " + Path("s/part_0.csv") +
                " --sigma 5 --threshold 10 --seed 2 --out-dir " + Path("r")),
            0)
      << Slurp(Path("err.txt"));
  for (const char* f : {"report.csv", "report.meta", "vocab.csv", "run.conf"}) {
    EXPECT_TRUE(fs::exists(Path(std::string("r/") + f))) << f;
  }
  EXPECT_EQ(Slurp(Path("r/run.conf")).rfind("command=aggregate\n", 0), 0u);

  ASSERT_EQ(Run("train --method agglogistic --report " + Path("r/report.csv") +
                " --unlabeled " + Path("s/part_1.csv") +
                " --l2 16 --out-dir " + Path("m")),
            0)
      << Slurp(Path("err.txt"));
  EXPECT_TRUE(fs::exists(Path("m/train.log.csv")));
  ASSERT_EQ(Run("predict --model " + Path("m/model.bin") + " --input " +
                Path("s/part_2.csv") + " --out " + Path("p.csv")),
            0)
      << Slurp(Path("err.txt"));
  EXPECT_EQ(Slurp(Path("p.csv")).rfind("row_index,probability\n", 0), 0u);
  ASSERT_EQ(Run("evaluate --predictions " + Path("p.csv") + " --labels " +
                Path("s/part_2.csv") + " --out " + Path("e.csv")),
            0)
      << Slurp(Path("err.txt"));
  const std::string eval = Slurp(Path("e.csv"));
  const size_t at = eval.find("\nnce,");
  ASSERT_NE(at, std::string::npos);
  EXPECT_GT(std::stod(eval.substr(at + 5)), 0.0);
}

TEST_F(CliTest, EnrichGridAndSkyline) {
  Generate("raw.csv", 20000, 2);
  Generate("lab.csv", 2000, 3);
  Generate("val.csv", 2000, 4);
  ASSERT_EQ(Run("aggregate --input " + Path("raw.csv") +
                " --epsilon 10 --delta 1e-10 --reparameterize --out-dir " +
                Path("r")),
            0)
      << Slurp(Path("err.txt"));
  const std::string meta = Slurp(Path("r/report.meta"));
  EXPECT_NE(meta.find("reparameterized=1"), std::string::npos) << meta;
  ASSERT_EQ(Run("train --method enrich --report " + Path("r/report.csv") +
                " --labeled " + Path("lab.csv") + " --validation " +
                Path("val.csv") + " --prior-weight 1,100 --out-dir " +
                Path("m")),
            0)
      << Slurp(Path("err.txt"));
  EXPECT_TRUE(fs::exists(Path("m/model_w1.bin")));
  EXPECT_TRUE(fs::exists(Path("m/model_w100.bin")));
  EXPECT_TRUE(fs::exists(Path("m/validation.csv")));
  ASSERT_EQ(Run("predict --model " + Path("m/model.bin") + " --input " +
                Path("val.csv") + " --out " + Path("p.csv")),
            0)
      << Slurp(Path("err.txt"));
  ASSERT_EQ(Run("train --method skyline --labeled " + Path("lab.csv") +
                " --out-dir " + Path("sky")),
            0)
      << Slurp(Path("err.txt"));
  ASSERT_EQ(Run("predict --model " + Path("sky/model.bin") + " --input " +
                Path("val.csv") + " --out " + Path("q.csv")),
            0)
      << Slurp(Path("err.txt"));
  ASSERT_EQ(Run("evaluate --predictions " + Path("p.csv") + " --against " +
                Path("q.csv") + " --bootstrap 200 --labels " +
                Path("val.csv") + " --out " + Path("e.csv")),
            0)
      << Slurp(Path("err.txt"));
  EXPECT_NE(Slurp(Path("e.csv")).find("\nbootstrap_p_value,"),
            std::string::npos);
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
  Generate("raw.csv", 5000, 5);
  for (const char* t : {"1", "4"}) {
    ASSERT_EQ(Run(std::string("--threads ") + t + " aggregate --input " +
                  Path("raw.csv") + " --seed 9 --out-dir " + Path(t)),
              0);
  }
  EXPECT_EQ(Slurp(Path("1/report.csv")), Slurp(Path("4/report.csv")));
}

TEST_F(CliTest, ConfigFileFillsDefaults) {
  Generate("raw.csv", 3000, 6);
  {
    std::ofstream conf(Path("a.conf"));
    conf << "# defaults\nsigma = 0\nthreshold = 0\n";
  }
  ASSERT_EQ(Run("--config " + Path("a.conf") + " aggregate --input " +
                Path("raw.csv") + " --out-dir " + Path("r")),
            0)
      << Slurp(Path("err.txt"));
  const std::string conf = Slurp(Path("r/run.conf"));
  EXPECT_NE(conf.find("\nsigma=0\n"), std::string::npos) << conf;
  EXPECT_NE(conf.find("\nthreshold=0\n"), std::string::npos) << conf;
  // Flags on the command line win over the file.
  ASSERT_EQ(Run("--config " + Path("a.conf") + " aggregate --sigma 2 --input " +
                Path("raw.csv") + " --out-dir " + Path("r2")),
            0);
  EXPECT_NE(Slurp(Path("r2/run.conf")).find("\nsigma=2\n"), std::string::npos);
  {
    std::ofstream conf(Path("b.conf"));
    conf << "no_such_flag=1\n";
  }
  EXPECT_EQ(Run("--config " + Path("b.conf") + " aggregate --input " +
                Path("raw.csv") + " --out-dir " + Path("r3")),
            2);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Run("aggregate --out-dir " + Path("x")), 2);
  EXPECT_EQ(Run("no-such-command"), 2);
  EXPECT_EQ(Run("aggregate --input " + Path("missing.csv") + " --out-dir " +
                Path("x")),
            3);
  {
    std::ofstream bad(Path("bad.csv"));
    bad << "f,click,sale\na,0,0\nb,2,0\n";
  }
  EXPECT_EQ(Run("aggregate --input " + Path("bad.csv") + " --out-dir " +
                Path("x")),
            3);
  EXPECT_NE(Slurp(Path("err.txt")).find("bad.csv:3"), std::string::npos)
      << Slurp(Path("err.txt"));
  EXPECT_EQ(Run("aggregate --input " + Path("bad.csv") + " --epsilon 1 " +
                "--out-dir " + Path("x")),
            2);
}

TEST_F(CliTest, SweepWritesCsv) {
  ASSERT_EQ(Run("sweep --kind noise --grid 0,100 --features 3 "
                "--cardinalities 4,5,6 --raw-rows 20000 --labeled-rows 1000 "
                "--fresh-rows 2000 --test-rows 2000 --l2-grid 4 "
                "--prior-weights 10 --enrich-iterations 50 --out-dir " +
                Path("sw")),
            0)
      << Slurp(Path("err.txt"));
  const std::string csv = Slurp(Path("sw/sweep.csv"));
  EXPECT_EQ(csv.rfind("sweep_param,value,method,seed,l2,log_loss,nce,error\n",
                      0),
            0u);
  EXPECT_NE(csv.find("agglogistic-best"), std::string::npos);
  EXPECT_NE(csv.find("enrich-best"), std::string::npos);
}

}  // namespace
}  // namespace aggdp
