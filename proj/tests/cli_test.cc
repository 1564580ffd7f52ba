/*
 * Copyright 2026 The djack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(DJACK_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  Outcome out;
  if (pipe == nullptr) return out;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) out.output += buf;
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json report(const fs::path& dir) {
  return nlohmann::json::parse(slurp(dir / "report.json"));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("djack_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string fixture() const {
    return std::string(DJACK_FIXTURE_DIR) + "/small.csv";
  }

  fs::path dir_;
};

TEST_F(CliTest, RunOnFixtureWithinBudget) {
  const auto start = std::chrono::steady_clock::now();
  const Outcome o = run("run --data " + fixture() + " --out " + (dir_ / "a").string());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_LT(seconds, 60.0);
  const auto j = report(dir_ / "a");
  EXPECT_TRUE(j["dj"].contains("coverage"));
  EXPECT_TRUE(j["naive"].contains("coverage"));
  EXPECT_EQ(j["dj"]["n_train"], 40);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "intervals.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "config.ini"));
}

TEST_F(CliTest, WiderAlphaGivesNarrowerIntervals) {
  const std::string common = "run --data " + fixture() + " --hidden 10 --out ";
  ASSERT_EQ(run(common + (dir_ / "a1").string() + " --alpha 0.1").code, 0);
  ASSERT_EQ(run(common + (dir_ / "a5").string() + " --alpha 0.5").code, 0);
  EXPECT_LE(report(dir_ / "a5")["dj"]["mean_width"].get<double>(),
            report(dir_ / "a1")["dj"]["mean_width"].get<double>());
}

TEST_F(CliTest, MissingFileExitsTwoNamingThePath) {
  const Outcome o = run("run --data " + (dir_ / "nope.csv").string() + " --out " +
                        (dir_ / "x").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("nope.csv"), std::string::npos) << o.output;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("synth --bogus 1").code, 2);
  EXPECT_EQ(run("synth --data x.csv --out " + (dir_ / "x").string()).code, 2);
  EXPECT_EQ(run("synth --alpha 1.5 --out " + (dir_ / "x").string()).code, 2);
  EXPECT_EQ(run("sweep --param depth --values 1 --out " + (dir_ / "x").string()).code, 2);
  EXPECT_EQ(run("oracle-check --n 500 --out " + (dir_ / "x").string()).code, 2);
  std::ofstream(dir_ / "bad.ini") << "n = 10\nwhatever = 3\n";
  EXPECT_EQ(run("synth --config " + (dir_ / "bad.ini").string()).code, 2);
}

TEST_F(CliTest, SynthIsDeterministicAndReproducibleFromConfig) {
  const std::string args = " --n 30 --n-test 20 --hidden 8 --epochs 100 --seed 3";
  ASSERT_EQ(run("synth --out " + (dir_ / "a").string() + args).code, 0);
  ASSERT_EQ(run("synth --out " + (dir_ / "b").string() + args).code, 0);
  const std::string first = slurp(dir_ / "a" / "report.json");
  EXPECT_EQ(first, slurp(dir_ / "b" / "report.json"));
  ASSERT_EQ(run("synth --config " + (dir_ / "a" / "config.ini").string() + " --out " +
                (dir_ / "c").string())
                .code,
            0);
  EXPECT_EQ(first, slurp(dir_ / "c" / "report.json"));
  for (const char* name : {"intervals.csv", "band.csv", "train.csv", "plot.svg",
                           "ensemble.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / name)) << name;
  }
}

TEST_F(CliTest, SweepWritesTable) {
  const Outcome o = run("sweep --param alpha --values 0.5,0.1 --seeds 1 --n 30 "
                        "--n-test 20 --hidden 8 --epochs 100 --out " +
                        (dir_ / "s").string());
  ASSERT_EQ(o.code, 0) << o.output;
  const std::string csv = slurp(dir_ / "s" / "sweep.csv");
  EXPECT_EQ(csv.rfind("param,value,seeds,mean_width,coverage,naive_width,vacuous", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep.svg"));
}

TEST_F(CliTest, OracleCheckWritesReport) {
  const Outcome o = run("oracle-check --n 20 --hidden 4 --l2 1 --epochs 300 "
                        "--polish-steps 30 --ridge-n 50 --out " +
                        (dir_ / "o").string());
  ASSERT_TRUE(o.code == 0 || o.code == 1) << o.output;
  const auto j = nlohmann::json::parse(slurp(dir_ / "o" / "oracle.json"));
  EXPECT_TRUE(j.contains("ridge"));
}

}  // namespace
