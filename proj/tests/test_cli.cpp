// tests/test_cli.cpp

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

const std::string kCli = AVFUSION_CLI;
const std::string kSmoke = std::string(AVFUSION_SOURCE_DIR) + "/configs/smoke.json";

int run(const std::string& args) {
  const std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("avfusion_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("sweep"), 2);
  EXPECT_EQ(run("sweep --config /nonexistent/config.json"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch("config");
  EXPECT_EQ(run("sweep --config '" + write_config(dir, R"({"bogus": true})").string() + "'"), 2);
  EXPECT_EQ(run("sweep --config '" + write_config(dir, R"({"strategies": ["telepathy"]})").string() + "'"), 2);
  EXPECT_EQ(run("sweep --config '" + write_config(dir, "{ not json").string() + "'"), 2);
  EXPECT_EQ(run("fuse --config '" + kSmoke + "' --out '" + dir.string() + "' --strategy telepathy"), 2);
  fs::remove_all(dir);
}

TEST(Cli, MissingArtifactsExitOne) {
  const auto dir = scratch("missing");
  const std::string common = " --config '" + kSmoke + "' --out '" + dir.string() + "'";
  EXPECT_EQ(run("extract" + common), 1);
  EXPECT_EQ(run("train" + common), 1);
  EXPECT_EQ(run("decode" + common), 1);
  EXPECT_EQ(run("report" + common), 1);
  fs::remove_all(dir);
}

TEST(Cli, StagedPipeline) {
  const auto dir = scratch("staged");
  const std::string common = " --config '" + kSmoke + "' --out '" + dir.string() + "'";
  for (const char* stage : {"synth", "extract --model-based", "train", "fuse", "decode", "evaluate", "report"})
    ASSERT_EQ(run(std::string(stage) + common), 0) << stage;
  const auto seed = dir / "seed_1";
  EXPECT_TRUE(fs::exists(seed / "corpus.json"));
  EXPECT_TRUE(fs::exists(seed / "features.json"));
  EXPECT_TRUE(fs::is_directory(seed / "model_based"));
  EXPECT_TRUE(fs::exists(seed / "models" / "training.json"));
  EXPECT_TRUE(fs::exists(seed / "decoded" / "dfn-blstm.json"));
  EXPECT_TRUE(fs::exists(seed / "evaluation.json"));
  const auto csv = slurp(dir / "results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "strategy,-6,0,6,clean,avg");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
  EXPECT_TRUE(fs::exists(dir / "wer_vs_snr.csv"));
  EXPECT_TRUE(fs::exists(dir / "results.json"));
  // a single strategy can be re-decoded without touching the others
  EXPECT_EQ(run("decode --strategy ao --snr clean" + common), 0);
  fs::remove_all(dir);
}

TEST(Cli, SweepIsReproducible) {
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  ASSERT_EQ(run("sweep --config '" + kSmoke + "' --out '" + a.string() + "' --threads 1"), 0);
  ASSERT_EQ(run("sweep --config '" + kSmoke + "' --out '" + b.string() + "' --threads 2"), 0);
  for (const char* f : {"results.csv", "wer_vs_snr.csv", "results.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}
