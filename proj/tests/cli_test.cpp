/*
 * Copyright 2026 The GroupShap Authors.
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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "pipeline.hpp"
#include "support.hpp"

namespace gshap::cli {
namespace {

using gshap::testing::ReadFile;
using gshap::testing::RunCli;
using gshap::testing::RunPipeline;
using gshap::testing::TempDir;

TEST(Cli, VersionFlag) {
  const auto r = RunCli({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(kVersion), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(RunCli({}).code, 1);
  EXPECT_EQ(RunCli({"frobnicate"}).code, 1);
  EXPECT_EQ(RunCli({"train", "--bogus"}).code, 1);
  EXPECT_EQ(RunCli({"train", "--config", "/nonexistent/run.json"}).code, 1);
  EXPECT_EQ(RunCli({"train", "--seed", "abc"}).code, 1);
}

TEST(Cli, UnknownConfigKeyIsUsageError) {
  TempDir dir;
  { std::ofstream(dir.path() / "bad.json") << R"({"train": {"epochs": 1}, "epochz": 3})"; }
  const auto r = RunCli({"evaluate", "--config", (dir.path() / "bad.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("epochz"), std::string::npos);
}

TEST(Cli, MissingDataIsDataError) {
  TempDir dir;
  { std::ofstream(dir.path() / "run.json") << R"({"data": {"prices": "/nonexistent/prices.csv"}})"; }
  const auto r = RunCli({"ingest", "--config", (dir.path() / "run.json").string(), "--out",
                         (dir.path() / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DivergenceIsNumericalFailure) {
  TempDir dir;
  ASSERT_EQ(RunCli({"synth", "--out", dir.path().string()}).code, 0);
  const auto prev = std::filesystem::current_path();
  std::filesystem::current_path(dir.path());
  auto cfg = nlohmann::json::parse(gshap::testing::kTinyRunConfig);
  cfg["train"]["learning_rate"] = 1e300;
  cfg["train"]["weight_decay"] = 0.0;
  { std::ofstream("run.json") << cfg.dump(); }
  const auto r = RunCli({"train", "--config", "run.json", "--out", "."});
  std::filesystem::current_path(prev);
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, PipelineIsDeterministic) {
  TempDir a, b, c;
  const auto ra = RunPipeline(a.path(), 17);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const auto rb = RunPipeline(b.path(), 17);
  ASSERT_EQ(rb.code, 0) << rb.err;
  for (const auto& name : gshap::testing::kTimingFreeReports) {
    ASSERT_TRUE(std::filesystem::exists(a.path() / name)) << name;
    EXPECT_EQ(ReadFile(a.path() / name), ReadFile(b.path() / name)) << name;
  }
  ASSERT_EQ(RunPipeline(c.path(), 18).code, 0);
  EXPECT_NE(ReadFile(a.path() / "prices.csv"), ReadFile(c.path() / "prices.csv"));
}

TEST(Cli, ReportsCarryProvenance) {
  TempDir dir;
  ASSERT_EQ(RunPipeline(dir.path(), 3).code, 0);
  const auto table = ReadFile(dir.path() / "table3.csv");
  EXPECT_EQ(table.rfind("# gshap evaluate " + std::string(kVersion), 0), 0u);
  EXPECT_NE(table.find("# seed: 3\n"), std::string::npos);
  EXPECT_NE(table.find("\nyear,hv_pct,tech_mae,tech_rmse,tech_mape,tech_r2,full_mae,full_rmse,full_mape,full_r2\n"),
            std::string::npos);
  const auto ingest = nlohmann::json::parse(ReadFile(dir.path() / "ingest.json"));
  EXPECT_EQ(ingest["provenance"]["seed"], 3);
  std::ifstream in(dir.path() / "attributions.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_LT(j["efficiency_residual"].get<double>(), 1e-8);
    ++lines;
  }
  EXPECT_EQ(lines, 3);
}

TEST(Cli, SensitivityAndBenchReports) {
  TempDir dir;
  ASSERT_EQ(RunPipeline(dir.path(), 4).code, 0);
  const auto prev = std::filesystem::current_path();
  std::filesystem::current_path(dir.path());
  const auto s = RunCli({"sensitivity", "--config", "run.json", "--seed", "4", "--out", "."});
  const auto b = RunCli({"bench-shap", "--config", "run.json", "--seed", "4", "--out", "."});
  std::filesystem::current_path(prev);
  ASSERT_EQ(s.code, 0) << s.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto table1 = ReadFile(dir.path() / "table1.csv");
  EXPECT_NE(table1.find("\nn_groups,mae,rmse,r2,chosen\n1,"), std::string::npos);
  const auto bench = nlohmann::json::parse(ReadFile(dir.path() / "bench.json"));
  EXPECT_TRUE(bench.contains("provenance"));
}

}  // namespace
}  // namespace gshap::cli
