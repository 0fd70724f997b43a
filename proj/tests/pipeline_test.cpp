// Copyright 2026 The CtxBugGen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctxbug/pipeline.hpp"

#include <gtest/gtest.h>
#include <stdio.h>
#include <sys/wait.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace ctxbug::pipeline {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing::MakeTempDir("ctxbug-pipeline"); }
  void TearDown() override { fs::remove_all(dir_); }

  PipelineConfig Config(const std::string& name) const {
    PipelineConfig config;
    config.corpus = testing::FixturePath("mini_corpus.jsonl");
    config.out = dir_ / name;
    config.rules = {2, 4, 8};
    config.models = {"stub"};
    config.stub = true;
    config.jobs = 2;
    config.timeout = std::chrono::seconds(20);
    config.shim_command = testing::MockShim().command;
    return config;
  }

  fs::path dir_;
};

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::map<std::string, std::string> DirectoryBytes(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    files[entry.path().filename().string()] = ReadBytes(entry.path());
  }
  return files;
}

std::size_t LineCount(const fs::path& path) {
  std::string bytes = ReadBytes(path);
  return static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n'));
}

TEST_F(PipelineTest, StubRunCompletesEveryStageAndEmitsAReport) {
  std::ostringstream log;
  auto results = RunAll(Config("run"), log);
  ASSERT_EQ(results.size(), AllStages().size());
  for (const auto& r : results) {
    EXPECT_EQ(r.ExitCode(), kExitOk) << StageName(r.stage) << "\n" << log.str();
    EXPECT_FALSE(r.up_to_date);
  }
  const fs::path out = dir_ / "run";
  for (std::string_view name :
       {artifacts::kTemplates, artifacts::kPrompts, artifacts::kGenerations,
        artifacts::kCtxBugs, artifacts::kWithoutCtxBugs, artifacts::kIsoBugs,
        artifacts::kEvalRecords}) {
    EXPECT_GT(LineCount(out / name), 0u) << name;
  }
  std::string report = ReadBytes(out / artifacts::kReportCsv);
  EXPECT_EQ(report.rfind("model,task,setting,cases,pass_at_1,", 0), 0u);
  EXPECT_NE(report.find("stub,All,with_ctxbugs,"), std::string::npos);
  EXPECT_NE(report.find("stub,All,without_ctxbugs,"), std::string::npos);
  auto json = nlohmann::json::parse(ReadBytes(out / artifacts::kReportJson));
  EXPECT_FALSE(json.at("rows").empty());

  auto manifest = nlohmann::json::parse(ReadBytes(out / ManifestName(Stage::kPerturb)));
  EXPECT_EQ(manifest.at("stage"), "perturb");
  EXPECT_TRUE(manifest.at("inputs").contains("corpus"));
  EXPECT_EQ(manifest.at("counts").at("templates"), LineCount(out / artifacts::kTemplates));
}

TEST_F(PipelineTest, IdenticalConfigurationsProduceIdenticalBytes) {
  std::ostringstream log;
  RunAll(Config("a"), log);
  RunAll(Config("b"), log);
  auto first = DirectoryBytes(dir_ / "a");
  auto second = DirectoryBytes(dir_ / "b");
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) {
    EXPECT_TRUE(second.at(name) == bytes) << name;
  }
}

TEST_F(PipelineTest, RerunWithUnchangedInputsIsUpToDate) {
  std::ostringstream log;
  PipelineConfig config = Config("rerun");
  RunStage(Stage::kPerturb, config, log);
  auto stamp = fs::last_write_time(config.out / artifacts::kTemplates);

  std::ostringstream second;
  StageResult again = RunStage(Stage::kPerturb, config, second);
  EXPECT_TRUE(again.up_to_date);
  EXPECT_NE(second.str().find("perturb: up-to-date"), std::string::npos);
  EXPECT_EQ(fs::last_write_time(config.out / artifacts::kTemplates), stamp);

  config.rules = {4};
  EXPECT_FALSE(RunStage(Stage::kPerturb, config, log).up_to_date);
}

TEST_F(PipelineTest, TamperedArtifactIsRegenerated) {
  std::ostringstream log;
  PipelineConfig config = Config("tamper");
  RunStage(Stage::kPerturb, config, log);
  std::string original = ReadBytes(config.out / artifacts::kTemplates);
  std::ofstream(config.out / artifacts::kTemplates, std::ios::app) << "\n";
  EXPECT_FALSE(RunStage(Stage::kPerturb, config, log).up_to_date);
  EXPECT_EQ(ReadBytes(config.out / artifacts::kTemplates), original);
}

TEST_F(PipelineTest, MissingPredecessorNamesThePerturbStage) {
  std::ostringstream log;
  PipelineConfig config = Config("missing");
  try {
    RunStage(Stage::kGenerate, config, log);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("perturb"), std::string::npos) << e.what();
  }
}

TEST_F(PipelineTest, BrokenShimIsReportedAsPerItemFailures) {
  std::ostringstream log;
  PipelineConfig config = Config("broken");
  config.rules = {4};
  for (Stage stage : {Stage::kPerturb, Stage::kObfuscate, Stage::kGenerate}) {
    RunStage(stage, config, log);
  }
  config.shim_command = {(dir_ / "no-such-shim").string()};
  StageResult identify = RunStage(Stage::kIdentify, config, log);
  EXPECT_GT(identify.failures, 0);
  EXPECT_EQ(identify.ExitCode(), kExitItemFailures);
  EXPECT_GT(LineCount(config.out / "identify_failures.jsonl"), 0u);
}

TEST_F(PipelineTest, ConfigurationIsValidated) {
  PipelineConfig config = Config("invalid");
  config.rules = {11};
  EXPECT_THROW(config.Validate(), std::invalid_argument);
  config = Config("invalid");
  config.jobs = 0;
  EXPECT_THROW(config.Validate(), std::invalid_argument);
  EXPECT_EQ(StageFromName("identify"), Stage::kIdentify);
  EXPECT_THROW(StageFromName("deploy"), std::invalid_argument);
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult RunCommand(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  char buffer[4096];
  while (std::size_t n = fread(buffer, 1, sizeof buffer, pipe)) result.output.append(buffer, n);
  int status = pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

TEST_F(PipelineTest, CommandLineExitCodes) {
  const std::string cli = CTXBUG_CLI;
  const std::string corpus = testing::FixturePath("mini_corpus.jsonl").string();
  const std::string out = (dir_ / "cli").string();

  CommandResult missing =
      RunCommand(cli + " generate --stub --corpus " + corpus + " --out " + out);
  EXPECT_EQ(missing.exit_code, kExitStageFailure);
  EXPECT_NE(missing.output.find("perturb"), std::string::npos) << missing.output;

  CommandResult perturb =
      RunCommand(cli + " perturb --rules 4 --corpus " + corpus + " --out " + out);
  EXPECT_EQ(perturb.exit_code, kExitOk) << perturb.output;
  CommandResult again =
      RunCommand(cli + " perturb --rules 4 --corpus " + corpus + " --out " + out);
  EXPECT_EQ(again.exit_code, kExitOk);
  EXPECT_NE(again.output.find("up-to-date"), std::string::npos) << again.output;

  CommandResult valid = RunCommand(cli + " validate-corpus --corpus " + corpus);
  EXPECT_EQ(valid.exit_code, kExitOk) << valid.output;
}

}  // namespace
}  // namespace ctxbug::pipeline
