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

#ifndef CTXBUG_PIPELINE_HPP_
#define CTXBUG_PIPELINE_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

// Stage driver with flat JSONL artifacts and content-hash manifests.
namespace ctxbug::pipeline {

enum class Stage { kPerturb, kObfuscate, kGenerate, kIdentify, kBaseline, kEvaluate, kReport };
std::string_view StageName(Stage stage);
Stage StageFromName(std::string_view name);
const std::vector<Stage>& AllStages();

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitItemFailures = 3;

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  std::string grammar = "python";
  std::vector<int> rules = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> models = {"stub"};
  bool stub = false;
  std::filesystem::path stub_table;
  std::string endpoint;  // empty means CTXBUG_API_BASE
  int max_output_tokens = 2048;
  int concurrency = 4;
  std::chrono::seconds timeout{30};
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> shim_command;

  // Throws std::invalid_argument on an unusable configuration.
  void Validate() const;
};

// A stage that could not run at all: missing predecessor artifacts,
// unreadable corpus, bad configuration.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageResult {
  Stage stage = Stage::kPerturb;
  bool up_to_date = false;
  int items = 0;
  int failures = 0;

  int ExitCode() const { return failures > 0 ? kExitItemFailures : kExitOk; }
};

// Runs one stage. Rerunning with unchanged inputs and configuration
// leaves the artifacts untouched and reports up_to_date.
StageResult RunStage(Stage stage, const PipelineConfig& config, std::ostream& log);

// Every stage in order. Throws StageError from the first failing stage.
std::vector<StageResult> RunAll(const PipelineConfig& config, std::ostream& log);

// Prints corpus diagnostics; returns kExitStageFailure when any record
// was rejected.
int ValidateCorpus(const std::filesystem::path& corpus, std::ostream& log);

// Converts a ClassEval JSON release into a corpus JSONL file.
int ConvertClassEval(const std::filesystem::path& release,
                     const std::filesystem::path& corpus_out, std::ostream& log);

// Artifact file names, relative to the output directory.
namespace artifacts {
inline constexpr std::string_view kTemplates = "templates.jsonl";
inline constexpr std::string_view kPrompts = "prompts.jsonl";
inline constexpr std::string_view kGenerations = "generations.jsonl";
inline constexpr std::string_view kClassifications = "classifications.jsonl";
inline constexpr std::string_view kCtxBugs = "ctxbugs.jsonl";
inline constexpr std::string_view kCtxBugStats = "ctxbug_stats.csv";
inline constexpr std::string_view kFunnel = "funnel.csv";
inline constexpr std::string_view kWithoutCtxBugs = "without_ctxbugs.jsonl";
inline constexpr std::string_view kIsoBugAttempts = "isobug_attempts.jsonl";
inline constexpr std::string_view kIsoBugs = "isobugs.jsonl";
inline constexpr std::string_view kBenchmarkStats = "benchmark_stats.csv";
inline constexpr std::string_view kEvalRecords = "eval_records.jsonl";
inline constexpr std::string_view kReportCsv = "report.csv";
inline constexpr std::string_view kReportJson = "report.json";
inline constexpr std::string_view kReportByGenerator = "report_by_generator.csv";
}  // namespace artifacts

// Manifest file for a stage, e.g. "perturb.manifest.json".
std::string ManifestName(Stage stage);

}  // namespace ctxbug::pipeline

#endif  // CTXBUG_PIPELINE_HPP_
