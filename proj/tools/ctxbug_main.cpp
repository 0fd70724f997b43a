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

// Command-line driver for the CtxBug generation and evaluation pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctxbug/pipeline.hpp"

namespace {

using ctxbug::pipeline::PipelineConfig;
using ctxbug::pipeline::Stage;

// Splits a shim command on whitespace. Words naming existing files become
// absolute, since the shim runs inside a private working directory.
std::vector<std::string> SplitWords(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> words;
  for (std::string word; in >> word;) {
    std::error_code ec;
    if (word.find('/') != std::string::npos && std::filesystem::exists(word, ec)) {
      word = std::filesystem::absolute(word).lexically_normal().string();
    }
    words.push_back(word);
  }
  return words;
}

struct Flags {
  std::string corpus;
  std::string out = "ctxbug-out";
  std::vector<int> rules = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> models = {"stub"};
  bool stub = false;
  std::string stub_table;
  std::string endpoint;
  int max_tokens = 2048;
  int concurrency = 4;
  int timeout = 30;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string shim;

  PipelineConfig Config() const {
    PipelineConfig config;
    config.corpus = corpus;
    config.out = out;
    config.rules = rules;
    config.models = models;
    config.stub = stub;
    config.stub_table = stub_table;
    config.endpoint = endpoint;
    config.max_output_tokens = max_tokens;
    config.concurrency = concurrency;
    config.timeout = std::chrono::seconds(timeout);
    config.jobs = jobs;
    config.seed = seed;
    config.shim_command = SplitWords(shim);
    return config;
  }
};

void AddPipelineFlags(CLI::App& app, Flags& flags) {
  app.add_option("--corpus", flags.corpus, "Corpus JSONL file")->required();
  app.add_option("--out", flags.out, "Artifact directory")->capture_default_str();
  app.add_option("--rules", flags.rules, "Comma-separated rule ids")
      ->delimiter(',')
      ->check(CLI::Range(1, 10));
  app.add_option("--models", flags.models, "Comma-separated model ids")->delimiter(',');
  app.add_flag("--stub", flags.stub, "Use the deterministic offline backend");
  app.add_option("--stub-table", flags.stub_table, "JSON map of prompt hash to response");
  app.add_option("--endpoint", flags.endpoint, "Chat-completions base URL");
  app.add_option("--max-tokens", flags.max_tokens, "Maximum output tokens")
      ->capture_default_str();
  app.add_option("--concurrency", flags.concurrency, "In-flight requests per model")
      ->capture_default_str();
  app.add_option("--timeout", flags.timeout, "Per-run test timeout in seconds")
      ->capture_default_str();
  app.add_option("--jobs", flags.jobs, "Worker threads")->capture_default_str();
  app.add_option("--seed", flags.seed, "Seed for the offline backend")->capture_default_str();
  app.add_option("--shim", flags.shim, "Test shim command; defaults to $CTXBUG_SHIM");
}

int RunStages(const std::vector<Stage>& stages, const Flags& flags) {
  PipelineConfig config = flags.Config();
  if (config.shim_command.empty()) {
    if (const char* env = std::getenv("CTXBUG_SHIM")) config.shim_command = SplitWords(env);
  }
  int exit_code = ctxbug::pipeline::kExitOk;
  try {
    for (Stage stage : stages) {
      auto result = ctxbug::pipeline::RunStage(stage, config, std::cerr);
      if (result.ExitCode() != ctxbug::pipeline::kExitOk) exit_code = result.ExitCode();
    }
  } catch (const ctxbug::pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ctxbug::pipeline::kExitStageFailure;
  }
  if (exit_code == ctxbug::pipeline::kExitItemFailures) {
    std::cerr << "completed with per-item failures; see *_failures.jsonl\n";
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate, validate, and evaluate context adaptation bugs"};
  app.require_subcommand(1);

  Flags flags;
  int exit_code = 0;
  for (Stage stage : ctxbug::pipeline::AllStages()) {
    std::string name(ctxbug::pipeline::StageName(stage));
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " stage");
    AddPipelineFlags(*sub, flags);
    sub->callback([&, stage] { exit_code = RunStages({stage}, flags); });
  }
  CLI::App* all = app.add_subcommand("run", "Run every stage in order");
  AddPipelineFlags(*all, flags);
  all->callback([&] { exit_code = RunStages(ctxbug::pipeline::AllStages(), flags); });

  std::string corpus;
  CLI::App* validate = app.add_subcommand("validate-corpus", "Check a corpus file");
  validate->add_option("--corpus", corpus, "Corpus JSONL file")->required();
  validate->callback(
      [&] { exit_code = ctxbug::pipeline::ValidateCorpus(corpus, std::cout); });

  std::string release;
  std::string corpus_out;
  CLI::App* convert =
      app.add_subcommand("convert-classeval", "Convert a ClassEval JSON release");
  convert->add_option("release", release, "ClassEval JSON file")->required();
  convert->add_option("corpus", corpus_out, "Output corpus JSONL file")->required();
  convert->callback(
      [&] { exit_code = ctxbug::pipeline::ConvertClassEval(release, corpus_out, std::cout); });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
