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

#ifndef CTXBUG_LLM_HPP_
#define CTXBUG_LLM_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

// Prompt construction and text-generation backends.
namespace ctxbug::llm {

enum class PromptKind { kInfill, kIsoBug, kAdaptation };
std::string_view PromptKindName(PromptKind kind);

class PromptError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Prompt {
  PromptKind kind = PromptKind::kInfill;
  std::string text;
  std::string case_id;
  std::string tag;  // template id, setting, or instance id

  std::string Hash() const;
};

// Fills {{slot}} markers. Throws PromptError on a missing value or an
// unresolved marker.
std::string RenderTemplate(std::string_view tmpl,
                           const std::map<std::string, std::string>& slots);

// Inputs must already be obfuscated with one map. Rule 10 appends the
// library restriction and requires non-empty lib_deps.
Prompt BuildInfillPrompt(std::string_view template_source,
                         std::string_view requirement, int rule_id,
                         const std::vector<std::string>& lib_deps);
// Requires at least one balanced, non-nested <START>/<END> pair.
Prompt BuildIsoBugPrompt(std::string_view marked_method,
                         std::string_view requirement);
// Throws PromptError when `context` still defines method_name inside
// class_name.
Prompt BuildAdaptationPrompt(std::string_view requirement,
                             std::string_view reused_code,
                             std::string_view context,
                             std::string_view class_name,
                             std::string_view method_name);

inline constexpr std::string_view kStartMarker = "<START>";
inline constexpr std::string_view kEndMarker = "<END>";
// Number of marker pairs; throws PromptError when unbalanced or nested.
std::size_t CountMarkerPairs(std::string_view text);

struct TokenProb {
  std::string token;
  double prob = 1.0;
  std::size_t offset = 0;  // byte offset of the token in Generation::text

  bool operator==(const TokenProb&) const = default;
};

struct Generation {
  std::string text;
  std::optional<std::vector<TokenProb>> token_probs;
  std::string model_id;
  std::string prompt_hash;
  double temperature = 0.0;
  int max_output_tokens = 0;
  bool truncated = false;
  bool failed = false;
  std::string error;
};

nlohmann::json ToJson(const Generation& g);
Generation GenerationFromJson(const nlohmann::json& j);

struct RetryPolicy {
  int max_attempts = 4;
  int initial_backoff_ms = 500;
  int max_backoff_ms = 8000;
};

struct ModelConfig {
  std::string model_id = "stub";
  std::string endpoint;  // base URL; empty means CTXBUG_API_BASE
  double temperature = 0.0;
  int max_output_tokens = 2048;
  int concurrency = 4;
  RetryPolicy retry;
  bool stub = true;
  std::uint64_t seed = 0;
  // Optional JSON object mapping prompt hash to canned response text.
  std::filesystem::path stub_table;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Transport failures are reported through Generation::failed.
  virtual Generation Generate(const Prompt& prompt) = 0;
};

// Deterministic offline generator. Output is a pure function of the
// prompt text, model id, and seed; canned responses from the table take
// precedence.
class StubBackend : public Backend {
 public:
  explicit StubBackend(ModelConfig config);
  Generation Generate(const Prompt& prompt) override;

 private:
  ModelConfig config_;
  std::map<std::string, std::string, std::less<>> table_;
};

// OpenAI-compatible chat-completions client with bounded retries and an
// in-flight cap.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(ModelConfig config);
  ~HttpBackend() override;
  Generation Generate(const Prompt& prompt) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Backend> MakeBackend(const ModelConfig& config);

struct ExtractedCode {
  std::string code;
  bool empty = true;
};

// First fenced code block; else the longest parseable method definition;
// else the whole text when it parses as code; else empty.
ExtractedCode ExtractCode(std::string_view response);

}  // namespace ctxbug::llm

#endif  // CTXBUG_LLM_HPP_
