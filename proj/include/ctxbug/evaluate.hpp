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

#ifndef CTXBUG_EVALUATE_HPP_
#define CTXBUG_EVALUATE_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"
#include "ctxbug/identify.hpp"
#include "ctxbug/llm.hpp"
#include "ctxbug/obfuscate.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/testexec.hpp"

// Adaptation runs over the three settings, Pass@1, Resolution Rate,
// Average Token Probability, and the report tables.
namespace ctxbug::evaluate {

enum class Setting { kWithCtxBugs, kWithoutCtxBugs, kWithIsoBugs };
std::string_view SettingName(Setting s);
Setting SettingFromName(std::string_view name);

struct EvalRecord {
  std::string model_id;
  Setting setting = Setting::kWithCtxBugs;
  std::string case_id;
  std::string instance_id;         // the bug instance under evaluation
  std::string source_instance_id;  // CtxBug id this record pairs with
  std::string task;
  std::string generator_model_id;
  bool passed = false;
  int bugs_total = 0;
  int bugs_resolved = 0;
  std::vector<bool> resolved;  // per bug location
  std::optional<double> atp;
  std::string atp_alignment;  // "offsets", "greedy", or "unavailable"
  bool flagged = false;       // failed, truncated, or empty generation
  std::string raw_output;
  std::string output_code;  // deobfuscated
  std::string error;

  bool operator==(const EvalRecord&) const = default;
};

nlohmann::json ToJson(const EvalRecord& record);
EvalRecord RecordFromJson(const nlohmann::json& j);

struct Resolution {
  int resolved = 0;
  int total = 0;
  std::vector<bool> per_location;
};

// A location is resolved when its solution node has a match in the
// output whose text is identical. Unparseable output resolves nothing.
Resolution ResolutionRate(std::string_view solution, std::string_view output,
                          const std::vector<perturb::Location>& locations);

// Byte offsets of each token in `text`: reported offsets when they agree
// with the text, else a greedy left-to-right alignment. Empty when
// neither works.
struct TokenAlignment {
  std::vector<std::size_t> offsets;
  std::string method;  // "offsets", "greedy", or "unavailable"
};
TokenAlignment AlignTokens(std::string_view text, const std::vector<llm::TokenProb>& tokens);

// Mean probability of tokens overlapping any span; empty when no token
// overlaps.
std::optional<double> AverageTokenProbability(const std::vector<llm::TokenProb>& tokens,
                                              const std::vector<std::size_t>& offsets,
                                              const std::vector<syntax::Span>& spans);

struct AtpResult {
  std::optional<double> value;
  std::string alignment = "unavailable";
};

// ATP over the generated tokens at the bug locations. The generation is
// in obfuscated names, so the solution is obfuscated with the same map
// before matching.
AtpResult BugTokenProbability(const llm::Generation& generation,
                              std::string_view solution,
                              const obfuscate::RenamingMap& map,
                              const std::vector<perturb::Location>& locations);

struct EvalOptions {
  testexec::ShimConfig shim;
  std::chrono::seconds timeout{30};
};

// Scores a generation already in hand: extract, deobfuscate, assemble,
// run tests, resolution rate, ATP. Throws identify::InfrastructureError
// when the shim is unusable.
EvalRecord ScoreGeneration(const corpus::AdaptationCase& c, Setting setting,
                           const identify::BugInstance& instance,
                           const llm::Generation& generation,
                           const obfuscate::RenamingMap& map, const EvalOptions& options);

// Class-scope obfuscated adaptation prompt for one reused-code input.
struct AdaptationPrompt {
  llm::Prompt prompt;
  obfuscate::RenamingMap map;
};
AdaptationPrompt BuildPrompt(const corpus::AdaptationCase& c, Setting setting,
                             const identify::BugInstance& instance,
                             std::string_view reused_code);

EvalRecord RunAdaptation(const corpus::AdaptationCase& c, Setting setting,
                         const identify::BugInstance& instance, std::string_view reused_code,
                         llm::Backend& model, const std::string& model_id,
                         const EvalOptions& options);

// 100 * (baseline - value) / baseline. Negative means improvement.
double RelativeDrop(double baseline, double value);
// Half away from zero, at presentation only.
double RoundHalfUp(double value, int digits = 2);
std::string FormatFixed(double value, int digits = 2);

inline constexpr std::string_view kAllTasks = "All";
inline constexpr std::string_view kPairedSetting = "with_ctxbugs_paired";

struct ReportRow {
  std::string model_id;
  std::string generator_model_id;  // "*" when pooled across generators
  std::string task;
  std::string setting;
  int cases = 0;
  int passed = 0;
  int bugs_total = 0;
  int bugs_resolved = 0;
  double pass_at_1 = 0.0;
  double rr = 0.0;
  std::optional<double> relative_pass_drop;
  std::optional<double> relative_rr_drop;
  std::optional<double> mean_atp;
  int atp_count = 0;
};

struct Report {
  std::vector<ReportRow> rows;           // pooled across generators
  std::vector<ReportRow> by_generator;   // one block per generator
  std::vector<std::string> notes;
};

// Rows per (model, task, setting) in fixed task and setting order. The
// paired setting restricts CtxBug records to those with an IsoBug record
// for the same model; its relative columns use with_isobugs as the
// baseline, while with_ctxbugs uses without_ctxbugs.
Report BuildReport(const std::vector<EvalRecord>& records);
std::string ReportCsv(const std::vector<ReportRow>& rows, bool with_generator = false);
nlohmann::json ReportJson(const Report& report);

}  // namespace ctxbug::evaluate

#endif  // CTXBUG_EVALUATE_HPP_
