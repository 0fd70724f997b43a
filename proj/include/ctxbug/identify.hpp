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

#ifndef CTXBUG_IDENTIFY_HPP_
#define CTXBUG_IDENTIFY_HPP_

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"
#include "ctxbug/differ.hpp"
#include "ctxbug/llm.hpp"
#include "ctxbug/obfuscate.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/testexec.hpp"

// Hybrid bug identification: deobfuscate, gate syntactically against the
// solution, execute the tests, and clean the survivors.
namespace ctxbug::identify {

enum class Verdict {
  kValid,
  kNoDifference,
  kExtraneousChange,
  kPassesTests,
  kUnparseable,
  kEmpty,
  kDuplicate,
};
std::string_view VerdictName(Verdict v);
Verdict VerdictFromName(std::string_view name);
inline constexpr Verdict kAllVerdicts[] = {
    Verdict::kValid,       Verdict::kNoDifference, Verdict::kExtraneousChange,
    Verdict::kPassesTests, Verdict::kUnparseable,  Verdict::kEmpty,
    Verdict::kDuplicate};

enum class BugKind { kCtxBug, kIsoBug };
std::string_view BugKindName(BugKind kind);

struct BugLocation {
  perturb::Location solution;
  std::string solution_text;
  differ::Correspondence correspondence;
  syntax::Span variant_span;  // empty when deleted
  std::string variant_text;

  bool operator==(const BugLocation&) const = default;
};

struct BugInstance {
  BugKind kind = BugKind::kCtxBug;
  std::string instance_id;
  std::string case_id;
  std::string method_source;  // deobfuscated variant method
  std::vector<BugLocation> bug_locations;
  std::string generator_model_id;
  std::string provenance;  // template id, or marker-set id for IsoBugs
  int rule_id = 0;
  std::string source_instance_id;  // IsoBugs: the CtxBug they pair with

  std::vector<perturb::Location> SolutionLocations() const;
  bool operator==(const BugInstance&) const = default;
};

nlohmann::json ToJson(const BugInstance& instance);
BugInstance InstanceFromJson(const nlohmann::json& j);

// What the classifier needs to know about the variant's origin.
struct VariantSpec {
  BugKind kind = BugKind::kCtxBug;
  std::string provenance;
  int rule_id = 0;
  std::vector<perturb::Location> locations;  // perturbed solution nodes
  std::string source_instance_id;
  std::string generator_model_id;
};

VariantSpec SpecFromTemplate(const perturb::PerturbedTemplate& t,
                             std::string generator_model_id);

struct ClassifyOptions {
  testexec::ShimConfig shim;
  std::chrono::seconds timeout{30};
};

struct Classification {
  Verdict verdict = Verdict::kEmpty;
  std::string details;
  std::string variant_source;  // deobfuscated candidate, empty when none
  std::optional<testexec::TestOutcome> outcome;
  std::optional<BugInstance> instance;  // set iff verdict is kValid
};

// Raised when the variant cannot be judged for reasons outside the
// variant itself: a failed generation or an unusable test shim.
class InfrastructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the pipeline on deobfuscated candidate code. `code` empty means
// nothing was extracted.
Classification ClassifyCode(const corpus::AdaptationCase& c, const VariantSpec& spec,
                            std::string_view code, const ClassifyOptions& options);

// Full pipeline on a raw generation: extract, deobfuscate with `map`,
// then ClassifyCode.
Classification ClassifyVariant(const corpus::AdaptationCase& c, const VariantSpec& spec,
                               const llm::Generation& generation,
                               const obfuscate::RenamingMap& map,
                               const ClassifyOptions& options);

nlohmann::json ToJson(const Classification& classification);

// Dedup key: generator, case id, and whitespace-normalized method source.
// Each generator's benchmark is cleaned on its own.
std::string DedupKey(const BugInstance& instance);

// Drops later duplicates, keeping the first occurrence in order.
std::vector<BugInstance> Clean(const std::vector<BugInstance>& instances);

// Marks Valid classifications whose instance repeats an earlier one as
// Duplicate and clears their instance. Order is significant.
void MarkDuplicates(std::vector<Classification>& classifications);

// One row per (generator, kind, task) plus an "All" task row.
struct StatsRow {
  std::string generator_model_id;
  std::string kind;
  std::string task;
  int cases = 0;
  int bugs = 0;

  bool operator==(const StatsRow&) const = default;
};
std::vector<StatsRow> Summarize(const std::vector<BugInstance>& instances);
std::string StatsCsv(const std::vector<StatsRow>& rows);

}  // namespace ctxbug::identify

#endif  // CTXBUG_IDENTIFY_HPP_
