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

#ifndef CTXBUG_PERTURB_HPP_
#define CTXBUG_PERTURB_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"
#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"

namespace ctxbug::perturb {

enum class Task { kInterface, kFunctionality, kIdentifier, kDependency };
enum class Granularity { kAllInstances, kPerOccurrence };

inline constexpr std::string_view kParamsPlaceholder = "<PARAMS>";
inline constexpr std::string_view kReturnPlaceholder = "<RETURN>";
inline constexpr std::string_view kInfillPlaceholder = "<INFILL>";
inline constexpr std::string_view kVarPlaceholder = "<VAR>";
inline constexpr std::array<std::string_view, 4> kPlaceholders = {
    kParamsPlaceholder, kReturnPlaceholder, kInfillPlaceholder,
    kVarPlaceholder};

struct RuleSpec {
  int rule_id = 0;
  std::string_view name;
  Task task = Task::kInterface;
  Granularity granularity = Granularity::kAllInstances;
  std::string_view placeholder;
};

const std::array<RuleSpec, 10>& Rules();
// Throws std::out_of_range for ids outside 1..10.
const RuleSpec& Rule(int rule_id);
std::string_view TaskName(Task task);
Task TaskForRule(int rule_id);

// Constant families for rule 3.
inline constexpr std::array<std::string_view, 5> kConstantTypes = {
    "integer", "float", "string", "boolean", "none"};

struct Location {
  syntax::NodePath path;
  syntax::Span span;

  bool operator==(const Location&) const = default;
};

struct PerturbedTemplate {
  std::string case_id;
  int rule_id = 0;
  std::string template_source;
  std::vector<Location> locations;  // in the solution-method tree
  std::optional<std::string> constant_type;
  std::optional<int> occurrence_index;

  // Stable identifier, e.g. "Case.add#r3:integer" or "Case.add#r6:1".
  std::string Id() const;
};

nlohmann::json ToJson(const PerturbedTemplate& t);
PerturbedTemplate TemplateFromJson(const nlohmann::json& j);

// Class-level facts the rules consult: which calls target the context's
// own methods (rule 7), which names are bounded (rule 8), and which names
// are bound to third-party libraries (rule 10).
struct RuleContext {
  std::string class_name;
  python::NameSet class_methods;
  python::NameSet module_names;   // module-level definitions, no imports
  python::NameSet library_names;  // names bound by imports of lib_deps
};

RuleContext BuildRuleContext(const corpus::AdaptationCase& c);

// Applies one rule to the parsed solution method. Rules with no targets
// yield an empty list.
std::vector<PerturbedTemplate> ApplyRule(const corpus::AdaptationCase& c,
                                         const syntax::Tree& solution,
                                         const RuleSpec& rule);
std::vector<PerturbedTemplate> ApplyRule(const corpus::AdaptationCase& c,
                                         const syntax::Tree& solution,
                                         const RuleSpec& rule,
                                         const RuleContext& context);

// All ten rules in rule order. Duplicate templates are kept.
std::vector<PerturbedTemplate> PerturbAll(const corpus::AdaptationCase& c);
std::vector<PerturbedTemplate> PerturbAll(const corpus::AdaptationCase& c,
                                          const std::vector<int>& rule_ids);

// Target nodes selected by a rule, grouped per template, before the
// outermost-only filter. Exposed for diagnostics.
std::vector<std::vector<const syntax::Node*>> SelectTargets(
    const syntax::Tree& solution, const RuleSpec& rule,
    const RuleContext& context, std::vector<std::string>* constant_types);

// Keeps the outermost of any nested nodes, in source order.
std::vector<const syntax::Node*> OutermostOnly(
    std::vector<const syntax::Node*> nodes);

// Replaces each placeholder occurrence, left to right, with the matching
// original text. Throws std::invalid_argument when counts differ.
std::string FillPlaceholders(std::string_view template_source,
                             std::string_view placeholder,
                             const std::vector<std::string>& fills);

// Number of non-overlapping occurrences of `token` in `text`.
std::size_t CountOccurrences(std::string_view text, std::string_view token);

}  // namespace ctxbug::perturb

#endif  // CTXBUG_PERTURB_HPP_
