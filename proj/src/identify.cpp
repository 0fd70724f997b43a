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

#include "ctxbug/identify.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"
#include "ctxbug/text_util.hpp"

namespace ctxbug::identify {

namespace {

using nlohmann::json;

struct VerdictEntry {
  Verdict verdict;
  std::string_view name;
};

constexpr VerdictEntry kVerdictNames[] = {
    {Verdict::kValid, "valid"},
    {Verdict::kNoDifference, "no_difference"},
    {Verdict::kExtraneousChange, "extraneous_change"},
    {Verdict::kPassesTests, "passes_tests"},
    {Verdict::kUnparseable, "unparseable"},
    {Verdict::kEmpty, "empty"},
    {Verdict::kDuplicate, "duplicate"},
};

json SpanJson(const syntax::Span& span) { return json::array({span.start, span.end}); }

syntax::Span SpanFromJson(const json& j) {
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

Classification Reject(Verdict verdict, std::string details, std::string source = {}) {
  Classification result;
  result.verdict = verdict;
  result.details = std::move(details);
  result.variant_source = std::move(source);
  return result;
}

std::string InstanceId(const VariantSpec& spec) {
  if (spec.kind == BugKind::kIsoBug) {
    return spec.source_instance_id + "~iso@" + spec.generator_model_id;
  }
  return spec.provenance + "@" + spec.generator_model_id;
}

}  // namespace

std::string_view VerdictName(Verdict v) {
  for (const auto& entry : kVerdictNames) {
    if (entry.verdict == v) return entry.name;
  }
  return "empty";
}

Verdict VerdictFromName(std::string_view name) {
  for (const auto& entry : kVerdictNames) {
    if (entry.name == name) return entry.verdict;
  }
  throw std::invalid_argument("unknown verdict: " + std::string(name));
}

std::string_view BugKindName(BugKind kind) {
  return kind == BugKind::kCtxBug ? "ctxbug" : "isobug";
}

std::vector<perturb::Location> BugInstance::SolutionLocations() const {
  std::vector<perturb::Location> out;
  out.reserve(bug_locations.size());
  for (const auto& loc : bug_locations) out.push_back(loc.solution);
  return out;
}

json ToJson(const BugInstance& instance) {
  json locations = json::array();
  for (const auto& loc : instance.bug_locations) {
    bool deleted = loc.correspondence.state == differ::Correspondence::State::kDeleted;
    locations.push_back({{"path", loc.solution.path},
                         {"span", SpanJson(loc.solution.span)},
                         {"solution_text", loc.solution_text},
                         {"state", deleted ? "deleted" : "matched"},
                         {"identical", loc.correspondence.identical},
                         {"variant_path", loc.correspondence.variant_path},
                         {"variant_span", SpanJson(loc.variant_span)},
                         {"variant_text", loc.variant_text}});
  }
  return {{"kind", BugKindName(instance.kind)},
          {"instance_id", instance.instance_id},
          {"case_id", instance.case_id},
          {"method_source", instance.method_source},
          {"bug_locations", std::move(locations)},
          {"generator_model_id", instance.generator_model_id},
          {"provenance", instance.provenance},
          {"rule_id", instance.rule_id},
          {"source_instance_id", instance.source_instance_id}};
}

BugInstance InstanceFromJson(const json& j) {
  BugInstance instance;
  instance.kind =
      j.at("kind").get<std::string>() == "isobug" ? BugKind::kIsoBug : BugKind::kCtxBug;
  instance.instance_id = j.at("instance_id").get<std::string>();
  instance.case_id = j.at("case_id").get<std::string>();
  instance.method_source = j.at("method_source").get<std::string>();
  for (const auto& l : j.at("bug_locations")) {
    BugLocation loc;
    loc.solution.path = l.at("path").get<syntax::NodePath>();
    loc.solution.span = SpanFromJson(l.at("span"));
    loc.solution_text = l.at("solution_text").get<std::string>();
    loc.correspondence.state = l.at("state").get<std::string>() == "deleted"
                                   ? differ::Correspondence::State::kDeleted
                                   : differ::Correspondence::State::kMatched;
    loc.correspondence.identical = l.at("identical").get<bool>();
    loc.correspondence.variant_path = l.at("variant_path").get<syntax::NodePath>();
    loc.variant_span = SpanFromJson(l.at("variant_span"));
    loc.variant_text = l.at("variant_text").get<std::string>();
    instance.bug_locations.push_back(std::move(loc));
  }
  instance.generator_model_id = j.at("generator_model_id").get<std::string>();
  instance.provenance = j.at("provenance").get<std::string>();
  instance.rule_id = j.at("rule_id").get<int>();
  instance.source_instance_id = j.value("source_instance_id", std::string());
  return instance;
}

VariantSpec SpecFromTemplate(const perturb::PerturbedTemplate& t,
                             std::string generator_model_id) {
  VariantSpec spec;
  spec.kind = BugKind::kCtxBug;
  spec.provenance = t.Id();
  spec.rule_id = t.rule_id;
  spec.locations = t.locations;
  spec.generator_model_id = std::move(generator_model_id);
  return spec;
}

Classification ClassifyCode(const corpus::AdaptationCase& c, const VariantSpec& spec,
                            std::string_view code, const ClassifyOptions& options) {
  if (text::Trim(code).empty()) return Reject(Verdict::kEmpty, "no code extracted");
  std::string source(code);

  syntax::Tree variant = syntax::Parse(source);
  if (variant.has_errors()) {
    return Reject(Verdict::kUnparseable, "syntax errors in candidate", source);
  }
  if (!python::SoleFunction(variant)) {
    return Reject(Verdict::kUnparseable, "candidate is not a single method definition",
                  source);
  }

  syntax::Tree solution = syntax::Parse(c.solution_method);
  differ::Diff diff = differ::DiffSources(solution, variant);
  std::vector<syntax::NodePath> paths;
  for (const auto& loc : spec.locations) paths.push_back(loc.path);
  std::vector<differ::Correspondence> correspondences =
      differ::LocatePerturbed(diff.solution, diff.variant, diff.mapping, paths);

  std::vector<BugLocation> bug_locations;
  for (std::size_t i = 0; i < spec.locations.size(); ++i) {
    const auto& corr = correspondences[i];
    if (corr.state == differ::Correspondence::State::kMatched && corr.identical) continue;
    BugLocation loc;
    loc.solution = spec.locations[i];
    loc.solution_text = c.solution_method.substr(
        spec.locations[i].span.start, spec.locations[i].span.size());
    loc.correspondence = corr;
    if (corr.state == differ::Correspondence::State::kMatched) {
      int id = diff.variant.FindPath(corr.variant_path);
      loc.variant_span = diff.variant.node(id).span;
      loc.variant_text = diff.variant.Text(id);
    }
    bug_locations.push_back(std::move(loc));
  }
  if (bug_locations.empty()) {
    return Reject(Verdict::kNoDifference, "every perturbed location is unchanged", source);
  }
  if (differ::ChangesOutside(diff.solution, diff.variant, diff.mapping, diff.script,
                             paths)) {
    return Reject(Verdict::kExtraneousChange, "edit touches code outside the perturbed locations",
                  source);
  }

  testexec::AssembledProgram program;
  try {
    program = testexec::Assemble(c, source);
  } catch (const testexec::AssemblyError& e) {
    return Reject(Verdict::kUnparseable, e.what(), source);
  }
  testexec::TestOutcome outcome = testexec::RunTests(program, options.timeout, options.shim);
  for (const auto& test : outcome.tests) {
    if (test.name == "<shim>") {
      throw InfrastructureError("test shim failed for " + c.case_id + ": " +
                                outcome.diagnostic);
    }
  }
  if (outcome.all_passed) {
    Classification result =
        Reject(Verdict::kPassesTests, "all tests pass", std::move(source));
    result.outcome = std::move(outcome);
    return result;
  }

  Classification result;
  result.verdict = Verdict::kValid;
  result.details = outcome.timed_out ? "tests timed out" : "tests fail";
  result.variant_source = source;
  result.outcome = std::move(outcome);
  BugInstance instance;
  instance.kind = spec.kind;
  instance.instance_id = InstanceId(spec);
  instance.case_id = c.case_id;
  instance.method_source = std::move(source);
  instance.bug_locations = std::move(bug_locations);
  instance.generator_model_id = spec.generator_model_id;
  instance.provenance = spec.provenance;
  instance.rule_id = spec.rule_id;
  instance.source_instance_id = spec.source_instance_id;
  result.instance = std::move(instance);
  return result;
}

Classification ClassifyVariant(const corpus::AdaptationCase& c, const VariantSpec& spec,
                               const llm::Generation& generation,
                               const obfuscate::RenamingMap& map,
                               const ClassifyOptions& options) {
  if (generation.failed) {
    throw InfrastructureError("generation failed for " + c.case_id + ": " +
                              generation.error);
  }
  llm::ExtractedCode extracted = llm::ExtractCode(generation.text);
  if (extracted.empty) return Reject(Verdict::kEmpty, "no code extracted");
  return ClassifyCode(c, spec, obfuscate::DeobfuscateCode(extracted.code, map), options);
}

json ToJson(const Classification& classification) {
  json j = {{"verdict", VerdictName(classification.verdict)},
            {"details", classification.details},
            {"variant_source", classification.variant_source}};
  if (classification.outcome) {
    // Test names and verdicts only: messages may carry addresses or timings.
    json tests = json::array();
    for (const auto& t : classification.outcome->tests) {
      tests.push_back({{"name", t.name}, {"verdict", testexec::VerdictName(t.verdict)}});
    }
    j["tests"] = std::move(tests);
    j["timed_out"] = classification.outcome->timed_out;
  }
  if (classification.instance) j["instance_id"] = classification.instance->instance_id;
  return j;
}

std::string DedupKey(const BugInstance& instance) {
  return instance.generator_model_id + '\n' + instance.case_id + '\n' +
         text::NormalizeWhitespace(instance.method_source);
}

std::vector<BugInstance> Clean(const std::vector<BugInstance>& instances) {
  std::unordered_set<std::string> seen;
  std::vector<BugInstance> kept;
  for (const auto& instance : instances) {
    if (seen.insert(DedupKey(instance)).second) kept.push_back(instance);
  }
  return kept;
}

void MarkDuplicates(std::vector<Classification>& classifications) {
  std::unordered_set<std::string> seen;
  for (auto& classification : classifications) {
    if (classification.verdict != Verdict::kValid || !classification.instance) continue;
    if (seen.insert(DedupKey(*classification.instance)).second) continue;
    classification.verdict = Verdict::kDuplicate;
    classification.details = "repeats an earlier bug in the same case";
    classification.instance.reset();
  }
}

std::vector<StatsRow> Summarize(const std::vector<BugInstance>& instances) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::pair<std::set<std::string>, int>> groups;
  for (const auto& instance : instances) {
    std::string task(perturb::TaskName(perturb::TaskForRule(instance.rule_id)));
    std::string kind(BugKindName(instance.kind));
    for (const std::string& t : {task, std::string("All")}) {
      auto& group = groups[{instance.generator_model_id, kind, t}];
      group.first.insert(instance.case_id);
      ++group.second;
    }
  }
  std::vector<StatsRow> rows;
  for (const auto& [key, group] : groups) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                    static_cast<int>(group.first.size()), group.second});
  }
  return rows;
}

std::string StatsCsv(const std::vector<StatsRow>& rows) {
  std::ostringstream out;
  out << "generator,kind,task,cases,bugs\n";
  for (const auto& row : rows) {
    out << row.generator_model_id << ',' << row.kind << ',' << row.task << ','
        << row.cases << ',' << row.bugs << '\n';
  }
  return out.str();
}

}  // namespace ctxbug::identify
