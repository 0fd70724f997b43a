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

#include "ctxbug/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "ctxbug/differ.hpp"
#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"

namespace ctxbug::evaluate {

namespace {

using nlohmann::json;

constexpr std::pair<Setting, std::string_view> kSettingNames[] = {
    {Setting::kWithCtxBugs, "with_ctxbugs"},
    {Setting::kWithoutCtxBugs, "without_ctxbugs"},
    {Setting::kWithIsoBugs, "with_isobugs"},
};

std::vector<syntax::NodePath> Paths(const std::vector<perturb::Location>& locations) {
  std::vector<syntax::NodePath> paths;
  for (const auto& loc : locations) paths.push_back(loc.path);
  return paths;
}

bool ParsesAsMethod(const syntax::Tree& tree) {
  return !tree.has_errors() && python::SoleFunction(tree) != nullptr;
}

json Optional(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

std::string_view SettingName(Setting s) {
  for (const auto& [setting, name] : kSettingNames) {
    if (setting == s) return name;
  }
  return "";
}

Setting SettingFromName(std::string_view name) {
  for (const auto& [setting, n] : kSettingNames) {
    if (n == name) return setting;
  }
  throw std::invalid_argument("unknown setting: " + std::string(name));
}

json ToJson(const EvalRecord& r) {
  return {{"model_id", r.model_id},
          {"setting", SettingName(r.setting)},
          {"case_id", r.case_id},
          {"instance_id", r.instance_id},
          {"source_instance_id", r.source_instance_id},
          {"task", r.task},
          {"generator_model_id", r.generator_model_id},
          {"passed", r.passed},
          {"bugs_total", r.bugs_total},
          {"bugs_resolved", r.bugs_resolved},
          {"resolved", r.resolved},
          {"atp", Optional(r.atp)},
          {"atp_alignment", r.atp_alignment},
          {"flagged", r.flagged},
          {"raw_output", r.raw_output},
          {"output_code", r.output_code},
          {"error", r.error}};
}

EvalRecord RecordFromJson(const json& j) {
  EvalRecord r;
  r.model_id = j.at("model_id").get<std::string>();
  r.setting = SettingFromName(j.at("setting").get<std::string>());
  r.case_id = j.at("case_id").get<std::string>();
  r.instance_id = j.at("instance_id").get<std::string>();
  r.source_instance_id = j.at("source_instance_id").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.generator_model_id = j.at("generator_model_id").get<std::string>();
  r.passed = j.at("passed").get<bool>();
  r.bugs_total = j.at("bugs_total").get<int>();
  r.bugs_resolved = j.at("bugs_resolved").get<int>();
  r.resolved = j.at("resolved").get<std::vector<bool>>();
  if (!j.at("atp").is_null()) r.atp = j.at("atp").get<double>();
  r.atp_alignment = j.at("atp_alignment").get<std::string>();
  r.flagged = j.at("flagged").get<bool>();
  r.raw_output = j.at("raw_output").get<std::string>();
  r.output_code = j.at("output_code").get<std::string>();
  r.error = j.at("error").get<std::string>();
  return r;
}

Resolution ResolutionRate(std::string_view solution, std::string_view output,
                          const std::vector<perturb::Location>& locations) {
  Resolution result;
  result.total = static_cast<int>(locations.size());
  result.per_location.assign(locations.size(), false);
  syntax::Tree output_tree = syntax::Parse(std::string(output));
  if (!ParsesAsMethod(output_tree)) return result;
  differ::Diff diff = differ::DiffSources(syntax::Parse(std::string(solution)), output_tree);
  auto correspondences =
      differ::LocatePerturbed(diff.solution, diff.variant, diff.mapping, Paths(locations));
  for (std::size_t i = 0; i < correspondences.size(); ++i) {
    const auto& corr = correspondences[i];
    if (corr.state == differ::Correspondence::State::kMatched && corr.identical) {
      result.per_location[i] = true;
      ++result.resolved;
    }
  }
  return result;
}

TokenAlignment AlignTokens(std::string_view text, const std::vector<llm::TokenProb>& tokens) {
  TokenAlignment alignment;
  bool reported_ok = true;
  for (const auto& t : tokens) {
    if (t.offset > text.size() || text.substr(t.offset, t.token.size()) != t.token) {
      reported_ok = false;
      break;
    }
  }
  if (reported_ok) {
    alignment.method = "offsets";
    for (const auto& t : tokens) alignment.offsets.push_back(t.offset);
    return alignment;
  }
  std::size_t cursor = 0;
  for (const auto& t : tokens) {
    std::size_t at = text.find(t.token, cursor);
    if (at == std::string_view::npos) {
      alignment.offsets.clear();
      alignment.method = "unavailable";
      return alignment;
    }
    alignment.offsets.push_back(at);
    cursor = at + t.token.size();
  }
  alignment.method = "greedy";
  return alignment;
}

std::optional<double> AverageTokenProbability(const std::vector<llm::TokenProb>& tokens,
                                              const std::vector<std::size_t>& offsets,
                                              const std::vector<syntax::Span>& spans) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < tokens.size() && i < offsets.size(); ++i) {
    syntax::Span token{offsets[i], offsets[i] + tokens[i].token.size()};
    for (const auto& span : spans) {
      if (token.Overlaps(span)) {
        sum += tokens[i].prob;
        ++count;
        break;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

AtpResult BugTokenProbability(const llm::Generation& generation, std::string_view solution,
                              const obfuscate::RenamingMap& map,
                              const std::vector<perturb::Location>& locations) {
  AtpResult result;
  if (!generation.token_probs || generation.failed) return result;
  llm::ExtractedCode extracted = llm::ExtractCode(generation.text);
  if (extracted.empty) return result;
  std::size_t code_pos = generation.text.find(extracted.code);
  if (code_pos == std::string::npos) return result;
  syntax::Tree output = syntax::Parse(extracted.code);
  if (!ParsesAsMethod(output)) return result;
  differ::Diff diff = differ::DiffSources(
      syntax::Parse(obfuscate::ObfuscateCode(solution, map)), output);
  std::vector<differ::Correspondence> correspondences;
  try {
    correspondences =
        differ::LocatePerturbed(diff.solution, diff.variant, diff.mapping, Paths(locations));
  } catch (const std::invalid_argument&) {
    return result;
  }
  std::vector<syntax::Span> spans;
  for (const auto& corr : correspondences) {
    if (corr.state != differ::Correspondence::State::kMatched) continue;
    syntax::Span span = diff.variant.node(diff.variant.FindPath(corr.variant_path)).span;
    spans.push_back({code_pos + span.start, code_pos + span.end});
  }
  TokenAlignment alignment = AlignTokens(generation.text, *generation.token_probs);
  if (alignment.method == "unavailable") return result;
  result.value = AverageTokenProbability(*generation.token_probs, alignment.offsets, spans);
  if (result.value) result.alignment = alignment.method;
  return result;
}

EvalRecord ScoreGeneration(const corpus::AdaptationCase& c, Setting setting,
                           const identify::BugInstance& instance,
                           const llm::Generation& generation,
                           const obfuscate::RenamingMap& map, const EvalOptions& options) {
  EvalRecord r;
  r.model_id = generation.model_id;
  r.setting = setting;
  r.case_id = c.case_id;
  r.instance_id = instance.instance_id;
  r.source_instance_id = instance.kind == identify::BugKind::kIsoBug
                             ? instance.source_instance_id
                             : instance.instance_id;
  r.task = std::string(perturb::TaskName(perturb::TaskForRule(instance.rule_id)));
  r.generator_model_id = instance.generator_model_id;
  std::vector<perturb::Location> locations = instance.SolutionLocations();
  r.bugs_total = static_cast<int>(locations.size());
  r.resolved.assign(locations.size(), false);
  r.raw_output = generation.text;
  r.atp_alignment = "unavailable";
  r.flagged = generation.truncated;

  if (generation.failed) {
    r.flagged = true;
    r.error = "generation failed: " + generation.error;
    return r;
  }
  llm::ExtractedCode extracted = llm::ExtractCode(generation.text);
  if (extracted.empty) {
    r.flagged = true;
    r.error = "no code extracted";
    return r;
  }
  r.output_code = obfuscate::DeobfuscateCode(extracted.code, map);

  Resolution resolution = ResolutionRate(c.solution_method, r.output_code, locations);
  r.bugs_resolved = resolution.resolved;
  r.resolved = resolution.per_location;

  AtpResult atp = BugTokenProbability(generation, c.solution_method, map, locations);
  r.atp = atp.value;
  r.atp_alignment = atp.alignment;

  testexec::AssembledProgram program;
  try {
    program = testexec::Assemble(c, r.output_code);
  } catch (const testexec::AssemblyError& e) {
    r.error = e.what();
    return r;
  }
  testexec::TestOutcome outcome = testexec::RunTests(program, options.timeout, options.shim);
  for (const auto& test : outcome.tests) {
    if (test.name == "<shim>") {
      throw identify::InfrastructureError("test shim failed for " + c.case_id + ": " +
                                          outcome.diagnostic);
    }
  }
  r.passed = outcome.all_passed;
  if (outcome.timed_out) r.error = "tests timed out";
  return r;
}

AdaptationPrompt BuildPrompt(const corpus::AdaptationCase& c, Setting setting,
                             const identify::BugInstance& instance,
                             std::string_view reused_code) {
  AdaptationPrompt out;
  out.map = obfuscate::BuildRenaming(c, obfuscate::Scope::kClass);
  corpus::TargetContext target = corpus::BuildTargetContext(c);
  auto forward = [&](const std::string& name) {
    auto renamed = out.map.Forward(name);
    return renamed ? std::string(*renamed) : name;
  };
  out.prompt = llm::BuildAdaptationPrompt(
      obfuscate::ObfuscateText(c.requirement, out.map),
      obfuscate::ObfuscateCode(reused_code, out.map),
      obfuscate::ObfuscateCode(target.context_source, out.map), forward(c.class_name),
      forward(c.method_name));
  out.prompt.case_id = c.case_id;
  out.prompt.tag = std::string(SettingName(setting)) + ":" + instance.instance_id;
  return out;
}

EvalRecord RunAdaptation(const corpus::AdaptationCase& c, Setting setting,
                         const identify::BugInstance& instance, std::string_view reused_code,
                         llm::Backend& model, const std::string& model_id,
                         const EvalOptions& options) {
  AdaptationPrompt prompt = BuildPrompt(c, setting, instance, reused_code);
  llm::Generation generation = model.Generate(prompt.prompt);
  generation.model_id = model_id;
  return ScoreGeneration(c, setting, instance, generation, prompt.map, options);
}

double RelativeDrop(double baseline, double value) {
  return 100.0 * (baseline - value) / baseline;
}

double RoundHalfUp(double value, int digits) {
  double scale = std::pow(10.0, digits);
  // The small nudge absorbs binary representation error at exact halves.
  double scaled = std::fabs(value) * scale;
  double rounded = std::floor(scaled + 0.5 + 1e-9) / scale;
  return std::signbit(value) && rounded != 0.0 ? -rounded : rounded;
}

std::string FormatFixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, RoundHalfUp(value, digits));
  return buffer;
}

namespace {

constexpr std::string_view kTaskOrder[] = {"Interface", "Functionality", "Identifier",
                                           "Dependency", "All"};
constexpr std::string_view kSettingOrder[] = {"with_ctxbugs", "without_ctxbugs",
                                              "with_isobugs", "with_ctxbugs_paired"};

int Rank(std::string_view value, std::span<const std::string_view> order) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == value) return static_cast<int>(i);
  }
  return static_cast<int>(order.size());
}

struct Accumulator {
  int cases = 0;
  int passed = 0;
  int bugs_total = 0;
  int bugs_resolved = 0;
  double atp_sum = 0.0;
  int atp_count = 0;

  void Add(const EvalRecord& r) {
    ++cases;
    passed += r.passed ? 1 : 0;
    bugs_total += r.bugs_total;
    bugs_resolved += r.bugs_resolved;
    if (r.atp) {
      atp_sum += *r.atp;
      ++atp_count;
    }
  }
};

// (model, generator, task, setting)
using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;

std::vector<ReportRow> Rows(const std::map<GroupKey, Accumulator>& groups) {
  std::vector<ReportRow> rows;
  for (const auto& [key, acc] : groups) {
    ReportRow row;
    std::tie(row.model_id, row.generator_model_id, row.task, row.setting) = key;
    row.cases = acc.cases;
    row.passed = acc.passed;
    row.bugs_total = acc.bugs_total;
    row.bugs_resolved = acc.bugs_resolved;
    row.pass_at_1 = 100.0 * acc.passed / acc.cases;
    row.rr = acc.bugs_total > 0 ? 100.0 * acc.bugs_resolved / acc.bugs_total : 0.0;
    if (acc.atp_count > 0) row.mean_atp = acc.atp_sum / acc.atp_count;
    row.atp_count = acc.atp_count;
    rows.push_back(row);
  }
  auto find = [&](const ReportRow& like, std::string_view setting) -> const ReportRow* {
    for (const auto& r : rows) {
      if (r.model_id == like.model_id && r.generator_model_id == like.generator_model_id &&
          r.task == like.task && r.setting == setting) {
        return &r;
      }
    }
    return nullptr;
  };
  for (auto& row : rows) {
    std::string_view baseline_setting;
    if (row.setting == "with_ctxbugs") baseline_setting = "without_ctxbugs";
    if (row.setting == kPairedSetting) baseline_setting = "with_isobugs";
    if (baseline_setting.empty()) continue;
    const ReportRow* baseline = find(row, baseline_setting);
    if (!baseline) continue;
    if (baseline->pass_at_1 > 0) {
      row.relative_pass_drop = RelativeDrop(baseline->pass_at_1, row.pass_at_1);
    }
    if (baseline->rr > 0) row.relative_rr_drop = RelativeDrop(baseline->rr, row.rr);
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::make_tuple(a.model_id, a.generator_model_id, Rank(a.task, kTaskOrder),
                           Rank(a.setting, kSettingOrder)) <
           std::make_tuple(b.model_id, b.generator_model_id, Rank(b.task, kTaskOrder),
                           Rank(b.setting, kSettingOrder));
  });
  return rows;
}

std::string OptionalCell(const std::optional<double>& value) {
  return value ? FormatFixed(*value) : "";
}

json RowJson(const ReportRow& row) {
  return {{"model", row.model_id},
          {"generator", row.generator_model_id},
          {"task", row.task},
          {"setting", row.setting},
          {"cases", row.cases},
          {"passed", row.passed},
          {"bugs_total", row.bugs_total},
          {"bugs_resolved", row.bugs_resolved},
          {"pass_at_1", row.pass_at_1},
          {"rr", row.rr},
          {"relative_pass_drop", Optional(row.relative_pass_drop)},
          {"relative_rr_drop", Optional(row.relative_rr_drop)},
          {"mean_atp", Optional(row.mean_atp)},
          {"atp_count", row.atp_count}};
}

}  // namespace

Report BuildReport(const std::vector<EvalRecord>& records) {
  // CtxBug instances that have an IsoBug record under the same model.
  std::set<std::pair<std::string, std::string>> paired;
  for (const auto& r : records) {
    if (r.setting == Setting::kWithIsoBugs) paired.insert({r.model_id, r.source_instance_id});
  }
  std::map<GroupKey, Accumulator> pooled;
  std::map<GroupKey, Accumulator> per_generator;
  for (const auto& r : records) {
    std::vector<std::string> settings = {std::string(SettingName(r.setting))};
    if (r.setting == Setting::kWithCtxBugs && paired.contains({r.model_id, r.instance_id})) {
      settings.emplace_back(kPairedSetting);
    }
    for (const auto& setting : settings) {
      for (const std::string& task : {r.task, std::string(kAllTasks)}) {
        pooled[{r.model_id, "*", task, setting}].Add(r);
        per_generator[{r.model_id, r.generator_model_id, task, setting}].Add(r);
      }
    }
  }
  Report report;
  report.rows = Rows(pooled);
  report.by_generator = Rows(per_generator);
  std::set<std::string> models;
  for (const auto& r : records) models.insert(r.model_id);
  for (const auto& model : models) {
    for (std::string_view task : kTaskOrder) {
      for (std::string_view setting : kSettingOrder) {
        if (!pooled.contains({model, "*", std::string(task), std::string(setting)})) {
          report.notes.push_back("no records for " + model + " / " + std::string(task) +
                                 " / " + std::string(setting) + "; row omitted");
        }
      }
    }
  }
  return report;
}

std::string ReportCsv(const std::vector<ReportRow>& rows, bool with_generator) {
  std::ostringstream out;
  out << "model," << (with_generator ? "generator," : "")
      << "task,setting,cases,pass_at_1,bugs_total,bugs_resolved,rr,relative_pass_drop,"
         "relative_rr_drop\n";
  for (const auto& row : rows) {
    out << row.model_id << ',';
    if (with_generator) out << row.generator_model_id << ',';
    out << row.task << ',' << row.setting << ',' << row.cases << ','
        << FormatFixed(row.pass_at_1) << ',' << row.bugs_total << ',' << row.bugs_resolved
        << ',' << FormatFixed(row.rr) << ',' << OptionalCell(row.relative_pass_drop) << ','
        << OptionalCell(row.relative_rr_drop) << '\n';
  }
  return out.str();
}

json ReportJson(const Report& report) {
  json rows = json::array();
  for (const auto& row : report.rows) rows.push_back(RowJson(row));
  json by_generator = json::array();
  for (const auto& row : report.by_generator) by_generator.push_back(RowJson(row));
  return {{"rows", std::move(rows)},
          {"by_generator", std::move(by_generator)},
          {"notes", report.notes}};
}

}  // namespace ctxbug::evaluate
