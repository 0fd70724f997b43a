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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "ctxbug/baselines.hpp"
#include "oracles.hpp"
#include "studies.hpp"
#include "test_support.hpp"

namespace ctxbug::evaluate {
namespace {

using identify::BugInstance;

EvalOptions Options() {
  EvalOptions options;
  options.shim = testing::MockShim();
  options.timeout = std::chrono::seconds(20);
  return options;
}

BugInstance InstanceFromTemplate(const corpus::AdaptationCase& c,
                                 const perturb::PerturbedTemplate& t,
                                 identify::BugKind kind = identify::BugKind::kCtxBug) {
  BugInstance b;
  b.kind = kind;
  b.instance_id = t.Id() + "@gen";
  b.case_id = c.case_id;
  b.rule_id = t.rule_id;
  b.generator_model_id = "gen";
  b.provenance = t.Id();
  for (const auto& loc : t.locations) {
    identify::BugLocation bl;
    bl.solution = loc;
    bl.solution_text = c.solution_method.substr(loc.span.start, loc.span.size());
    b.bug_locations.push_back(bl);
  }
  return b;
}

const perturb::PerturbedTemplate& StatusFlagsTemplate(int rule_id) {
  static const auto templates = perturb::PerturbAll(testing::StatusFlagsAdd());
  for (const auto& t : templates) {
    if (t.rule_id == rule_id) return t;
  }
  throw std::logic_error("no template");
}

std::string AddMethod(const std::string& op) {
  return "def add(self, status):\n    self.state = self.state " + op +
         " status\n    return self.state\n";
}

// Replies with fixed code, obfuscated the way a model would see it.
class FixedBackend : public llm::Backend {
 public:
  FixedBackend(std::string code, obfuscate::RenamingMap map)
      : code_(std::move(code)), map_(std::move(map)) {}
  llm::Generation Generate(const llm::Prompt& prompt) override {
    last_prompt = prompt.text;
    llm::Generation g;
    g.text = "```python\n" + obfuscate::ObfuscateCode(code_, map_) + "```\n";
    g.model_id = "fixed";
    return g;
  }
  std::string last_prompt;

 private:
  std::string code_;
  obfuscate::RenamingMap map_;
};

EvalRecord Adapt(Setting setting, const BugInstance& instance, const std::string& reused,
                 const std::string& reply) {
  const auto& c = testing::StatusFlagsAdd();
  FixedBackend backend(reply, obfuscate::BuildRenaming(c, obfuscate::Scope::kClass));
  EvalRecord r = RunAdaptation(c, setting, instance, reused, backend, "fixed", Options());
  EXPECT_EQ(backend.last_prompt.find("def add("), std::string::npos);
  return r;
}

TEST(EvaluateTest, CtxBugReproducedVerbatimFailsAndStaysUnresolved) {
  BugInstance ctxbug = InstanceFromTemplate(testing::StatusFlagsAdd(), StatusFlagsTemplate(4));
  EvalRecord r = Adapt(Setting::kWithCtxBugs, ctxbug, AddMethod("+"), AddMethod("+"));
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.bugs_resolved, 0);
  EXPECT_EQ(r.bugs_total, 1);
  EXPECT_EQ(r.task, "Functionality");
}

TEST(EvaluateTest, MaskedInputCompletedCorrectlyPassesAndResolves) {
  const auto& c = testing::StatusFlagsAdd();
  BugInstance ctxbug = InstanceFromTemplate(c, StatusFlagsTemplate(4));
  auto masked = baselines::BuildWithoutCtxBugs(c, ctxbug);
  EvalRecord r = Adapt(Setting::kWithoutCtxBugs, ctxbug, masked.source, AddMethod("|"));
  EXPECT_TRUE(r.passed) << r.error;
  EXPECT_EQ(r.bugs_resolved, 1);
  EXPECT_EQ(r.setting, Setting::kWithoutCtxBugs);
}

TEST(EvaluateTest, IsoBugFixedByTheModelPassesAndResolves) {
  const auto& c = testing::StatusFlagsAdd();
  BugInstance iso = InstanceFromTemplate(c, StatusFlagsTemplate(4), identify::BugKind::kIsoBug);
  iso.source_instance_id = "StatusFlags.add#r4@gen";
  iso.instance_id = iso.source_instance_id + "~iso@gen";
  EvalRecord r = Adapt(Setting::kWithIsoBugs, iso, AddMethod("-"), AddMethod("|"));
  EXPECT_TRUE(r.passed) << r.error;
  EXPECT_EQ(r.bugs_resolved, 1);
  EXPECT_EQ(r.source_instance_id, "StatusFlags.add#r4@gen");
}

TEST(EvaluateTest, ResolutionAndPassAreIndependent) {
  BugInstance ctxbug = InstanceFromTemplate(testing::StatusFlagsAdd(), StatusFlagsTemplate(4));
  EvalRecord r = Adapt(Setting::kWithCtxBugs, ctxbug, AddMethod("+"),
                       "def add(self, status):\n    self.state = self.state | status\n"
                       "    return None\n");
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.bugs_resolved, 1);
}

TEST(EvaluateTest, ResolutionRateMatchesTextSpliceOracleOnEveryTemplate) {
  studies::StudyResult result = studies::ResolutionOracle(testing::MiniCorpus(), 3, 7);
  EXPECT_TRUE(result.ok()) << result.Summary();
  EXPECT_GT(result.trials, 800);
  for (const auto& failure : result.failures) ADD_FAILURE() << failure;
}

TEST(EvaluateTest, UnparseableOutputResolvesNothing) {
  const auto& t = StatusFlagsTemplate(4);
  Resolution r = ResolutionRate(testing::StatusFlagsAdd().solution_method, "def add(:\n",
                                t.locations);
  EXPECT_EQ(r.resolved, 0);
  EXPECT_EQ(r.total, 1);
}

TEST(EvaluateTest, SolutionAsOutputPassesAndResolvesEverything) {
  for (const auto& c : testing::MiniCorpus()) {
    auto templates = perturb::PerturbAll(c);
    for (const auto& t : templates) {
      Resolution r = ResolutionRate(c.solution_method, c.solution_method, t.locations);
      EXPECT_EQ(r.resolved, r.total) << t.Id();
    }
    ASSERT_FALSE(templates.empty());
    llm::Generation g;
    g.text = "```python\n" + c.solution_method + "\n```\n";
    g.model_id = "oracle";
    EvalRecord rec = ScoreGeneration(c, Setting::kWithCtxBugs,
                                     InstanceFromTemplate(c, templates.front()), g,
                                     obfuscate::RenamingMap(), Options());
    EXPECT_TRUE(rec.passed) << c.case_id << " " << rec.error;
    EXPECT_EQ(rec.bugs_resolved, rec.bugs_total) << c.case_id;
  }
}

TEST(EvaluateTest, FailedGenerationIsFlagged) {
  const auto& c = testing::StatusFlagsAdd();
  llm::Generation g;
  g.failed = true;
  g.error = "HTTP 503";
  EvalRecord r = ScoreGeneration(c, Setting::kWithCtxBugs,
                                 InstanceFromTemplate(c, StatusFlagsTemplate(4)), g,
                                 obfuscate::RenamingMap(), Options());
  EXPECT_TRUE(r.flagged);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.bugs_resolved, 0);
  EXPECT_EQ(r.atp_alignment, "unavailable");
}

std::vector<llm::TokenProb> Tokens(const std::vector<std::pair<std::string, double>>& items) {
  std::vector<llm::TokenProb> out;
  std::size_t offset = 0;
  for (const auto& [token, prob] : items) {
    out.push_back({token, prob, offset});
    offset += token.size();
  }
  return out;
}

TEST(EvaluateTest, AverageTokenProbabilityArithmetic) {
  auto tokens = Tokens({{"a", 0.5}, {"b", 0.9}, {"c", 1.0}, {"d", 1.0}, {"e", 0.2}});
  std::vector<std::size_t> offsets = {0, 1, 2, 3, 4};
  auto atp = AverageTokenProbability(tokens, offsets, {{1, 4}});
  ASSERT_TRUE(atp);
  EXPECT_DOUBLE_EQ(RoundHalfUp(*atp, 4), 0.9667);
  auto single = AverageTokenProbability(tokens, offsets, {{2, 3}});
  EXPECT_DOUBLE_EQ(*single, 1.0);
  EXPECT_FALSE(AverageTokenProbability(tokens, offsets, {{9, 10}}));
}

TEST(EvaluateTest, TokenAlignmentFallsBackToGreedy) {
  std::string text = "x = a | b";
  auto tokens = Tokens({{"x", 1}, {" ", 1}, {"=", 1}, {" ", 1}, {"a", 1}});
  EXPECT_EQ(AlignTokens(text, tokens).method, "offsets");
  for (auto& t : tokens) t.offset = 0;
  TokenAlignment greedy = AlignTokens(text, tokens);
  EXPECT_EQ(greedy.method, "greedy");
  EXPECT_EQ(greedy.offsets, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  tokens.push_back({"zzz", 1, 0});
  EXPECT_EQ(AlignTokens(text, tokens).method, "unavailable");
}

TEST(EvaluateTest, BugTokenProbabilityCoversTheBugSpan) {
  const auto& c = testing::StatusFlagsAdd();
  auto map = obfuscate::BuildRenaming(c, obfuscate::Scope::kClass);
  llm::Generation g;
  g.text = "```python\n" + obfuscate::ObfuscateCode(AddMethod("+"), map) + "```\n";
  std::size_t plus = g.text.find(" + ") + 1;
  g.token_probs = std::vector<llm::TokenProb>{
      {g.text.substr(0, plus), 0.4, 0}, {"+", 0.9, plus}, {g.text.substr(plus + 1), 0.4,
                                                             plus + 1}};
  AtpResult atp = BugTokenProbability(g, c.solution_method, map, StatusFlagsTemplate(4).locations);
  ASSERT_TRUE(atp.value);
  EXPECT_DOUBLE_EQ(*atp.value, 0.9);
  EXPECT_EQ(atp.alignment, "offsets");
  g.token_probs.reset();
  EXPECT_FALSE(BugTokenProbability(g, c.solution_method, map,
                                   StatusFlagsTemplate(4).locations)
                   .value);
}

TEST(EvaluateTest, RelativeDropReproducesPublishedTables) {
  EXPECT_EQ(FormatFixed(RelativeDrop(68.67, 53.20)), "22.53");
  EXPECT_EQ(FormatFixed(RelativeDrop(55.79, 49.39)), "11.47");
  EXPECT_EQ(FormatFixed(RelativeDrop(41.67, 41.67)), "0.00");
  int cells = 0;
  for (const auto& cell : oracles::PublishedRelativeCells()) {
    EXPECT_NEAR(RelativeDrop(cell.baseline, cell.value), cell.published, 0.01)
        << cell.table << " " << cell.model << " " << cell.column;
    ++cells;
  }
  EXPECT_EQ(cells, 80);
}

TEST(EvaluateTest, RoundingIsHalfUpAtPresentation) {
  EXPECT_EQ(FormatFixed(0.125), "0.13");
  EXPECT_EQ(FormatFixed(2.675), "2.68");
  EXPECT_EQ(FormatFixed(-7.265), "-7.27");
  EXPECT_EQ(FormatFixed(50.0), "50.00");
}

EvalRecord Record(std::string model, Setting setting, std::string task, bool passed,
                  int total, int resolved, std::string id, std::string source_id = "") {
  EvalRecord r;
  r.model_id = std::move(model);
  r.setting = setting;
  r.task = std::move(task);
  r.passed = passed;
  r.bugs_total = total;
  r.bugs_resolved = resolved;
  r.resolved.assign(total, false);
  r.instance_id = std::move(id);
  r.source_instance_id = source_id.empty() ? r.instance_id : std::move(source_id);
  r.generator_model_id = "gen";
  r.atp_alignment = "unavailable";
  return r;
}

const ReportRow* Find(const Report& report, const std::string& task,
                      const std::string& setting) {
  for (const auto& row : report.rows) {
    if (row.task == task && row.setting == setting) return &row;
  }
  return nullptr;
}

TEST(EvaluateTest, ReportMatchesHandComputedTable) {
  std::vector<EvalRecord> records;
  // Ten CtxBug records, five passing; bugs 2 each, 7 resolved in total.
  for (int i = 0; i < 10; ++i) {
    records.push_back(Record("m", Setting::kWithCtxBugs,
                             i < 6 ? "Functionality" : "Interface", i % 2 == 0, 2,
                             i < 7 ? 1 : 0, "b" + std::to_string(i)));
    records.push_back(Record("m", Setting::kWithoutCtxBugs,
                             i < 6 ? "Functionality" : "Interface", i < 8, 2, 2,
                             "b" + std::to_string(i)));
  }
  // IsoBugs exist for b0 and b1 only.
  records.push_back(Record("m", Setting::kWithIsoBugs, "Functionality", true, 2, 2, "b0~iso", "b0"));
  records.push_back(Record("m", Setting::kWithIsoBugs, "Functionality", false, 2, 1, "b1~iso", "b1"));

  Report report = BuildReport(records);
  const ReportRow* all = Find(report, "All", "with_ctxbugs");
  ASSERT_TRUE(all);
  EXPECT_EQ(FormatFixed(all->pass_at_1), "50.00");
  EXPECT_EQ(all->bugs_total, 20);
  EXPECT_EQ(all->bugs_resolved, 7);
  EXPECT_EQ(FormatFixed(all->rr), "35.00");
  // 80.00 without -> 50.00 with: 37.50; RR 100 -> 35: 65.00.
  EXPECT_EQ(FormatFixed(*all->relative_pass_drop), "37.50");
  EXPECT_EQ(FormatFixed(*all->relative_rr_drop), "65.00");

  const ReportRow* paired = Find(report, "All", std::string(kPairedSetting));
  ASSERT_TRUE(paired);
  EXPECT_EQ(paired->cases, 2);
  EXPECT_EQ(FormatFixed(paired->pass_at_1), "50.00");  // b0 passes, b1 fails
  // IsoBug Pass@1 50.00 equals it: 0.00. RR iso 75, ctx 50: 33.33.
  EXPECT_EQ(FormatFixed(*paired->relative_pass_drop), "0.00");
  EXPECT_EQ(FormatFixed(*paired->relative_rr_drop), "33.33");

  EXPECT_FALSE(Find(report, "All", "without_ctxbugs")->relative_pass_drop);
  EXPECT_FALSE(Find(report, "Identifier", "with_ctxbugs"));
  EXPECT_FALSE(report.notes.empty());

  std::string csv = ReportCsv(report.rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,task,setting,cases,pass_at_1,bugs_total,bugs_resolved,rr,"
            "relative_pass_drop,relative_rr_drop");
  EXPECT_NE(csv.find("m,All,with_ctxbugs,10,50.00,20,7,35.00,37.50,65.00\n"),
            std::string::npos);
  EXPECT_EQ(ReportCsv(BuildReport(records).rows), csv);
}

TEST(EvaluateTest, PassAtOneEdgeValues) {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 4; ++i) {
    records.push_back(Record("m", Setting::kWithCtxBugs, "Identifier", false, 1, 0,
                             "x" + std::to_string(i)));
  }
  Report report = BuildReport(records);
  EXPECT_EQ(FormatFixed(Find(report, "All", "with_ctxbugs")->pass_at_1), "0.00");
  EXPECT_EQ(FormatFixed(Find(report, "All", "with_ctxbugs")->rr), "0.00");
}

TEST(EvaluateTest, RecordJsonRoundTrips) {
  EvalRecord r = Record("m", Setting::kWithIsoBugs, "Dependency", true, 3, 2, "i", "s");
  r.atp = 0.75;
  r.atp_alignment = "greedy";
  r.raw_output = "```python\npass\n```";
  EXPECT_EQ(RecordFromJson(ToJson(r)), r);
}

}  // namespace
}  // namespace ctxbug::evaluate
