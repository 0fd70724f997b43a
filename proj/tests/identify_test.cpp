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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_support.hpp"

namespace ctxbug::identify {
namespace {

const perturb::PerturbedTemplate& TemplateFor(int rule_id) {
  static const std::vector<perturb::PerturbedTemplate> templates =
      perturb::PerturbAll(testing::StatusFlagsAdd());
  for (const auto& t : templates) {
    if (t.rule_id == rule_id) return t;
  }
  throw std::logic_error("no template for rule");
}

ClassifyOptions Options() {
  ClassifyOptions options;
  options.shim = testing::MockShim();
  options.timeout = std::chrono::seconds(20);
  return options;
}

Classification Classify(int rule_id, const std::string& code) {
  return ClassifyCode(testing::StatusFlagsAdd(),
                      SpecFromTemplate(TemplateFor(rule_id), "gen"), code, Options());
}

constexpr char kPlusVariant[] =
    "def add(self, status):\n"
    "    self.state = self.state + status\n"
    "    return self.state\n";

TEST(IdentifyTest, IdenticalVariantHasNoDifference) {
  auto result = Classify(4, testing::StatusFlagsAdd().solution_method);
  EXPECT_EQ(result.verdict, Verdict::kNoDifference);
  EXPECT_FALSE(result.instance);
}

TEST(IdentifyTest, OperatorSwapThatFailsTestsIsValid) {
  auto result = Classify(4, kPlusVariant);
  ASSERT_EQ(result.verdict, Verdict::kValid) << result.details;
  ASSERT_TRUE(result.instance);
  const BugInstance& bug = *result.instance;
  EXPECT_EQ(bug.instance_id, "StatusFlags.add#r4@gen");
  EXPECT_EQ(bug.kind, BugKind::kCtxBug);
  ASSERT_EQ(bug.bug_locations.size(), 1u);
  EXPECT_EQ(bug.bug_locations[0].solution_text, "|");
  EXPECT_EQ(bug.bug_locations[0].variant_text, "+");
  EXPECT_EQ(bug.bug_locations[0].correspondence.state,
            differ::Correspondence::State::kMatched);
  ASSERT_TRUE(result.outcome);
  bool failed_duplicate_add = false;
  for (const auto& t : result.outcome->tests) {
    if (t.name.find("test_add_same_flag_twice") != std::string::npos) {
      failed_duplicate_add = t.verdict != testexec::Verdict::kPass;
    }
  }
  EXPECT_TRUE(failed_duplicate_add);
}

TEST(IdentifyTest, DeletedReturnIsValidWithDeletedLocation) {
  auto result = Classify(2,
                         "def add(self, status):\n"
                         "    self.state = self.state | status\n");
  ASSERT_EQ(result.verdict, Verdict::kValid) << result.details;
  ASSERT_EQ(result.instance->bug_locations.size(), 1u);
  EXPECT_EQ(result.instance->bug_locations[0].correspondence.state,
            differ::Correspondence::State::kDeleted);
  EXPECT_EQ(result.instance->bug_locations[0].solution_text, "return self.state");
}

TEST(IdentifyTest, EditOutsideThePerturbedNodeIsExtraneous) {
  auto result = Classify(4,
                         "def add(self, status):\n"
                         "    print(status)\n"
                         "    self.state = self.state + status\n"
                         "    return self.state\n");
  EXPECT_EQ(result.verdict, Verdict::kExtraneousChange);
}

TEST(IdentifyTest, EquivalentOperationPassesTests) {
  auto result = Classify(5,
                         "def add(self, status):\n"
                         "    self.state = status | self.state\n"
                         "    return self.state\n");
  EXPECT_EQ(result.verdict, Verdict::kPassesTests) << result.details;
  EXPECT_FALSE(result.instance);
}

TEST(IdentifyTest, BrokenSyntaxIsUnparseable) {
  EXPECT_EQ(Classify(4, "def add(self, status):\n    self.state = (\n").verdict,
            Verdict::kUnparseable);
  EXPECT_EQ(Classify(4, "x = 1\n").verdict, Verdict::kUnparseable);
}

TEST(IdentifyTest, MissingCodeIsEmpty) {
  EXPECT_EQ(Classify(4, "").verdict, Verdict::kEmpty);
  llm::Generation prose;
  prose.text = "I cannot help with that request.";
  auto result = ClassifyVariant(testing::StatusFlagsAdd(),
                                SpecFromTemplate(TemplateFor(4), "gen"), prose,
                                obfuscate::RenamingMap(), Options());
  EXPECT_EQ(result.verdict, Verdict::kEmpty);
}

TEST(IdentifyTest, RepeatedBugIsDuplicate) {
  std::vector<Classification> results = {
      Classify(4, kPlusVariant),
      Classify(4, std::string(kPlusVariant) + "\n\n"),
  };
  ASSERT_EQ(results[1].verdict, Verdict::kValid);
  MarkDuplicates(results);
  EXPECT_EQ(results[0].verdict, Verdict::kValid);
  EXPECT_EQ(results[1].verdict, Verdict::kDuplicate);
  EXPECT_FALSE(results[1].instance);
}

TEST(IdentifyTest, AllSevenVerdictsHaveNames) {
  for (Verdict v : kAllVerdicts) EXPECT_EQ(VerdictFromName(VerdictName(v)), v);
  EXPECT_THROW(VerdictFromName("bogus"), std::invalid_argument);
}

TEST(IdentifyTest, ObfuscatedGenerationIsDeobfuscatedBeforeClassification) {
  const auto& c = testing::StatusFlagsAdd();
  auto map = obfuscate::BuildRenaming(c, obfuscate::Scope::kMethod);
  llm::Generation generation;
  generation.text = "Here is the method:\n```python\n" +
                    obfuscate::ObfuscateCode(kPlusVariant, map) + "```\n";
  auto result = ClassifyVariant(c, SpecFromTemplate(TemplateFor(4), "gen"), generation,
                                map, Options());
  ASSERT_EQ(result.verdict, Verdict::kValid) << result.details;
  EXPECT_EQ(result.instance->method_source + "\n", kPlusVariant);
}

TEST(IdentifyTest, FailedGenerationIsAnInfrastructureError) {
  llm::Generation generation;
  generation.failed = true;
  generation.error = "HTTP 500";
  EXPECT_THROW(ClassifyVariant(testing::StatusFlagsAdd(),
                               SpecFromTemplate(TemplateFor(4), "gen"), generation,
                               obfuscate::RenamingMap(), Options()),
               InfrastructureError);
}

TEST(IdentifyTest, BrokenShimIsAnInfrastructureError) {
  ClassifyOptions options = Options();
  options.shim.command = {"/nonexistent/shim"};
  EXPECT_THROW(ClassifyCode(testing::StatusFlagsAdd(),
                            SpecFromTemplate(TemplateFor(4), "gen"), kPlusVariant, options),
               InfrastructureError);
}

BugInstance Instance(std::string case_id, std::string source, int rule_id = 4,
                     std::string generator = "gen") {
  BugInstance b;
  b.case_id = std::move(case_id);
  b.method_source = std::move(source);
  b.rule_id = rule_id;
  b.generator_model_id = std::move(generator);
  b.instance_id = b.case_id + "#" + std::to_string(rule_id);
  return b;
}

TEST(IdentifyTest, CleanKeepsFirstAndIsIdempotent) {
  std::vector<BugInstance> input = {
      Instance("A.f", "def f():\n    return 1\n"),
      Instance("A.f", "def f():\n        return 1\n\n"),
      Instance("B.f", "def f():\n    return 1\n"),
      Instance("A.f", "def f():\n    return 1  # different\n"),
  };
  input[1].instance_id = "second";
  auto once = Clean(input);
  ASSERT_EQ(once.size(), 3u);
  EXPECT_EQ(once[0].instance_id, input[0].instance_id);
  EXPECT_EQ(Clean(once), once);
}

TEST(IdentifyTest, SummarizeCountsCasesAndBugs) {
  std::vector<BugInstance> input = {
      Instance("A.f", "a", 4),
      Instance("A.f", "b", 5),
      Instance("B.g", "c", 1),
      Instance("B.g", "d", 1, "other"),
  };
  auto rows = Summarize(input);
  auto find = [&](const std::string& gen, const std::string& task) {
    for (const auto& r : rows) {
      if (r.generator_model_id == gen && r.task == task) return r;
    }
    return StatsRow{};
  };
  EXPECT_EQ(find("gen", "Functionality").cases, 1);
  EXPECT_EQ(find("gen", "Functionality").bugs, 2);
  EXPECT_EQ(find("gen", "Interface").bugs, 1);
  EXPECT_EQ(find("gen", "All").cases, 2);
  EXPECT_EQ(find("gen", "All").bugs, 3);
  EXPECT_EQ(find("other", "All").bugs, 1);
  EXPECT_EQ(StatsCsv(rows).substr(0, 31), "generator,kind,task,cases,bugs\n");
}

TEST(IdentifyTest, InstanceJsonRoundTrips) {
  auto result = Classify(4, kPlusVariant);
  ASSERT_TRUE(result.instance);
  EXPECT_EQ(InstanceFromJson(ToJson(*result.instance)), *result.instance);
}

}  // namespace
}  // namespace ctxbug::identify
