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

#include "ctxbug/perturb.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "studies.hpp"
#include "test_support.hpp"

namespace ctxbug::perturb {
namespace {

corpus::AdaptationCase MethodCase(const std::string& method,
                                  const std::string& extra_context = "") {
  corpus::AdaptationCase c;
  c.case_id = "Demo.m";
  c.class_name = "Demo";
  c.method_name = "m";
  c.solution_method = method;
  std::string indented;
  for (std::size_t pos = 0; pos < method.size();) {
    std::size_t end = method.find('\n', pos);
    if (end == std::string::npos) end = method.size();
    std::string line = method.substr(pos, end - pos);
    indented += (line.empty() ? "" : "    ") + line + "\n";
    pos = end + 1;
  }
  c.class_context = extra_context + "class Demo:\n" + indented;
  return c;
}

std::vector<std::string> Sources(const std::vector<PerturbedTemplate>& templates) {
  std::vector<std::string> out;
  for (const auto& t : templates) out.push_back(t.template_source);
  return out;
}

TEST(PerturbTest, RuleTableIsFixed) {
  for (int id = 1; id <= 10; ++id) {
    const RuleSpec& r = Rule(id);
    EXPECT_EQ(r.rule_id, id);
    Task expected = id <= 2 ? Task::kInterface
                    : id <= 7 ? Task::kFunctionality
                    : id <= 9 ? Task::kIdentifier
                              : Task::kDependency;
    EXPECT_EQ(r.task, expected);
    EXPECT_EQ(r.granularity == Granularity::kPerOccurrence, id >= 5 && id <= 7);
  }
  EXPECT_THROW(Rule(0), std::out_of_range);
  EXPECT_THROW(Rule(11), std::out_of_range);
}

TEST(PerturbTest, OperatorRuleMasksTheStatusFlagOperator) {
  const auto& c = testing::StatusFlagsAdd();
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(4));
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_NE(templates[0].template_source.find("self.state = self.state <INFILL> status"),
            std::string::npos);
}

TEST(PerturbTest, ReturnRuleMasksEveryReturnInOneTemplate) {
  auto c = MethodCase("def m(self, x):\n    if x:\n        return 1\n    return 2\n");
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(2));
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].locations.size(), 2u);
  EXPECT_EQ(templates[0].template_source,
            "def m(self, x):\n    if x:\n        <RETURN>\n    <RETURN>\n");
}

TEST(PerturbTest, ConditionalRuleEmitsOneTemplatePerCondition) {
  auto c = MethodCase(
      "def m(self, x):\n    if x > 1:\n        x = 0\n    if x > 1:\n        x = 2\n    "
      "return x\n");
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(6));
  ASSERT_EQ(templates.size(), 2u);
  EXPECT_EQ(templates[0].occurrence_index, 0);
  EXPECT_EQ(templates[1].occurrence_index, 1);
  EXPECT_NE(templates[0].template_source, templates[1].template_source);
}

TEST(PerturbTest, ConstantRuleStratifiesByType) {
  auto c = MethodCase("def m(self):\n    a = 1\n    b = 'x'\n    c = None\n    return a + 2\n");
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(3));
  ASSERT_EQ(templates.size(), 3u);
  EXPECT_EQ(templates[0].constant_type, "integer");
  EXPECT_EQ(templates[0].locations.size(), 2u);
  EXPECT_EQ(templates[1].constant_type, "string");
  EXPECT_EQ(templates[2].constant_type, "none");
}

TEST(PerturbTest, FreeIdentifierRuleKeepsFirstBinding) {
  auto c = MethodCase("def m(self):\n    x = 0\n    y = x + 1\n    return y\n");
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(9));
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].template_source,
            "def m(self):\n    x = 0\n    y = <VAR> + 1\n    return <VAR>\n");
}

TEST(PerturbTest, CallRuleSkipsContextMethods) {
  auto c = MethodCase("def m(self, v):\n    self.helper(v)\n    return len(v)\n\n"
                      "def helper(self, v):\n    return v\n");
  c.solution_method = "def m(self, v):\n    self.helper(v)\n    return len(v)\n";
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(7));
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].template_source,
            "def m(self, v):\n    self.helper(v)\n    return <INFILL>\n");
}

TEST(PerturbTest, LibraryRuleMasksOutermostLibraryExpression) {
  auto c = MethodCase("def m(self, v):\n    return np.sqrt(np.sum(v))\n", "import numpy as np\n\n");
  c.lib_deps = {"numpy"};
  auto templates = ApplyRule(c, syntax::Parse(c.solution_method), Rule(10));
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].template_source, "def m(self, v):\n    return <INFILL>\n");
}

TEST(PerturbTest, ZeroTargetRulesEmitNothing) {
  auto c = MethodCase("def m(self):\n    pass\n");
  auto solution = syntax::Parse(c.solution_method);
  for (int id : {2, 3, 4, 5, 6, 7, 8, 9, 10}) {
    EXPECT_TRUE(ApplyRule(c, solution, Rule(id)).empty()) << id;
  }
}

TEST(PerturbTest, FillPlaceholdersChecksCounts) {
  EXPECT_EQ(FillPlaceholders("a <VAR> <VAR>", "<VAR>", {"x", "y"}), "a x y");
  EXPECT_THROW(FillPlaceholders("a <VAR>", "<VAR>", {}), std::invalid_argument);
  EXPECT_THROW(FillPlaceholders("a", "<VAR>", {"x"}), std::invalid_argument);
}

TEST(PerturbTest, TemplateJsonRoundTrips) {
  const auto& c = testing::StatusFlagsAdd();
  for (const auto& t : PerturbAll(c)) {
    PerturbedTemplate back = TemplateFromJson(ToJson(t));
    EXPECT_EQ(back.template_source, t.template_source);
    EXPECT_EQ(back.locations, t.locations);
    EXPECT_EQ(back.Id(), t.Id());
  }
}

// Every template: locations match the oracle, placeholders are pure,
// locations are non-nested, and re-splicing restores the solution.
TEST(PerturbTest, FixtureCorpusMatchesBruteForceOracle) {
  studies::StudyResult result = studies::PerturbationOracle(testing::MiniCorpus());
  EXPECT_TRUE(result.ok()) << result.Summary();
  EXPECT_GT(result.trials, 100);
  for (const auto& failure : result.failures) ADD_FAILURE() << failure;
  for (const auto& note : result.notes) std::printf("%s\n", note.c_str());
}

}  // namespace
}  // namespace ctxbug::perturb
