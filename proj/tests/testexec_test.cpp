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

#include "ctxbug/testexec.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <string>

#include "test_support.hpp"

namespace ctxbug::testexec {
namespace {

using std::chrono::seconds;

TEST(TestexecTest, AssembleReplacesTheTargetMethod) {
  const auto& c = testing::StatusFlagsAdd();
  AssembledProgram p = Assemble(c, "def add(self, status):\n    self.state = self.state + status\n"
                                   "    return self.state\n");
  EXPECT_NE(p.module_source.find("        self.state = self.state + status\n"),
            std::string::npos);
  EXPECT_EQ(p.module_source.find("self.state | status"), std::string::npos);
  EXPECT_FALSE(syntax::Parse(p.module_source).has_errors());
  EXPECT_EQ(p.tests_source, c.test_suite);
}

TEST(TestexecTest, AssembleNormalizesNameAndIndentation) {
  const auto& c = testing::StatusFlagsAdd();
  AssembledProgram p = Assemble(c, "    def combine(self, status):\n        return 0\n");
  EXPECT_NE(p.module_source.find("    def add(self, status):\n        return 0\n"),
            std::string::npos);
}

TEST(TestexecTest, AssembleRejectsNonMethods) {
  const auto& c = testing::StatusFlagsAdd();
  EXPECT_THROW(Assemble(c, "x = 1\n"), AssemblyError);
  EXPECT_THROW(Assemble(c, "def add(self:\n"), AssemblyError);
  EXPECT_THROW(Assemble(c, ""), AssemblyError);
}

TEST(TestexecTest, SolutionPassesEveryFixtureSuite) {
  for (const auto& c : testing::MiniCorpus()) {
    TestOutcome outcome = RunTests(Assemble(c, c.solution_method), seconds(30),
                                   testing::MockShim());
    EXPECT_TRUE(outcome.all_passed) << c.case_id << ": " << ToJson(outcome).dump();
  }
}

TEST(TestexecTest, WrongOperatorFailsTheStatusFlagTest) {
  const auto& c = testing::StatusFlagsAdd();
  TestOutcome outcome = RunTests(
      Assemble(c, "def add(self, status):\n    self.state = self.state + status\n"
                  "    return self.state\n"),
      seconds(30), testing::MockShim());
  EXPECT_FALSE(outcome.all_passed);
  bool saw_fail = false;
  for (const auto& t : outcome.tests) {
    if (t.name.find("test_add_same_flag_twice") != std::string::npos) {
      EXPECT_EQ(t.verdict, Verdict::kFail);
      saw_fail = true;
    }
  }
  EXPECT_TRUE(saw_fail);
}

TEST(TestexecTest, ImportTimeCrashIsAnError) {
  const auto& c = testing::StatusFlagsAdd();
  AssembledProgram p = Assemble(c, c.solution_method);
  p.module_source += "\nraise RuntimeError('boom')\n";
  TestOutcome outcome = RunTests(p, seconds(30), testing::MockShim());
  ASSERT_EQ(outcome.tests.size(), 1u);
  EXPECT_EQ(outcome.tests[0].verdict, Verdict::kError);
  EXPECT_FALSE(outcome.all_passed);
}

TEST(TestexecTest, TimeoutKillsTheChildAndFails) {
  const auto& c = testing::StatusFlagsAdd();
  AssembledProgram p =
      Assemble(c, "def add(self, status):\n    while True:\n        pass\n");
  auto started = std::chrono::steady_clock::now();
  TestOutcome outcome = RunTests(p, seconds(1), testing::MockShim());
  auto elapsed = std::chrono::steady_clock::now() - started;
  EXPECT_TRUE(outcome.timed_out);
  EXPECT_FALSE(outcome.all_passed);
  EXPECT_LT(elapsed, seconds(10));
}

TEST(TestexecTest, EnvironmentIsScrubbed) {
  setenv("CTXBUG_SECRET_FOR_TEST", "leak", 1);
  corpus::AdaptationCase c = testing::StatusFlagsAdd();
  c.test_suite =
      "import os, unittest\n\nclass EnvTest(unittest.TestCase):\n"
      "    def test_env(self):\n"
      "        self.assertNotIn('CTXBUG_SECRET_FOR_TEST', os.environ)\n"
      "        self.assertEqual(os.environ.get('PYTHONHASHSEED'), '0')\n";
  TestOutcome outcome = RunTests(Assemble(c, c.solution_method), seconds(30),
                                 testing::MockShim());
  EXPECT_TRUE(outcome.all_passed) << ToJson(outcome).dump();
  unsetenv("CTXBUG_SECRET_FOR_TEST");
}

TEST(TestexecTest, MissingShimIsReportedNotThrown) {
  const auto& c = testing::StatusFlagsAdd();
  TestOutcome outcome = RunTests(Assemble(c, c.solution_method), seconds(5),
                                 {{"/nonexistent/shim"}, {}});
  EXPECT_FALSE(outcome.all_passed);
  EXPECT_FALSE(outcome.diagnostic.empty());
  EXPECT_FALSE(RunTests(Assemble(c, c.solution_method), seconds(5), {}).all_passed);
}

TEST(TestexecTest, ParseResultAndAllPassed) {
  TestOutcome outcome = ParseResult(nlohmann::json::parse(
      R"({"tests": [{"name": "a", "verdict": "pass", "message": ""}], "duration": 0.1})"));
  EXPECT_TRUE(outcome.all_passed);
  EXPECT_FALSE(AllPassed(ParseResult(nlohmann::json::parse(R"({"tests": []})"))));
  outcome.timed_out = true;
  EXPECT_FALSE(AllPassed(outcome));
  EXPECT_THROW(ParseResult(nlohmann::json::parse("{}")), nlohmann::json::exception);
}

}  // namespace
}  // namespace ctxbug::testexec
