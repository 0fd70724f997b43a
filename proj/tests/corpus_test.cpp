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

#include "ctxbug/corpus.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "ctxbug/text_util.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace ctxbug::corpus {
namespace {

std::vector<std::string> MethodNames(const std::string& source,
                                     const std::string& class_name) {
  syntax::Tree tree = syntax::Parse(source);
  const syntax::Node* class_node = python::FindClass(tree, class_name);
  std::vector<std::string> names;
  if (!class_node) return names;
  for (const auto& site : python::ClassMethods(tree, *class_node)) {
    names.push_back(site.name);
  }
  return names;
}

AdaptationCase StatusFlagsTarget(const std::string& method_name) {
  AdaptationCase c = testing::StatusFlagsAdd();
  c.method_name = method_name;
  return c;
}

TEST(CorpusTest, MiniCorpusLoadsTwentyValidCases) {
  LoadResult loaded = LoadCorpus(testing::FixturePath("mini_corpus.jsonl"));
  EXPECT_EQ(loaded.cases.size(), 20u);
  EXPECT_TRUE(loaded.diagnostics.empty());
  for (const auto& c : loaded.cases) EXPECT_EQ(ValidateCase(c), "") << c.case_id;
}

TEST(CorpusTest, SerializeThenLoadIsAFixpoint) {
  const auto& cases = testing::MiniCorpus();
  LoadResult again = ParseCorpus(SerializeCorpus(cases));
  ASSERT_EQ(again.cases.size(), cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    EXPECT_EQ(again.cases[i], cases[i]) << cases[i].case_id;
  }
  EXPECT_EQ(SerializeCorpus(again.cases), SerializeCorpus(cases));
}

TEST(CorpusTest, EmptyFileYieldsNoCasesAndAWarning) {
  LoadResult loaded = ParseCorpus("");
  EXPECT_TRUE(loaded.cases.empty());
  ASSERT_EQ(loaded.diagnostics.size(), 1u);
  EXPECT_EQ(loaded.diagnostics[0].severity, Diagnostic::Severity::kWarning);
}

TEST(CorpusTest, UnparseableSolutionIsSkippedWithItsCaseId) {
  AdaptationCase broken = testing::StatusFlagsAdd();
  broken.case_id = "Broken.add";
  broken.solution_method = "def add(self, status:\n    return\n";
  std::vector<AdaptationCase> cases = {broken, testing::MiniCase("StatusFlags.remove")};
  LoadResult loaded = ParseCorpus(SerializeCorpus(cases));
  ASSERT_EQ(loaded.cases.size(), 1u);
  EXPECT_EQ(loaded.cases[0].case_id, "StatusFlags.remove");
  ASSERT_EQ(loaded.diagnostics.size(), 1u);
  EXPECT_EQ(loaded.diagnostics[0].case_id, "Broken.add");
  EXPECT_EQ(loaded.diagnostics[0].line, 1u);
}

TEST(CorpusTest, MalformedRecordIsSkipped) {
  std::string jsonl = "{not json}\n" + SerializeCorpus({testing::StatusFlagsAdd()});
  LoadResult loaded = ParseCorpus(jsonl);
  EXPECT_EQ(loaded.cases.size(), 1u);
  ASSERT_EQ(loaded.diagnostics.size(), 1u);
  EXPECT_EQ(loaded.diagnostics[0].line, 1u);
}

TEST(CorpusTest, FatalErrors) {
  EXPECT_THROW(LoadCorpus("/nonexistent/corpus.jsonl"), CorpusError);
  const auto& c = testing::StatusFlagsAdd();
  EXPECT_THROW(ParseCorpus(SerializeCorpus({c, c})), CorpusError);
}

TEST(CorpusTest, TestSuiteMustReferenceTheClass) {
  AdaptationCase c = testing::StatusFlagsAdd();
  c.test_suite = "import unittest\n";
  EXPECT_NE(ValidateCase(c), "");
}

TEST(CorpusTest, StaleLibDepsAreRecomputedWithAWarning) {
  AdaptationCase c = testing::StatusFlagsAdd();
  c.lib_deps = {"requests"};
  LoadResult loaded = ParseCorpus(SerializeCorpus({c}));
  ASSERT_EQ(loaded.cases.size(), 1u);
  EXPECT_TRUE(loaded.cases[0].lib_deps.empty());
  ASSERT_EQ(loaded.diagnostics.size(), 1u);
  EXPECT_EQ(loaded.diagnostics[0].severity, Diagnostic::Severity::kWarning);
}

TEST(CorpusTest, TargetWithoutCallersRemovesOnlyItself) {
  TargetContext context = BuildTargetContext(testing::StatusFlagsAdd());
  EXPECT_EQ(context.removed_methods, std::vector<std::string>({"add"}));
  EXPECT_EQ(MethodNames(context.context_source, "StatusFlags"),
            std::vector<std::string>({"__init__", "has", "remove"}));
}

TEST(CorpusTest, DirectCallerIsRemovedWithTheTarget) {
  TargetContext context = BuildTargetContext(StatusFlagsTarget("has"));
  EXPECT_EQ(context.removed_methods, std::vector<std::string>({"has", "remove"}));
  EXPECT_EQ(MethodNames(context.context_source, "StatusFlags"),
            std::vector<std::string>({"__init__", "add"}));
}

TEST(CorpusTest, MissingTargetIsFatal) {
  EXPECT_THROW(BuildTargetContext(StatusFlagsTarget("absent")), CorpusError);
}

TEST(CorpusTest, TargetContextAgreesWithCallGraphScan) {
  for (const auto& c : testing::MiniCorpus()) {
    SCOPED_TRACE(c.case_id);
    TargetContext context = BuildTargetContext(c);
    EXPECT_EQ(context.removed_methods,
              oracles::RemovedMethodsByScan(c.class_context, c.class_name, c.method_name));
    EXPECT_FALSE(syntax::Parse(context.context_source).has_errors());

    auto before = MethodNames(c.class_context, c.class_name);
    auto after = MethodNames(context.context_source, c.class_name);
    EXPECT_LT(after.size(), before.size());
    for (const auto& name : after) {
      EXPECT_NE(std::find(before.begin(), before.end(), name), before.end());
      EXPECT_EQ(std::find(context.removed_methods.begin(),
                          context.removed_methods.end(), name),
                context.removed_methods.end());
    }

    // Re-inserting the solution at the end of the class body parses.
    std::string reinserted = context.context_source;
    if (!reinserted.empty() && reinserted.back() != '\n') reinserted += '\n';
    reinserted += "\n" + text::IndentFollowingLines("    " + c.solution_method, 4);
    EXPECT_FALSE(syntax::Parse(reinserted).has_errors());
  }
}

TEST(CorpusTest, LibDepsExamples) {
  EXPECT_TRUE(ExtractLibDeps("import json\nfrom collections import deque\n").empty());
  EXPECT_EQ(ExtractLibDeps("import requests\nimport numpy as np\n"
                           "from requests.adapters import HTTPAdapter\n"),
            std::vector<std::string>({"numpy", "requests"}));
  EXPECT_EQ(ExtractLibDeps("import pandas as pd\n"), std::vector<std::string>({"pandas"}));
  EXPECT_TRUE(ExtractLibDeps("from . import sibling\n").empty());
}

TEST(CorpusTest, LibDepsAgreeWithImportScan) {
  std::vector<std::string> sources;
  for (const auto& c : testing::MiniCorpus()) sources.push_back(c.class_context);
  sources.push_back("import os, numpy.linalg as la\nimport json\nfrom scipy import stats\n"
                    "def f():\n    import torch\n");
  for (const auto& source : sources) {
    EXPECT_EQ(ExtractLibDeps(source),
              oracles::ImportRootsByScan(source, python::DefaultStdlibModules()))
        << source;
  }
}

TEST(CorpusTest, StdlibListIsConfigurable) {
  python::NameSet custom = python::ParseNameList("# comment\nnumpy\n");
  EXPECT_TRUE(ExtractLibDeps("import numpy\nimport json\n", custom) ==
              std::vector<std::string>({"json"}));
}

TEST(CorpusTest, ConvertsClassEvalRecordsOnePerMethod) {
  const auto& source = testing::StatusFlagsAdd();
  nlohmann::json release = nlohmann::json::array();
  release.push_back({{"task_id", "ClassEval_0"},
                     {"class_name", "StatusFlags"},
                     {"class_description", "Tracks bit flags."},
                     {"solution_code", source.class_context},
                     {"test", source.test_suite},
                     {"methods_info",
                      {{{"method_name", "add"}, {"method_description", "Adds a flag."}},
                       {{"method_name", "remove"}, {"method_description", ""}}}}});
  auto cases = ConvertClassEval(release);
  ASSERT_EQ(cases.size(), 2u);
  EXPECT_EQ(cases[0].case_id, "ClassEval_0.add");
  EXPECT_EQ(cases[0].requirement, "Tracks bit flags.\n\nAdds a flag.");
  EXPECT_EQ(cases[0].solution_method, source.solution_method);
  EXPECT_EQ(cases[1].requirement, "Tracks bit flags.");
  for (const auto& c : cases) EXPECT_EQ(ValidateCase(c), "") << c.case_id;
}

}  // namespace
}  // namespace ctxbug::corpus
