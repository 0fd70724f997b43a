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

#include "ctxbug/syntax.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace ctxbug::syntax {
namespace {

std::vector<const Node*> AllNodes(const Tree& tree) {
  std::vector<const Node*> nodes;
  Walk(tree.root(), [&](const Node& n) {
    nodes.push_back(&n);
    return true;
  });
  return nodes;
}

const Node* FirstOfKind(const Tree& tree, const std::string& kind) {
  for (const Node* n : AllNodes(tree)) {
    if (n->kind == kind) return n;
  }
  return nullptr;
}

TEST(SyntaxTest, ParsesAFunctionModule) {
  Tree tree = Parse("def f():\n    return 1\n");
  EXPECT_EQ(tree.root().kind, "module");
  ASSERT_EQ(NamedChildren(tree.root()).size(), 1u);
  EXPECT_EQ(NamedChildren(tree.root())[0]->kind, "function_definition");
  EXPECT_FALSE(tree.has_errors());
  EXPECT_EQ(tree.grammar(), "python");
}

TEST(SyntaxTest, EmptySourceIsAnEmptyModule) {
  Tree tree = Parse("");
  EXPECT_EQ(tree.root().kind, "module");
  EXPECT_TRUE(tree.root().children.empty());
  EXPECT_FALSE(tree.has_errors());
}

TEST(SyntaxTest, SyntaxErrorsAreFlagged) {
  Tree tree = Parse("def f(:");
  EXPECT_TRUE(tree.has_errors());
  EXPECT_GT(tree.error_count(), 0u);
}

TEST(SyntaxTest, UnknownGrammarIsFatal) {
  EXPECT_THROW(Parse("x = 1\n", "cobol"), std::invalid_argument);
}

TEST(SyntaxTest, SpliceExamples) {
  EXPECT_EQ(Splice("abcdef", {{{2, 4}, "XY"}}), "abXYef");
  EXPECT_EQ(Splice("abcdef", {}), "abcdef");
  EXPECT_EQ(Splice("a+b+c", {{{1, 2}, "<INFILL>"}, {{3, 4}, "<INFILL>"}}),
            "a<INFILL>b<INFILL>c");
  EXPECT_EQ(Splice("abc", {{{1, 1}, "-"}}), "a-bc");
}

TEST(SyntaxTest, SpliceRejectsOverlapAndOutOfRange) {
  EXPECT_THROW(Splice("abcdef", {{{1, 3}, "x"}, {{2, 4}, "y"}}), std::invalid_argument);
  EXPECT_THROW(Splice("abc", {{{2, 5}, "x"}}), std::invalid_argument);
}

TEST(SyntaxTest, SpliceBatchesCommuteUnderShiftAdjustment) {
  std::mt19937 rng(7);
  const std::string source = testing::StatusFlagsAdd().class_context;
  for (int trial = 0; trial < 200; ++trial) {
    // Four disjoint spans split into an earlier and a later batch.
    std::vector<std::size_t> cuts;
    for (int i = 0; i < 8; ++i) cuts.push_back(rng() % (source.size() + 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<SpanEdit> edits;
    for (int i = 0; i < 8; i += 2) {
      edits.push_back({{cuts[i], cuts[i + 1]}, std::string(rng() % 4, 'a' + i)});
    }
    std::vector<SpanEdit> first = {edits[0], edits[1]};
    std::vector<SpanEdit> second = {edits[2], edits[3]};
    std::string once = Splice(source, edits);
    std::string later_first = Splice(source, second);
    EXPECT_EQ(Splice(later_first, first), once);
    // Applying the earlier batch first shifts the later one.
    std::string earlier_first = Splice(source, first);
    long delta = 0;
    for (const auto& e : first) {
      delta += static_cast<long>(e.replacement.size()) - static_cast<long>(e.span.size());
    }
    for (auto& e : second) {
      e.span.start += delta;
      e.span.end += delta;
    }
    EXPECT_EQ(Splice(earlier_first, second), once);
  }
}

TEST(SyntaxTest, NodeTextExamples) {
  Tree ret = Parse("return 1");
  const Node* stmt = FirstOfKind(ret, "return_statement");
  ASSERT_NE(stmt, nullptr);
  EXPECT_EQ(NodeText(ret, *stmt), "return 1");
  EXPECT_EQ(NodeText(ret, ret.root()), "return 1");

  Tree op = Parse("a | b");
  const Node* bar = FirstOfKind(op, "|");
  ASSERT_NE(bar, nullptr);
  EXPECT_EQ(NodeText(op, *bar), "|");

  Tree other = Parse("a | b");
  EXPECT_THROW(NodeText(other, *bar), std::invalid_argument);
}

TEST(SyntaxTest, LeavesTileTheSourceAndPathsRoundTrip) {
  for (const auto& c : testing::MiniCorpus()) {
    SCOPED_TRACE(c.case_id);
    for (const std::string& source : {c.class_context, c.solution_method, c.test_suite}) {
      Tree tree = Parse(source);
      ASSERT_FALSE(tree.has_errors());
      // Leaves in order plus the gaps between them rebuild the source.
      std::string rebuilt;
      std::size_t cursor = 0;
      for (const Node* leaf : Leaves(tree.root())) {
        ASSERT_GE(leaf->span.start, cursor);
        rebuilt += source.substr(cursor, leaf->span.start - cursor);
        rebuilt += NodeText(tree, *leaf);
        cursor = leaf->span.end;
      }
      rebuilt += source.substr(cursor);
      EXPECT_EQ(rebuilt, source);

      for (const Node* n : AllNodes(tree)) {
        EXPECT_EQ(tree.NodeAt(n->path), n) << PathToString(n->path);
        std::size_t previous_end = n->span.start;
        for (const Node& child : n->children) {
          EXPECT_TRUE(n->span.Contains(child.span));
          EXPECT_GE(child.span.start, previous_end);
          previous_end = child.span.end;
        }
      }
    }
  }
}

TEST(SyntaxTest, ParentAndFieldAccess) {
  Tree tree = Parse("def f(x):\n    return x + 1\n");
  const Node* fn = FirstOfKind(tree, "function_definition");
  ASSERT_NE(fn, nullptr);
  const Node* name = ChildByField(*fn, "name");
  ASSERT_NE(name, nullptr);
  EXPECT_EQ(NodeText(tree, *name), "f");
  EXPECT_EQ(tree.Parent(*name), fn);
  EXPECT_EQ(tree.Parent(tree.root()), nullptr);
  EXPECT_EQ(tree.NodeAt(NodePath{99}), nullptr);
}

TEST(SyntaxTest, LineColumnForDiagnostics) {
  LineColumn lc = ToLineColumn("ab\ncd\n", 4);
  EXPECT_EQ(lc.line, 1u);
  EXPECT_EQ(lc.column, 1u);
}

}  // namespace
}  // namespace ctxbug::syntax
