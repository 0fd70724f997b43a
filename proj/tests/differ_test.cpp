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

#include "ctxbug/differ.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"
#include "studies.hpp"
#include "test_support.hpp"

namespace ctxbug::differ {
namespace {

using syntax::NodePath;

// Independent reference: Zhang-Shasha tree edit distance with unit costs
// for insert, delete, and relabel (type and label must both agree).
class ZhangShasha {
 public:
  explicit ZhangShasha(const DiffTree& tree) : tree_(tree) {
    Index(0);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      bool key = true;
      for (std::size_t j = i + 1; j < order_.size(); ++j) {
        if (leftmost_[j] == leftmost_[i]) key = false;
      }
      if (key) keyroots_.push_back(static_cast<int>(i));
    }
  }

  static int Distance(const DiffTree& a, const DiffTree& b) {
    ZhangShasha x(a);
    ZhangShasha y(b);
    int n = static_cast<int>(x.order_.size());
    int m = static_cast<int>(y.order_.size());
    std::vector<std::vector<int>> td(n, std::vector<int>(m, 0));
    for (int i : x.keyroots_) {
      for (int j : y.keyroots_) {
        int li = x.leftmost_[i];
        int lj = y.leftmost_[j];
        int rows = i - li + 2;
        int cols = j - lj + 2;
        std::vector<std::vector<int>> fd(rows, std::vector<int>(cols, 0));
        for (int di = 1; di < rows; ++di) fd[di][0] = fd[di - 1][0] + 1;
        for (int dj = 1; dj < cols; ++dj) fd[0][dj] = fd[0][dj - 1] + 1;
        for (int di = 1; di < rows; ++di) {
          for (int dj = 1; dj < cols; ++dj) {
            int ni = li + di - 1;
            int nj = lj + dj - 1;
            if (x.leftmost_[ni] == li && y.leftmost_[nj] == lj) {
              const auto& p = a.node(x.order_[ni]);
              const auto& q = b.node(y.order_[nj]);
              int relabel = (p.type == q.type && p.label == q.label) ? 0 : 1;
              fd[di][dj] = std::min({fd[di - 1][dj] + 1, fd[di][dj - 1] + 1,
                                     fd[di - 1][dj - 1] + relabel});
              td[ni][nj] = fd[di][dj];
            } else {
              int pi = x.leftmost_[ni] - li;
              int pj = y.leftmost_[nj] - lj;
              fd[di][dj] = std::min({fd[di - 1][dj] + 1, fd[di][dj - 1] + 1,
                                     fd[pi][pj] + td[ni][nj]});
            }
          }
        }
      }
    }
    return td[n - 1][m - 1];
  }

 private:
  int Index(int id) {
    int first = -1;
    for (int c : tree_.node(id).children) {
      int l = Index(c);
      if (first < 0) first = l;
    }
    int pos = static_cast<int>(order_.size());
    order_.push_back(id);
    leftmost_.push_back(first < 0 ? pos : first);
    return leftmost_.back();
  }

  const DiffTree& tree_;
  std::vector<int> order_;     // post-order position to node id
  std::vector<int> leftmost_;  // post-order position of leftmost leaf
  std::vector<int> keyroots_;
};

using studies::BuildTree;
using studies::RandomShapes;
using studies::Shape;

std::string Joined(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) out += l + " ";
  return out;
}

TEST(DifferTest, IdenticalTreesGiveTotalMatchingAndEmptyScript) {
  syntax::Tree tree = syntax::Parse("def f(a):\n    return a + 1\n");
  Diff diff = DiffSources(tree, tree);
  EXPECT_EQ(diff.mapping.size(), static_cast<std::size_t>(diff.solution.size()));
  EXPECT_TRUE(diff.script.empty());
}

TEST(DifferTest, OperatorChangeIsSingleUpdate) {
  syntax::Tree a = syntax::Parse("def add(self, s):\n    self.state = self.state | s\n");
  syntax::Tree b = syntax::Parse("def add(self, s):\n    self.state = self.state + s\n");
  Diff diff = DiffSources(a, b);
  EXPECT_EQ(diff.mapping.size(), static_cast<std::size_t>(diff.solution.size()));
  ASSERT_EQ(diff.script.actions.size(), 1u);
  EXPECT_EQ(diff.script.actions[0].kind, EditAction::Kind::kUpdate);
  EXPECT_EQ(diff.script.actions[0].label, "+");
}

TEST(DifferTest, DeletedStatementIsUnmatchedAndDeleted) {
  std::string src = "def f(self, s):\n    self.x = s\n    return self.x\n";
  syntax::Tree a = syntax::Parse(src);
  syntax::Tree b = syntax::Parse("def f(self, s):\n    self.x = s\n");
  Diff diff = DiffSources(a, b);
  int ret = -1;
  for (int i = 0; i < diff.solution.size(); ++i) {
    if (diff.solution.node(i).type == "return_statement") ret = i;
  }
  ASSERT_GE(ret, 0);
  EXPECT_EQ(diff.mapping.src_to_dst[ret], -1);
  std::vector<int> deleted;
  for (const auto& action : diff.script.actions) {
    ASSERT_EQ(action.kind, EditAction::Kind::kDelete);
    deleted.push_back(action.node);
  }
  std::vector<int> subtree;
  for (int i = 0; i < diff.solution.size(); ++i) {
    if (diff.solution.IsDescendantOrSelf(i, ret)) subtree.push_back(i);
  }
  std::sort(deleted.begin(), deleted.end());
  EXPECT_EQ(deleted, subtree);

  auto corr = LocatePerturbed(diff.solution, diff.variant, diff.mapping,
                              {diff.solution.node(ret).path});
  ASSERT_EQ(corr.size(), 1u);
  EXPECT_EQ(corr[0].state, Correspondence::State::kDeleted);
}

TEST(DifferTest, UnaddressableLocationThrows) {
  syntax::Tree a = syntax::Parse("x = 1\n");
  Diff diff = DiffSources(a, a);
  EXPECT_THROW(LocatePerturbed(diff.solution, diff.variant, diff.mapping, {{9, 9, 9}}),
               std::invalid_argument);
}

TEST(DifferTest, InsertedStatementElsewhereIsOutside) {
  syntax::Tree a = syntax::Parse("def f(self, s):\n    self.x = self.x | s\n    return self.x\n");
  syntax::Tree b = syntax::Parse(
      "def f(self, s):\n    self.x = self.x + s\n    print(s)\n    return self.x\n");
  Diff diff = DiffSources(a, b);
  int op = -1;
  for (int i = 0; i < diff.solution.size(); ++i) {
    if (diff.solution.node(i).label == "|") op = i;
  }
  ASSERT_GE(op, 0);
  std::vector<NodePath> locations = {diff.solution.node(op).path};
  EXPECT_TRUE(ChangesOutside(diff.solution, diff.variant, diff.mapping, diff.script,
                             locations));

  syntax::Tree c = syntax::Parse("def f(self, s):\n    self.x = self.x + s\n    return self.x\n");
  Diff inside = DiffSources(a, c);
  EXPECT_FALSE(ChangesOutside(inside.solution, inside.variant, inside.mapping,
                              inside.script, locations));
  Diff none = DiffSources(a, a);
  EXPECT_FALSE(ChangesOutside(none.solution, none.variant, none.mapping, none.script,
                              locations));
}

TEST(DifferTest, MatchingIsDeterministic) {
  syntax::Tree a = syntax::Parse("def f(a, b):\n    return a + b + a\n");
  syntax::Tree b = syntax::Parse("def f(a, b):\n    return b + a + a\n");
  nlohmann::json first = ToJson(DiffSources(a, b));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(ToJson(DiffSources(a, b)), first);
}

TEST(DifferTest, RandomTreeEditScriptsReproduceTheVariant) {
  RandomShapes shapes(20260518);
  constexpr int kPairs = 2000;
  int reproduced = 0;
  double worst_factor = 0.0;
  double factor_sum = 0.0;
  int factor_count = 0;
  for (int i = 0; i < kPairs; ++i) {
    Shape s = shapes.Tree(20);
    Shape d = (i % 4 == 0) ? shapes.Tree(20) : shapes.Mutate(s, 20);
    DiffTree src = BuildTree(s);
    DiffTree dst = BuildTree(d);
    ASSERT_LE(src.size(), 20);
    ASSERT_LE(dst.size(), 20);
    Mapping mapping = MatchTrees(src, dst);
    for (int a = 0; a < src.size(); ++a) {
      int b = mapping.src_to_dst[a];
      if (b >= 0) {
        ASSERT_EQ(mapping.dst_to_src[b], a);
        ASSERT_EQ(src.node(a).type, dst.node(b).type);
      }
    }
    EditScript script = ComputeEditScript(src, dst, mapping);
    std::string rendered = ApplyEditScript(src, script);
    if (rendered == dst.Serialize()) ++reproduced;
    EXPECT_EQ(script.empty(), src.Serialize() == dst.Serialize());
    int minimal = ZhangShasha::Distance(src, dst);
    if (minimal > 0) {
      double factor = static_cast<double>(script.actions.size()) / minimal;
      worst_factor = std::max(worst_factor, factor);
      factor_sum += factor;
      ++factor_count;
    }
  }
  EXPECT_EQ(reproduced, kPairs);
  RecordProperty("worst_script_factor", std::to_string(worst_factor));
  std::printf("edit-script size / minimal edit distance: mean %.3f, worst %.3f over %d pairs\n",
              factor_sum / std::max(1, factor_count), worst_factor, factor_count);
  // Moves let the script undercut the insert/delete distance; it never
  // needs more than one action per node of both trees.
  EXPECT_LE(worst_factor, 12.0);
}

TEST(DifferTest, ZhangShashaReferenceSanity) {
  DiffTree a = BuildTree({"module", "", {{"identifier", "a", {}}, {"op", "+", {}}}});
  DiffTree b = BuildTree({"module", "", {{"identifier", "a", {}}, {"op", "-", {}}}});
  DiffTree c = BuildTree({"module", "", {{"identifier", "a", {}}}});
  EXPECT_EQ(ZhangShasha::Distance(a, a), 0);
  EXPECT_EQ(ZhangShasha::Distance(a, b), 1);
  EXPECT_EQ(ZhangShasha::Distance(a, c), 1);
}

TEST(DifferTest, SingleTokenEditsAreLocatedExactly) {
  studies::StudyResult result = studies::SingleTokenEdits(testing::MiniCorpus(), 1000, 7);
  EXPECT_EQ(result.trials, 1000);
  EXPECT_TRUE(result.ok()) << result.Summary();
  for (const auto& failure : result.failures) ADD_FAILURE() << failure;
}

}  // namespace
}  // namespace ctxbug::differ
