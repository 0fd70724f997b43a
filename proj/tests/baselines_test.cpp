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

#include "ctxbug/baselines.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_support.hpp"

namespace ctxbug::baselines {
namespace {

using identify::BugInstance;
using identify::Verdict;

identify::ClassifyOptions Options() {
  identify::ClassifyOptions options;
  options.shim = testing::MockShim();
  options.timeout = std::chrono::seconds(20);
  return options;
}

// A CtxBug whose bug locations are exactly the template's locations.
BugInstance InstanceFromTemplate(const corpus::AdaptationCase& c,
                                 const perturb::PerturbedTemplate& t) {
  BugInstance b;
  b.kind = identify::BugKind::kCtxBug;
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

BugInstance PlusCtxBug() {
  const auto& c = testing::StatusFlagsAdd();
  for (const auto& t : perturb::PerturbAll(c)) {
    if (t.rule_id != 4) continue;
    auto result = identify::ClassifyCode(
        c, identify::SpecFromTemplate(t, "gen"),
        "def add(self, status):\n    self.state = self.state + status\n"
        "    return self.state\n",
        Options());
    if (result.instance) return *result.instance;
  }
  throw std::logic_error("no rule 4 CtxBug");
}

std::vector<std::string> Texts(const corpus::AdaptationCase& c,
                               const std::vector<perturb::Location>& locations) {
  std::vector<std::string> out;
  for (const auto& loc : locations) {
    out.push_back(c.solution_method.substr(loc.span.start, loc.span.size()));
  }
  return out;
}

TEST(BaselinesTest, MaskedStatusFlagBugMatchesFigure) {
  MaskedCode masked = BuildWithoutCtxBugs(testing::StatusFlagsAdd(), PlusCtxBug());
  EXPECT_NE(masked.source.find("self.state = self.state <INFILL> status"),
            std::string::npos);
  EXPECT_EQ(masked.source_instance_id, "StatusFlags.add#r4@gen");
  EXPECT_EQ(MaskedFromJson(ToJson(masked)).source, masked.source);
}

TEST(BaselinesTest, MaskAndMarkRoundTripOnEveryFixtureTemplate) {
  int checked = 0;
  for (const auto& c : testing::MiniCorpus()) {
    for (const auto& t : perturb::PerturbAll(c)) {
      BugInstance b = InstanceFromTemplate(c, t);
      MaskedCode masked = BuildWithoutCtxBugs(c, b);
      EXPECT_EQ(perturb::CountOccurrences(masked.source, perturb::kInfillPlaceholder),
                t.locations.size())
          << t.Id();
      EXPECT_EQ(Unmask(masked.source, Texts(c, masked.locations)), c.solution_method)
          << t.Id();
      MarkedCode marked = BuildMarked(c, b);
      EXPECT_EQ(llm::CountMarkerPairs(marked.source), t.locations.size()) << t.Id();
      EXPECT_EQ(StripMarkers(marked.source), c.solution_method) << t.Id();
      ++checked;
    }
  }
  EXPECT_GT(checked, 150);
}

TEST(BaselinesTest, RejectsIsoBugInput) {
  BugInstance b = PlusCtxBug();
  b.kind = identify::BugKind::kIsoBug;
  EXPECT_THROW(BuildWithoutCtxBugs(testing::StatusFlagsAdd(), b), std::invalid_argument);
}

TEST(BaselinesTest, StubIsoBugIsImplantedAtTheSameLocation) {
  const auto& c = testing::StatusFlagsAdd();
  BugInstance ctxbug = PlusCtxBug();
  llm::ModelConfig config;
  config.model_id = "stub";
  llm::StubBackend backend(config);
  IsoBugAttempt attempt = BuildIsoBug(c, ctxbug, backend, "stub", Options());
  EXPECT_NE(attempt.prompt.text.find("<START>|<END>"), std::string::npos);
  ASSERT_EQ(attempt.classification.verdict, Verdict::kValid)
      << attempt.classification.details << "\n" << attempt.generation.text;
  const BugInstance& iso = *attempt.classification.instance;
  EXPECT_EQ(iso.kind, identify::BugKind::kIsoBug);
  EXPECT_EQ(iso.source_instance_id, ctxbug.instance_id);
  EXPECT_EQ(iso.instance_id, ctxbug.instance_id + "~iso@stub");
  for (const auto& loc : iso.SolutionLocations()) {
    auto locations = ctxbug.SolutionLocations();
    EXPECT_NE(std::find(locations.begin(), locations.end(), loc), locations.end());
  }
}

llm::Generation Fenced(const std::string& code) {
  llm::Generation g;
  g.text = "```python\n" + code + "```\n";
  return g;
}

TEST(BaselinesTest, IsoBugCandidatesGoThroughTheSameFilters) {
  const auto& c = testing::StatusFlagsAdd();
  BugInstance ctxbug = PlusCtxBug();
  auto minus = ClassifyIsoBug(c, ctxbug,
                              Fenced("def add(self, status):\n"
                                     "    self.state = self.state - status\n"
                                     "    return self.state\n"),
                              "gen", Options());
  EXPECT_EQ(minus.verdict, Verdict::kValid);
  EXPECT_EQ(ClassifyIsoBug(c, ctxbug, Fenced(c.solution_method), "gen", Options()).verdict,
            Verdict::kNoDifference);
  auto outside = ClassifyIsoBug(c, ctxbug,
                                Fenced("def add(self, status):\n"
                                       "    self.state = self.state - status\n"
                                       "    return self.state + 1\n"),
                                "gen", Options());
  EXPECT_EQ(outside.verdict, Verdict::kExtraneousChange);
  auto kept_markers = ClassifyIsoBug(c, ctxbug,
                                     Fenced("def add(self, status):\n"
                                            "    self.state = self.state <START>-<END> status\n"
                                            "    return self.state\n"),
                                     "gen", Options());
  EXPECT_EQ(kept_markers.verdict, Verdict::kValid);
}

}  // namespace
}  // namespace ctxbug::baselines
