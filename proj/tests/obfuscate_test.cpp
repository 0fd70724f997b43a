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

#include "ctxbug/obfuscate.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "studies.hpp"
#include "test_support.hpp"

namespace ctxbug::obfuscate {
namespace {

TEST(ObfuscateTest, StatusFlagsMapFollowsFirstOccurrence) {
  RenamingMap map = BuildRenaming(testing::StatusFlagsAdd(), Scope::kClass);
  EXPECT_EQ(map.Forward("StatusFlags"), "class_0");
  EXPECT_EQ(map.Forward("state"), "var_0");
  EXPECT_EQ(map.Forward("status"), "var_1");
  EXPECT_EQ(map.Forward("add"), "func_0");
  EXPECT_FALSE(map.Forward("self").has_value());
  EXPECT_FALSE(map.Forward("__init__").has_value());
  EXPECT_EQ(ObfuscateCode("self.state = self.state <INFILL> status\n", map),
            "self.var_0 = self.var_0 <INFILL> var_1\n");
  EXPECT_EQ(ObfuscateText("combine two status values into state", map),
            "combine two var_1 values into var_0");
  EXPECT_EQ(ObfuscateText("a statement", map), "a statement");
}

TEST(ObfuscateTest, EmptyMapIsIdentity) {
  RenamingMap map;
  EXPECT_EQ(ObfuscateCode("x = 1\n", map), "x = 1\n");
  EXPECT_EQ(DeobfuscateText("x", map), "x");
}

TEST(ObfuscateTest, StringLiteralsAreUntouched) {
  RenamingMap map({{"state", "var_0"}}, Scope::kMethod);
  EXPECT_EQ(ObfuscateCode("state = 'state'\n", map), "var_0 = 'state'\n");
}

TEST(ObfuscateTest, LibraryAttributesKeepTheirNames) {
  RenamingMap map({{"items", "var_0"}, {"d", "var_1"}}, Scope::kMethod);
  EXPECT_EQ(ObfuscateCode("self.items = d.items()\n", map), "self.var_0 = var_1.items()\n");
}

TEST(ObfuscateTest, DeobfuscationPassesUnknownNamesThrough) {
  RenamingMap map({{"state", "var_0"}, {"status", "var_1"}}, Scope::kMethod);
  EXPECT_EQ(DeobfuscateCode("tmp = var_0 + var_1\n", map), "tmp = state + status\n");
}

TEST(ObfuscateTest, NonInjectiveMapIsRejected) {
  EXPECT_THROW(RenamingMap({{"a", "var_0"}, {"b", "var_0"}}, Scope::kMethod),
               ObfuscationError);
  EXPECT_THROW(RenamingMap({{"a", "b"}, {"b", "var_0"}}, Scope::kMethod),
               ObfuscationError);
}

TEST(ObfuscateTest, MapJsonRoundTrips) {
  RenamingMap map = BuildRenaming(testing::StatusFlagsAdd(), Scope::kClass);
  RenamingMap back = MapFromJson(ToJson(map));
  EXPECT_EQ(back.pairs(), map.pairs());
  EXPECT_EQ(back.scope(), map.scope());
}

TEST(ObfuscateTest, MapsAreDeterministic) {
  for (const auto& c : testing::MiniCorpus()) {
    EXPECT_EQ(BuildRenaming(c, Scope::kClass).pairs(), BuildRenaming(c, Scope::kClass).pairs());
  }
}

TEST(ObfuscateTest, RoundTripHoldsOnEveryCorpusSource) {
  studies::StudyResult result = studies::ObfuscationRoundTrip(testing::MiniCorpus());
  EXPECT_TRUE(result.ok()) << result.Summary();
  EXPECT_GT(result.trials, 200);
  for (const auto& failure : result.failures) ADD_FAILURE() << failure;
}

TEST(ObfuscateTest, ObfuscatedMethodHidesRenamedIdentifiers) {
  for (const auto& c : testing::MiniCorpus()) {
    RenamingMap map = BuildRenaming(c, Scope::kClass);
    std::string obfuscated = ObfuscateCode(c.solution_method, map);
    EXPECT_EQ(obfuscated.find("def " + c.method_name + "("), std::string::npos) << c.case_id;
  }
}

}  // namespace
}  // namespace ctxbug::obfuscate
