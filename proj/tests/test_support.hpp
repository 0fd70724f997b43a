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

#ifndef CTXBUG_TESTS_TEST_SUPPORT_HPP_
#define CTXBUG_TESTS_TEST_SUPPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "ctxbug/corpus.hpp"
#include "ctxbug/testexec.hpp"

namespace ctxbug::testing {

std::filesystem::path FixturePath(const std::string& relative);
std::string ReadFixture(const std::string& relative);

// The 20-case fixture corpus; fails the calling test on load errors.
const std::vector<corpus::AdaptationCase>& MiniCorpus();
const corpus::AdaptationCase& MiniCase(const std::string& case_id);

// The hand-encoded status-flag case: `add` combines flags with "|".
const corpus::AdaptationCase& StatusFlagsAdd();

// Runs the Python result-file writer in place of the real shim.
testexec::ShimConfig MockShim();

// Fresh directory under the system temp dir, removed by the caller.
std::filesystem::path MakeTempDir(const std::string& prefix);

}  // namespace ctxbug::testing

#endif  // CTXBUG_TESTS_TEST_SUPPORT_HPP_
