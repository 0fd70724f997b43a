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

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <stdlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctxbug::testing {

namespace fs = std::filesystem;

fs::path FixturePath(const std::string& relative) {
  return fs::path(CTXBUG_FIXTURE_DIR) / relative;
}

std::string ReadFixture(const std::string& relative) {
  std::ifstream in(FixturePath(relative), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + relative);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const std::vector<corpus::AdaptationCase>& MiniCorpus() {
  static const std::vector<corpus::AdaptationCase> cases = [] {
    corpus::LoadResult loaded = corpus::LoadCorpus(FixturePath("mini_corpus.jsonl"));
    for (const auto& d : loaded.diagnostics) {
      ADD_FAILURE() << "corpus diagnostic for " << d.case_id << ": " << d.message;
    }
    return loaded.cases;
  }();
  return cases;
}

const corpus::AdaptationCase& MiniCase(const std::string& case_id) {
  for (const auto& c : MiniCorpus()) {
    if (c.case_id == case_id) return c;
  }
  throw std::out_of_range("no fixture case " + case_id);
}

const corpus::AdaptationCase& StatusFlagsAdd() { return MiniCase("StatusFlags.add"); }

testexec::ShimConfig MockShim() {
  return {{CTXBUG_PYTHON, FixturePath("mock_shim.py").string()}, {}};
}

fs::path MakeTempDir(const std::string& prefix) {
  std::string pattern = (fs::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  return pattern;
}

}  // namespace ctxbug::testing
