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

#ifndef CTXBUG_TESTEXEC_HPP_
#define CTXBUG_TESTEXEC_HPP_

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"

// Candidate assembly and sandboxed test execution through an external
// shim process.
namespace ctxbug::testexec {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssembledProgram {
  std::string case_id;
  std::string module_source;
  std::string tests_source;
};

// Replaces the target method in class_context with `candidate_method`,
// re-indented to the slot and renamed to method_name if needed. Throws
// AssemblyError when the candidate is not a single method definition.
AssembledProgram Assemble(const corpus::AdaptationCase& c,
                          std::string_view candidate_method);

enum class Verdict { kPass, kFail, kError };
std::string_view VerdictName(Verdict v);
Verdict VerdictFromName(std::string_view name);

struct TestResult {
  std::string name;
  Verdict verdict = Verdict::kError;
  std::string message;

  bool operator==(const TestResult&) const = default;
};

struct TestOutcome {
  std::vector<TestResult> tests;
  bool all_passed = false;
  bool timed_out = false;
  double duration_seconds = 0.0;
  std::string diagnostic;  // shim failures; empty on protocol success
};

nlohmann::json ToJson(const TestOutcome& outcome);

// How to start the shim. The job and result file paths are appended as
// the final two arguments.
struct ShimConfig {
  std::vector<std::string> command;
  // Extra variables passed through the environment allowlist.
  std::vector<std::string> extra_env;
};

// Runs the program's tests in a fresh child process with a private
// working directory and a scrubbed environment. The wall-clock limit is
// enforced by killing the child's process group. Never throws for shim
// failures; they surface as error verdicts with a diagnostic.
TestOutcome RunTests(const AssembledProgram& program, std::chrono::seconds timeout,
                     const ShimConfig& shim);

// Parses a result file. Exposed for tests.
TestOutcome ParseResult(const nlohmann::json& result);

// Recomputes all_passed: at least one test, every verdict pass, no timeout.
bool AllPassed(const TestOutcome& outcome);

}  // namespace ctxbug::testexec

#endif  // CTXBUG_TESTEXEC_HPP_
