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

#ifndef CTXBUG_CORPUS_HPP_
#define CTXBUG_CORPUS_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"

namespace ctxbug::corpus {

// One target method of the class-level corpus.
struct AdaptationCase {
  std::string case_id;
  std::string class_name;
  std::string class_context;  // the full class file, solution included
  std::string method_name;
  std::string solution_method;
  std::string requirement;
  std::string test_suite;
  std::vector<std::string> lib_deps;
  std::string topic;
  std::string language = "python";

  bool operator==(const AdaptationCase&) const = default;
};

// The class context with the target method and its direct in-class callers
// removed; what an adaptation prompt shows as the target environment.
struct TargetContext {
  std::string case_id;
  std::string context_source;
  std::vector<std::string> removed_methods;
};

struct Diagnostic {
  enum class Severity { kWarning, kError };
  Severity severity = Severity::kError;
  std::size_t line = 0;  // 1-based JSONL line, 0 when not line-specific
  std::string case_id;
  std::string message;
};

struct LoadResult {
  std::vector<AdaptationCase> cases;
  std::vector<Diagnostic> diagnostics;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json ToJson(const AdaptationCase& c);
AdaptationCase FromJson(const nlohmann::json& j);

// Reads a JSONL corpus. Missing files and duplicate case ids throw
// CorpusError; records violating a case invariant are skipped with a
// diagnostic. Stored lib_deps that disagree with the class file's imports
// are replaced by the recomputed list and reported as a warning.
LoadResult LoadCorpus(const std::filesystem::path& path,
                      const python::NameSet& stdlib =
                          python::DefaultStdlibModules());
LoadResult ParseCorpus(std::string_view jsonl,
                       const python::NameSet& stdlib =
                           python::DefaultStdlibModules());
void WriteCorpus(const std::filesystem::path& path,
                 const std::vector<AdaptationCase>& cases);
std::string SerializeCorpus(const std::vector<AdaptationCase>& cases);

// Empty when the case satisfies every invariant, else the first violation.
std::string ValidateCase(const AdaptationCase& c);

// Removes the target method and every in-class method whose body calls it
// (one hop, via self/cls/class-name receiver or bare name). Throws
// CorpusError when the target is absent.
TargetContext BuildTargetContext(const AdaptationCase& c);

// Sorted, deduplicated third-party import roots of a source file.
std::vector<std::string> ExtractLibDeps(std::string_view source,
                                        const python::NameSet& stdlib =
                                            python::DefaultStdlibModules());
std::vector<std::string> ExtractLibDeps(const AdaptationCase& c,
                                        const python::NameSet& stdlib =
                                            python::DefaultStdlibModules());

// Location of the target method inside the class context.
struct MethodSlot {
  syntax::Span span;       // slot span (decorators included)
  syntax::Span def_span;   // the function_definition itself
  std::size_t indent = 0;  // column of the definition line
};
MethodSlot FindMethodSlot(const syntax::Tree& class_tree,
                          std::string_view class_name,
                          std::string_view method_name);

// Converts the public ClassEval JSON release (an array of class records)
// into cases, one per method. The requirement is the class description
// followed by the method description.
std::vector<AdaptationCase> ConvertClassEval(const nlohmann::json& release,
                                             const python::NameSet& stdlib =
                                                 python::DefaultStdlibModules());

}  // namespace ctxbug::corpus

#endif  // CTXBUG_CORPUS_HPP_
