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

#ifndef CTXBUG_TESTS_ORACLES_HPP_
#define CTXBUG_TESTS_ORACLES_HPP_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctxbug/corpus.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/syntax.hpp"

// Reference implementations written independently of the library code
// they check. They favour obviousness over speed.
namespace ctxbug::oracles {

struct ExpectedTemplate {
  std::vector<syntax::Span> spans;
  std::string constant_type;  // rule 3 only
};

// Brute-force target enumeration for one rule over a flattened node list.
std::vector<ExpectedTemplate> PerturbationTargets(const corpus::AdaptationCase& c,
                                                  int rule_id);

// Resolution count for an output built by filling `template_source`
// with `output_fills`. A location counts as resolved when substituting
// its solution text into the output leaves the output byte-identical.
std::pair<int, int> SpliceResolution(const std::string& template_source,
                                     const std::string& placeholder,
                                     const std::vector<std::string>& solution_fills,
                                     const std::vector<std::string>& output_fills);

// A parse-compatible wrong replacement for a location's solution text:
// swapped operators, renamed identifiers, shifted constants, or None.
std::string AlternativeFill(int rule_id, const std::string& solution_text);

// One resolution-rate trial: a template filled with a random mix of
// solution and alternative texts, with the oracle's expected count.
struct ResolutionTrial {
  std::string template_id;
  std::vector<perturb::Location> locations;
  std::string output;
  std::pair<int, int> expected;
};

// Trials per template: all-solution, all-alternative, and `random_mixes`
// seeded random mixes.
std::vector<ResolutionTrial> ResolutionTrials(const corpus::AdaptationCase& c,
                                              int random_mixes, unsigned seed);

// Relative drop in percent, rounded half-up to two decimals.
double RelativeDrop(double baseline, double value);

// One published relative-percent cell: the CtxBug value, its baseline,
// and the printed relative figure (negative where the table shows a rise).
struct PublishedRelative {
  std::string table;  // "ctx_vs_without" or "ctx_vs_iso"
  std::string model;
  std::string column;  // e.g. "All/Pass@1"
  double value = 0.0;
  double baseline = 0.0;
  double published = 0.0;
};
const std::vector<PublishedRelative>& PublishedRelativeCells();

// Line-based call-graph walk: method names of `class_name` in source
// order whose bodies call `target` through self, cls, the class name, or
// a bare name. The target itself comes first.
std::vector<std::string> RemovedMethodsByScan(const std::string& class_source,
                                              const std::string& class_name,
                                              const std::string& target);

// Line-based import scan: sorted top-level roots of absolute imports
// not listed in `stdlib`.
std::vector<std::string> ImportRootsByScan(const std::string& source,
                                           const std::set<std::string, std::less<>>& stdlib);

}  // namespace ctxbug::oracles

#endif  // CTXBUG_TESTS_ORACLES_HPP_
