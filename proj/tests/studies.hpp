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

#ifndef CTXBUG_TESTS_STUDIES_HPP_
#define CTXBUG_TESTS_STUDIES_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ctxbug/corpus.hpp"
#include "ctxbug/differ.hpp"

// Whole-corpus property checks shared by the unit tests and the
// acceptance runner. Each returns trial counts plus the first failures.
namespace ctxbug::studies {

struct StudyResult {
  int trials = 0;
  int passed = 0;
  std::vector<std::string> failures;  // capped at kMaxFailures
  std::vector<std::string> notes;

  static constexpr std::size_t kMaxFailures = 20;

  bool ok() const { return trials > 0 && passed == trials; }
  void Record(bool success, const std::string& failure);
  // One-line summary, e.g. "312/312".
  std::string Summary() const;
};

// Per-rule placeholder spans against the brute-force oracle, plus
// placeholder purity and byte-exact refill of every template.
StudyResult PerturbationOracle(const std::vector<corpus::AdaptationCase>& cases);

// Deobfuscation inverts obfuscation on methods, class files, templates,
// and requirements; parseable sources keep their kind sequence.
StudyResult ObfuscationRoundTrip(const std::vector<corpus::AdaptationCase>& cases);

// Random same-kind single-token edits over corpus methods: exactly the
// edited leaf is flagged and nothing changes outside it.
StudyResult SingleTokenEdits(const std::vector<corpus::AdaptationCase>& cases,
                             int edits, std::uint64_t seed);

// Random labeled trees with at most `max_nodes` nodes: replaying the edit
// script reproduces the destination tree.
StudyResult RandomTreeScripts(int pairs, int max_nodes, std::uint64_t seed);

// Tree-matching resolution counts against the text-splice oracle.
StudyResult ResolutionOracle(const std::vector<corpus::AdaptationCase>& cases,
                             int random_mixes, unsigned seed);

// Labeled tree used to build synthetic DiffTrees.
struct Shape {
  std::string type;
  std::string label;
  std::vector<Shape> children;
};

differ::DiffTree BuildTree(const Shape& root);
int CountNodes(const Shape& shape);

class RandomShapes {
 public:
  explicit RandomShapes(std::uint64_t seed) : rng_(seed) {}

  Shape Tree(int max_nodes);
  // Applies 1..3 random structural edits; leaves the root in place.
  Shape Mutate(Shape s, int max_nodes);

 private:
  std::size_t Pick(std::size_t n);
  bool Coin() { return Pick(2) == 0; }
  std::string Label();
  std::string InnerType();
  Shape Leaf();

  std::mt19937_64 rng_;
};

}  // namespace ctxbug::studies

#endif  // CTXBUG_TESTS_STUDIES_HPP_
