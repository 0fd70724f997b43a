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

#include "studies.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

#include "ctxbug/evaluate.hpp"
#include "ctxbug/obfuscate.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/syntax.hpp"
#include "oracles.hpp"

namespace ctxbug::studies {

namespace {

using differ::Correspondence;
using syntax::NodePath;

std::vector<std::string> KindSequence(const std::string& source) {
  std::vector<std::string> kinds;
  syntax::Tree tree = syntax::Parse(source);
  syntax::Walk(tree.root(), [&](const syntax::Node& n) {
    kinds.push_back(n.kind);
    return true;
  });
  return kinds;
}

void CollectInner(Shape& s, std::vector<Shape*>& out) {
  if (!s.children.empty() || s.type == "module") out.push_back(&s);
  for (auto& c : s.children) CollectInner(c, out);
}

void CollectAll(Shape& s, std::vector<Shape*>& out) {
  out.push_back(&s);
  for (auto& c : s.children) CollectAll(c, out);
}

// Inner nodes that lost every child become leaves again.
void Normalize(Shape& s) {
  for (auto& c : s.children) Normalize(c);
  if (s.children.empty() && s.type != "identifier" && s.type != "op" &&
      s.type != "literal" && s.type != "module") {
    s.type = "identifier";
    if (s.label.empty()) s.label = "z";
  }
}

// Replacement token of the same kind that keeps the tree shape.
std::string Replacement(const std::string& kind, const std::string& text,
                        std::mt19937_64& rng) {
  if (kind == "identifier") return text + "_q" + std::to_string(rng() % 7);
  if (kind == "integer") return std::to_string(std::stoll(text) + 1 + rng() % 5);
  static const std::vector<std::string> kArith = {"+", "-", "*", "%", "|", "&", "^"};
  static const std::vector<std::string> kCompare = {"<", ">", "<=", ">=", "==", "!="};
  for (const auto* group : {&kArith, &kCompare}) {
    if (std::find(group->begin(), group->end(), text) != group->end()) {
      std::string pick;
      do {
        pick = (*group)[rng() % group->size()];
      } while (pick == text);
      return pick;
    }
  }
  return "";
}

}  // namespace

void StudyResult::Record(bool success, const std::string& failure) {
  ++trials;
  if (success) {
    ++passed;
  } else if (failures.size() < kMaxFailures) {
    failures.push_back(failure);
  }
}

std::string StudyResult::Summary() const {
  return std::to_string(passed) + "/" + std::to_string(trials);
}

StudyResult PerturbationOracle(const std::vector<corpus::AdaptationCase>& cases) {
  StudyResult result;
  std::map<int, int> per_rule;
  for (const auto& c : cases) {
    syntax::Tree solution = syntax::Parse(c.solution_method);
    for (const auto& rule : perturb::Rules()) {
      auto actual = perturb::ApplyRule(c, solution, rule);
      auto expected = oracles::PerturbationTargets(c, rule.rule_id);
      per_rule[rule.rule_id] += static_cast<int>(actual.size());
      std::string where = c.case_id + " rule " + std::to_string(rule.rule_id);
      if (actual.size() != expected.size()) {
        result.Record(false, where + ": " + std::to_string(actual.size()) +
                                 " templates, oracle " + std::to_string(expected.size()));
        continue;
      }
      for (std::size_t i = 0; i < actual.size(); ++i) {
        const auto& t = actual[i];
        std::vector<syntax::Span> spans;
        std::vector<std::string> originals;
        bool paths_ok = true;
        for (const auto& loc : t.locations) {
          spans.push_back(loc.span);
          originals.push_back(c.solution_method.substr(loc.span.start, loc.span.size()));
          const syntax::Node* node = solution.NodeAt(loc.path);
          if (!node || node->span != loc.span) paths_ok = false;
        }
        bool agrees = spans == expected[i].spans &&
                      t.constant_type.value_or("") == expected[i].constant_type;
        bool disjoint = true;
        for (std::size_t a = 0; a < spans.size(); ++a) {
          for (std::size_t b = a + 1; b < spans.size(); ++b) {
            if (spans[a].Overlaps(spans[b])) disjoint = false;
          }
        }
        bool pure = true;
        for (std::string_view other : perturb::kPlaceholders) {
          std::size_t count = perturb::CountOccurrences(t.template_source, other);
          if (count != (other == rule.placeholder ? t.locations.size() : 0u)) pure = false;
        }
        bool refills = perturb::FillPlaceholders(t.template_source, rule.placeholder,
                                                 originals) == c.solution_method;
        std::ostringstream why;
        why << t.Id() << ":" << (agrees ? "" : " oracle mismatch")
            << (paths_ok ? "" : " bad path") << (disjoint ? "" : " overlap")
            << (pure ? "" : " stray placeholder") << (refills ? "" : " refill differs");
        result.Record(agrees && paths_ok && disjoint && pure && refills, why.str());
      }
    }
  }
  for (const auto& [rule, count] : per_rule) {
    result.notes.push_back("rule " + std::to_string(rule) + ": " + std::to_string(count) +
                           " templates");
  }
  return result;
}

StudyResult ObfuscationRoundTrip(const std::vector<corpus::AdaptationCase>& cases) {
  using obfuscate::Scope;
  StudyResult result;
  for (const auto& c : cases) {
    for (Scope scope : {Scope::kMethod, Scope::kClass}) {
      obfuscate::RenamingMap map = obfuscate::BuildRenaming(c, scope);
      std::vector<std::string> sources = {c.solution_method};
      if (scope == Scope::kClass) sources.push_back(c.class_context);
      for (const auto& t : perturb::PerturbAll(c)) sources.push_back(t.template_source);
      for (const auto& source : sources) {
        std::string obfuscated = obfuscate::ObfuscateCode(source, map);
        bool inverse = obfuscate::DeobfuscateCode(obfuscated, map) == source;
        bool parses = !syntax::Parse(source).has_errors();
        bool still_parses = !syntax::Parse(obfuscated).has_errors() == parses;
        // Templates carry placeholders and only parse with error recovery.
        bool same_kinds = !parses || KindSequence(obfuscated) == KindSequence(source);
        result.Record(inverse && still_parses && same_kinds && !map.empty(),
                      c.case_id + ": source round trip failed");
      }
      std::string requirement = obfuscate::ObfuscateText(c.requirement, map);
      result.Record(obfuscate::DeobfuscateText(requirement, map) == c.requirement,
                    c.case_id + ": requirement round trip failed");
    }
  }
  return result;
}

StudyResult SingleTokenEdits(const std::vector<corpus::AdaptationCase>& cases, int edits,
                             std::uint64_t seed) {
  struct Candidate {
    const corpus::AdaptationCase* c;
    NodePath path;
    syntax::Span span;
    std::string kind;
    std::string text;
  };
  std::vector<Candidate> candidates;
  for (const auto& c : cases) {
    syntax::Tree tree = syntax::Parse(c.solution_method);
    for (const syntax::Node* leaf : syntax::Leaves(tree.root())) {
      std::string text(syntax::NodeText(tree, *leaf));
      std::mt19937_64 probe(0);
      const syntax::Node* parent = tree.Parent(*leaf);
      bool operand_kind = leaf->kind == "identifier" || leaf->kind == "integer";
      bool binary = parent && (parent->kind == "binary_operator" ||
                               parent->kind == "comparison_operator");
      if ((operand_kind || binary) && !Replacement(leaf->kind, text, probe).empty()) {
        candidates.push_back({&c, leaf->path, leaf->span, leaf->kind, text});
      }
    }
  }
  StudyResult result;
  if (candidates.empty()) return result;
  result.notes.push_back(std::to_string(candidates.size()) + " editable leaves");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < edits; ++i) {
    const Candidate& cand = candidates[rng() % candidates.size()];
    std::string replacement = Replacement(cand.kind, cand.text, rng);
    std::string variant_source =
        syntax::Splice(cand.c->solution_method, {{cand.span, replacement}});
    syntax::Tree solution = syntax::Parse(cand.c->solution_method);
    syntax::Tree variant = syntax::Parse(variant_source);
    std::string label = cand.c->case_id + " " + cand.text + " -> " + replacement;
    if (variant.has_errors()) {
      result.Record(false, label + ": variant does not parse");
      continue;
    }
    differ::Diff diff = differ::DiffSources(solution, variant);
    std::vector<NodePath> leaves;
    for (const syntax::Node* leaf : syntax::Leaves(solution.root())) {
      leaves.push_back(leaf->path);
    }
    auto corr = differ::LocatePerturbed(diff.solution, diff.variant, diff.mapping, leaves);
    std::vector<NodePath> flagged;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      if (corr[k].state != Correspondence::State::kMatched || !corr[k].identical) {
        flagged.push_back(leaves[k]);
      }
    }
    bool outside = differ::ChangesOutside(diff.solution, diff.variant, diff.mapping,
                                          diff.script, {cand.path});
    result.Record(flagged == std::vector<NodePath>{cand.path} && !outside, label);
  }
  return result;
}

StudyResult RandomTreeScripts(int pairs, int max_nodes, std::uint64_t seed) {
  RandomShapes shapes(seed);
  StudyResult result;
  for (int i = 0; i < pairs; ++i) {
    Shape s = shapes.Tree(max_nodes);
    Shape d = (i % 4 == 0) ? shapes.Tree(max_nodes) : shapes.Mutate(s, max_nodes);
    differ::DiffTree src = BuildTree(s);
    differ::DiffTree dst = BuildTree(d);
    differ::Mapping mapping = differ::MatchTrees(src, dst);
    bool consistent = true;
    for (int a = 0; a < src.size(); ++a) {
      int b = mapping.src_to_dst[a];
      if (b >= 0 && (mapping.dst_to_src[b] != a || src.node(a).type != dst.node(b).type)) {
        consistent = false;
      }
    }
    differ::EditScript script = differ::ComputeEditScript(src, dst, mapping);
    bool reproduced = differ::ApplyEditScript(src, script) == dst.Serialize();
    bool empty_iff_equal = script.empty() == (src.Serialize() == dst.Serialize());
    result.Record(consistent && reproduced && empty_iff_equal,
                  "pair " + std::to_string(i) + ": " + src.Serialize() + " => " +
                      dst.Serialize());
  }
  return result;
}

StudyResult ResolutionOracle(const std::vector<corpus::AdaptationCase>& cases,
                             int random_mixes, unsigned seed) {
  StudyResult result;
  for (const auto& c : cases) {
    for (const auto& trial : oracles::ResolutionTrials(c, random_mixes, seed)) {
      evaluate::Resolution got =
          evaluate::ResolutionRate(c.solution_method, trial.output, trial.locations);
      bool parses = !syntax::Parse(trial.output).has_errors();
      std::ostringstream why;
      why << trial.template_id << ": expected " << trial.expected.first << "/"
          << trial.expected.second << ", got " << got.resolved << "/" << got.total
          << (parses ? "" : " (output does not parse)");
      result.Record(parses && std::make_pair(got.resolved, got.total) == trial.expected,
                    why.str());
    }
  }
  return result;
}

differ::DiffTree BuildTree(const Shape& root) {
  differ::DiffTree tree;
  std::function<void(const Shape&, int)> add = [&](const Shape& s, int parent) {
    int id = tree.AddNode(s.type, s.children.empty() ? s.label : "", parent);
    for (const auto& c : s.children) add(c, id);
  };
  add(root, -1);
  tree.Finalize();
  return tree;
}

int CountNodes(const Shape& shape) {
  int n = 1;
  for (const auto& c : shape.children) n += CountNodes(c);
  return n;
}

Shape RandomShapes::Tree(int max_nodes) {
  Shape root{"module", "", {}};
  int budget = std::uniform_int_distribution<int>(1, max_nodes - 1)(rng_);
  while (budget > 0) {
    std::vector<Shape*> inner;
    CollectInner(root, inner);
    Shape* parent = inner[Pick(inner.size())];
    parent->children.insert(parent->children.begin() + Pick(parent->children.size() + 1),
                            Leaf());
    --budget;
    if (budget > 0 && Coin()) {
      // Promote a leaf into an inner node by giving it a child.
      Shape& fresh = parent->children[Pick(parent->children.size())];
      fresh.type = InnerType();
      fresh.label.clear();
      if (fresh.children.empty()) fresh.children.push_back(Leaf());
      --budget;
    }
  }
  Normalize(root);
  return root;
}

Shape RandomShapes::Mutate(Shape s, int max_nodes) {
  int edits = std::uniform_int_distribution<int>(1, 3)(rng_);
  for (int e = 0; e < edits; ++e) {
    std::vector<Shape*> all;
    CollectAll(s, all);
    Shape* target = all[Pick(all.size())];
    switch (Pick(4)) {
      case 0:  // relabel a leaf
        if (target->children.empty()) target->label = Label();
        break;
      case 1:  // insert a leaf
        if (CountNodes(s) < max_nodes) {
          target->children.insert(
              target->children.begin() + Pick(target->children.size() + 1), Leaf());
          if (target->children.size() == 1) target->type = InnerType();
        }
        break;
      case 2:  // delete a subtree
        if (!target->children.empty()) {
          target->children.erase(target->children.begin() + Pick(target->children.size()));
        }
        break;
      case 3:  // move a child to another position
        if (target->children.size() > 1) {
          auto& kids = target->children;
          std::size_t from = Pick(kids.size());
          Shape moved = kids[from];
          kids.erase(kids.begin() + from);
          kids.insert(kids.begin() + Pick(kids.size() + 1), moved);
        }
        break;
    }
  }
  Normalize(s);
  return s;
}

std::size_t RandomShapes::Pick(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

std::string RandomShapes::Label() {
  static const char* kLabels[] = {"a", "b", "c", "x", "+", "|", "1", "2"};
  return kLabels[Pick(8)];
}

std::string RandomShapes::InnerType() {
  static const char* kTypes[] = {"call", "block", "expr", "args"};
  return kTypes[Pick(4)];
}

Shape RandomShapes::Leaf() {
  static const char* kTypes[] = {"identifier", "op", "literal"};
  return {kTypes[Pick(3)], Label(), {}};
}

}  // namespace ctxbug::studies
