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

#ifndef CTXBUG_DIFFER_HPP_
#define CTXBUG_DIFFER_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/syntax.hpp"

// Two-phase tree matching (greedy top-down on isomorphic subtrees, then
// bottom-up container matching with recovery), edit-script generation,
// and perturbed-location correspondence.
namespace ctxbug::differ {

struct DiffOptions {
  int min_height = 2;
  double min_dice = 0.5;
};

// Kind class used for matching: all operator tokens share one class and
// all literal kinds share another, so "|" may be updated to "+".
std::string CompatClass(std::string_view kind);

// Compact tree used by the matcher. Node ids are pre-order indices.
class DiffTree {
 public:
  struct Node {
    std::string type;
    std::string label;  // leaf text; empty for inner nodes
    int parent = -1;
    std::vector<int> children;
    int height = 1;  // leaves have height 1
    int size = 1;
    syntax::Span span;
    syntax::NodePath path;
  };

  static DiffTree FromSyntax(const syntax::Tree& tree);

  // Builder for synthetic trees: add nodes in pre-order, parent first.
  int AddNode(std::string type, std::string label, int parent);
  // Computes heights and sizes. Called by FromSyntax; call once
  // after the last AddNode for synthetic trees.
  void Finalize();

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[id]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::string& source() const { return source_; }

  // Text of a node: source slice for parsed trees, concatenated leaf
  // labels for synthetic ones.
  std::string Text(int id) const;
  // Returns -1 when no node has the path.
  int FindPath(const syntax::NodePath& path) const;
  bool IsDescendantOrSelf(int node, int ancestor) const;
  std::vector<int> PostOrder() const;
  // Labeled-tree serialization; equal iff the trees are isomorphic.
  std::string Serialize() const;
  std::vector<std::string> LeafLabels() const;

 private:
  std::string source_;
  std::vector<Node> nodes_;
};

struct Mapping {
  std::vector<int> src_to_dst;
  std::vector<int> dst_to_src;

  bool Has(int src, int dst) const { return src_to_dst[src] == dst; }
  std::size_t size() const;
};

Mapping MatchTrees(const DiffTree& src, const DiffTree& dst,
                   const DiffOptions& options = {});

struct EditAction {
  enum class Kind { kInsert, kDelete, kUpdate, kMove };
  Kind kind = Kind::kInsert;
  // Working-tree ids: 0..n-1 are source nodes, n is the synthetic root,
  // larger ids are inserted nodes.
  int node = -1;
  int parent = -1;    // insert and move
  int position = 0;   // insert and move
  std::string type;   // insert
  std::string label;  // insert and update
  int dst_node = -1;  // partner in the destination tree, -1 for delete
};

struct EditScript {
  std::vector<EditAction> actions;
  int source_size = 0;

  bool empty() const { return actions.empty(); }
};

// Chawathe-style script that turns `src` into `dst` under `mapping`.
EditScript ComputeEditScript(const DiffTree& src, const DiffTree& dst,
                             const Mapping& mapping);

// Replays the script on a copy of `src`; returns the serialization of the
// result (compare with dst.Serialize()).
std::string ApplyEditScript(const DiffTree& src, const EditScript& script);

struct Correspondence {
  enum class State { kMatched, kDeleted };
  State state = State::kDeleted;
  syntax::NodePath variant_path;
  bool identical = false;

  bool operator==(const Correspondence&) const = default;
};

// Throws std::invalid_argument when a path does not address a node.
std::vector<Correspondence> LocatePerturbed(
    const DiffTree& src, const DiffTree& dst, const Mapping& mapping,
    const std::vector<syntax::NodePath>& locations);

// True when any action touches a source node outside every perturbed
// subtree. Inserts count where they attach: inside a perturbed subtree,
// or into the slot of a deleted perturbed node, is allowed.
bool ChangesOutside(const DiffTree& src, const DiffTree& dst,
                    const Mapping& mapping, const EditScript& script,
                    const std::vector<syntax::NodePath>& locations);

// Convenience bundle for a parsed solution/variant pair.
struct Diff {
  DiffTree solution;
  DiffTree variant;
  Mapping mapping;
  EditScript script;
};
Diff DiffSources(const syntax::Tree& solution, const syntax::Tree& variant,
                 const DiffOptions& options = {});

nlohmann::json ToJson(const Diff& diff);

}  // namespace ctxbug::differ

#endif  // CTXBUG_DIFFER_HPP_
