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

#ifndef CTXBUG_SYNTAX_HPP_
#define CTXBUG_SYNTAX_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxbug::syntax {

// Half-open byte range [start, end) into a source buffer.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  bool Contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  bool Overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }
  auto operator<=>(const Span&) const = default;
};

// Sequence of child indices from the root. Indices count every child,
// named and anonymous alike.
using NodePath = std::vector<std::uint32_t>;

std::string PathToString(const NodePath& path);

struct Node {
  std::string kind;    // grammar kind name, e.g. "binary_operator" or "+"
  std::string field;   // field name under the parent, empty if none
  bool named = false;
  bool error = false;  // ERROR or MISSING node
  Span span;
  NodePath path;
  std::vector<Node> children;

  bool IsLeaf() const { return children.empty(); }
};

// Immutable parse result. Copies share the underlying node storage, so
// `const Node*` obtained from a tree stays valid for the lifetime of any
// copy.
class Tree {
 public:
  const std::string& source() const { return impl_->source; }
  const Node& root() const { return impl_->root; }
  const std::string& grammar() const { return impl_->grammar; }
  bool has_errors() const { return impl_->error_count > 0; }
  std::size_t error_count() const { return impl_->error_count; }

  // Returns nullptr when the path does not address a node.
  const Node* NodeAt(std::span<const std::uint32_t> path) const;
  const Node* Parent(const Node& node) const;
  bool Owns(const Node& node) const;

 private:
  struct Impl {
    std::string source;
    std::string grammar;
    Node root;
    std::size_t error_count = 0;
  };
  explicit Tree(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend Tree Parse(std::string source, std::string_view grammar);
};

inline constexpr std::string_view kPythonGrammar = "python";

// Parses `source` with the named grammar. Unknown grammar throws
// std::invalid_argument; syntax errors are reported through
// Tree::has_errors().
Tree Parse(std::string source, std::string_view grammar = kPythonGrammar);

struct SpanEdit {
  Span span;
  std::string replacement;
};

// Applies non-overlapping edits to `source`. Throws std::invalid_argument
// on overlap or out-of-range spans.
std::string Splice(std::string_view source, std::vector<SpanEdit> edits);

// Exact source slice of `node`. Throws std::invalid_argument when the
// node does not belong to `tree`.
std::string_view NodeText(const Tree& tree, const Node& node);

// Pre-order traversal; returning false from `visit` skips the subtree.
void Walk(const Node& node, const std::function<bool(const Node&)>& visit);

std::vector<const Node*> Leaves(const Node& node);
const Node* ChildByField(const Node& node, std::string_view field);
std::vector<const Node*> ChildrenByField(const Node& node,
                                         std::string_view field);
std::vector<const Node*> NamedChildren(const Node& node);

// Zero-based line and column of a byte offset, for diagnostics.
struct LineColumn {
  std::size_t line = 0;
  std::size_t column = 0;
};
LineColumn ToLineColumn(std::string_view source, std::size_t offset);

}  // namespace ctxbug::syntax

#endif  // CTXBUG_SYNTAX_HPP_
