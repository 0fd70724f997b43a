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

#include "ctxbug/syntax.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <tree_sitter/api.h>

extern "C" const TSLanguage* tree_sitter_python(void);

namespace ctxbug::syntax {

namespace {

const TSLanguage* LanguageFor(std::string_view grammar) {
  if (grammar == kPythonGrammar) {
    return tree_sitter_python();
  }
  throw std::invalid_argument("grammar unavailable: " + std::string(grammar));
}

struct ParserDeleter {
  void operator()(TSParser* parser) const { ts_parser_delete(parser); }
};
struct TreeDeleter {
  void operator()(TSTree* tree) const { ts_tree_delete(tree); }
};

Node Convert(TSTreeCursor* cursor, NodePath path, std::string field,
             std::size_t* error_count) {
  TSNode ts_node = ts_tree_cursor_current_node(cursor);
  Node node;
  node.kind = ts_node_type(ts_node);
  node.field = std::move(field);
  node.named = ts_node_is_named(ts_node);
  node.error = ts_node_is_error(ts_node) || ts_node_is_missing(ts_node);
  if (node.error) {
    ++*error_count;
  }
  node.span = {ts_node_start_byte(ts_node), ts_node_end_byte(ts_node)};
  node.path = path;
  if (ts_tree_cursor_goto_first_child(cursor)) {
    std::uint32_t index = 0;
    do {
      const char* child_field = ts_tree_cursor_current_field_name(cursor);
      NodePath child_path = path;
      child_path.push_back(index++);
      node.children.push_back(Convert(cursor, std::move(child_path),
                                      child_field ? child_field : "",
                                      error_count));
    } while (ts_tree_cursor_goto_next_sibling(cursor));
    ts_tree_cursor_goto_parent(cursor);
  }
  return node;
}

}  // namespace

std::string PathToString(const NodePath& path) {
  std::ostringstream out;
  out << '/';
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out << '/';
    out << path[i];
  }
  return out.str();
}

const Node* Tree::NodeAt(std::span<const std::uint32_t> path) const {
  const Node* node = &impl_->root;
  for (std::uint32_t index : path) {
    if (index >= node->children.size()) {
      return nullptr;
    }
    node = &node->children[index];
  }
  return node;
}

const Node* Tree::Parent(const Node& node) const {
  if (node.path.empty()) {
    return nullptr;
  }
  return NodeAt(std::span(node.path).first(node.path.size() - 1));
}

bool Tree::Owns(const Node& node) const { return NodeAt(node.path) == &node; }

Tree Parse(std::string source, std::string_view grammar) {
  const TSLanguage* language = LanguageFor(grammar);
  std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
  if (!ts_parser_set_language(parser.get(), language)) {
    throw std::runtime_error("grammar ABI mismatch: " + std::string(grammar));
  }
  std::unique_ptr<TSTree, TreeDeleter> ts_tree(ts_parser_parse_string(
      parser.get(), nullptr, source.data(),
      static_cast<std::uint32_t>(source.size())));
  if (!ts_tree) {
    throw std::runtime_error("parser returned no tree");
  }

  auto impl = std::make_shared<Tree::Impl>();
  TSTreeCursor cursor = ts_tree_cursor_new(ts_tree_root_node(ts_tree.get()));
  impl->root = Convert(&cursor, {}, "", &impl->error_count);
  ts_tree_cursor_delete(&cursor);
  // The root covers the whole buffer, including leading and trailing
  // whitespace tree-sitter leaves outside the module node.
  impl->root.span = {0, source.size()};
  if (impl->error_count == 0 && ts_node_has_error(ts_tree_root_node(ts_tree.get()))) {
    impl->error_count = 1;
  }
  impl->source = std::move(source);
  impl->grammar = std::string(grammar);
  return Tree(std::move(impl));
}

std::string Splice(std::string_view source, std::vector<SpanEdit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const SpanEdit& a, const SpanEdit& b) {
              return a.span.start != b.span.start ? a.span.start > b.span.start
                                                  : a.span.end > b.span.end;
            });
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Span& span = edits[i].span;
    if (span.start > span.end || span.end > source.size()) {
      throw std::invalid_argument("splice span out of range");
    }
    if (i > 0) {
      const Span& later = edits[i - 1].span;
      if (span.Overlaps(later) || span.end > later.start ||
          (span.start == later.start)) {
        throw std::invalid_argument("overlapping splice spans");
      }
    }
  }
  std::string result(source);
  for (const SpanEdit& edit : edits) {
    result.replace(edit.span.start, edit.span.size(), edit.replacement);
  }
  return result;
}

std::string_view NodeText(const Tree& tree, const Node& node) {
  if (!tree.Owns(node)) {
    throw std::invalid_argument("node does not belong to tree: " +
                                PathToString(node.path));
  }
  return std::string_view(tree.source())
      .substr(node.span.start, node.span.size());
}

void Walk(const Node& node, const std::function<bool(const Node&)>& visit) {
  if (!visit(node)) {
    return;
  }
  for (const Node& child : node.children) {
    Walk(child, visit);
  }
}

std::vector<const Node*> Leaves(const Node& node) {
  std::vector<const Node*> leaves;
  Walk(node, [&](const Node& n) {
    if (n.IsLeaf()) leaves.push_back(&n);
    return true;
  });
  return leaves;
}

const Node* ChildByField(const Node& node, std::string_view field) {
  for (const Node& child : node.children) {
    if (child.field == field) return &child;
  }
  return nullptr;
}

std::vector<const Node*> ChildrenByField(const Node& node,
                                         std::string_view field) {
  std::vector<const Node*> result;
  for (const Node& child : node.children) {
    if (child.field == field) result.push_back(&child);
  }
  return result;
}

std::vector<const Node*> NamedChildren(const Node& node) {
  std::vector<const Node*> result;
  for (const Node& child : node.children) {
    if (child.named) result.push_back(&child);
  }
  return result;
}

LineColumn ToLineColumn(std::string_view source, std::size_t offset) {
  LineColumn lc;
  offset = std::min(offset, source.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (source[i] == '\n') {
      ++lc.line;
      lc.column = 0;
    } else {
      ++lc.column;
    }
  }
  return lc;
}

}  // namespace ctxbug::syntax
