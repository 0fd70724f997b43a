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

#include "ctxbug/python_lang.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ctxbug/embedded_resources.hpp"

namespace ctxbug::python {

using syntax::Node;
using syntax::Tree;

NameSet ParseNameList(std::string_view text) {
  NameSet names;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    if (!line.empty() && line.front() != '#') {
      names.emplace(line);
    }
    pos = end + 1;
  }
  return names;
}

NameSet LoadNameList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open name list: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseNameList(buffer.str());
}

const NameSet& Keywords() {
  static const NameSet names = ParseNameList(embedded::kPythonKeywords);
  return names;
}

const NameSet& Builtins() {
  static const NameSet names = ParseNameList(embedded::kPythonBuiltins);
  return names;
}

const NameSet& DefaultStdlibModules() {
  static const NameSet names = ParseNameList(embedded::kStdlibModules);
  return names;
}

namespace {

bool IsOneOf(std::string_view kind, std::initializer_list<std::string_view> kinds) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

std::string Text(const Tree& tree, const Node& node) {
  return std::string(syntax::NodeText(tree, node));
}

void CollectFunctionSites(const Tree& tree, const Node& block,
                          std::vector<FunctionSite>* out) {
  for (const Node& child : block.children) {
    const Node* definition = nullptr;
    if (child.kind == "function_definition") {
      definition = &child;
    } else if (child.kind == "decorated_definition") {
      definition = syntax::ChildByField(child, "definition");
      if (definition && definition->kind != "function_definition") {
        definition = nullptr;
      }
    }
    if (!definition) continue;
    const Node* name = syntax::ChildByField(*definition, "name");
    out->push_back({&child, definition, name ? Text(tree, *name) : ""});
  }
}

void CollectAssignedNames(const Tree& tree, const Node& target, NameSet* out) {
  if (target.kind == "identifier") {
    out->insert(Text(tree, target));
    return;
  }
  if (target.kind == "pattern_list" || target.kind == "tuple_pattern" ||
      target.kind == "list_pattern" || target.kind == "tuple" ||
      target.kind == "list") {
    for (const Node& child : target.children) {
      CollectAssignedNames(tree, child, out);
    }
  }
}

}  // namespace

const Node* FindClass(const Tree& tree, std::string_view class_name) {
  const Node* found = nullptr;
  syntax::Walk(tree.root(), [&](const Node& node) {
    if (found) return false;
    if (node.kind == "class_definition") {
      const Node* name = syntax::ChildByField(node, "name");
      if (name && syntax::NodeText(tree, *name) == class_name) {
        found = &node;
        return false;
      }
    }
    return true;
  });
  return found;
}

std::vector<FunctionSite> ClassMethods(const Tree& tree,
                                       const Node& class_node) {
  std::vector<FunctionSite> sites;
  if (const Node* body = syntax::ChildByField(class_node, "body")) {
    CollectFunctionSites(tree, *body, &sites);
  }
  return sites;
}

std::vector<FunctionSite> TopLevelFunctions(const Tree& tree) {
  std::vector<FunctionSite> sites;
  CollectFunctionSites(tree, tree.root(), &sites);
  return sites;
}

const Node* SoleFunction(const Tree& tree) {
  const Node* found = nullptr;
  for (const Node& child : tree.root().children) {
    if (child.kind == "comment") continue;
    if (found) return nullptr;
    if (child.kind == "function_definition") {
      found = &child;
    } else if (child.kind == "decorated_definition") {
      const Node* definition = syntax::ChildByField(child, "definition");
      if (!definition || definition->kind != "function_definition") {
        return nullptr;
      }
      found = definition;
    } else {
      return nullptr;
    }
  }
  return found;
}

std::vector<ImportBinding> ImportBindings(const Tree& tree) {
  std::vector<ImportBinding> bindings;
  auto root_of = [&](const Node& dotted) {
    for (const Node& child : dotted.children) {
      if (child.kind == "identifier") return Text(tree, child);
    }
    return Text(tree, dotted);
  };
  syntax::Walk(tree.root(), [&](const Node& node) {
    if (node.kind == "import_statement") {
      for (const Node* name : syntax::ChildrenByField(node, "name")) {
        if (name->kind == "aliased_import") {
          const Node* dotted = syntax::ChildByField(*name, "name");
          const Node* alias = syntax::ChildByField(*name, "alias");
          if (dotted && alias) {
            bindings.push_back({Text(tree, *alias), root_of(*dotted), false});
          }
        } else if (name->kind == "dotted_name") {
          std::string root = root_of(*name);
          bindings.push_back({root, root, false});
        }
      }
      return false;
    }
    if (node.kind == "import_from_statement" ||
        node.kind == "future_import_statement") {
      const Node* module = syntax::ChildByField(node, "module_name");
      bool relative = module && module->kind == "relative_import";
      std::string root = node.kind == "future_import_statement"
                             ? std::string("__future__")
                             : (module && !relative ? root_of(*module) : "");
      for (const Node* name : syntax::ChildrenByField(node, "name")) {
        if (name->kind == "aliased_import") {
          const Node* alias = syntax::ChildByField(*name, "alias");
          if (alias) bindings.push_back({Text(tree, *alias), root, relative});
        } else {
          std::string bound = Text(tree, *name);
          if (auto dot = bound.find('.'); dot != std::string::npos) {
            bound = bound.substr(0, dot);
          }
          bindings.push_back({bound, root, relative});
        }
      }
      return false;
    }
    return true;
  });
  return bindings;
}

NameSet ModuleLevelNames(const Tree& tree) {
  NameSet names;
  for (const Node& stmt : tree.root().children) {
    if (stmt.kind == "expression_statement") {
      for (const Node& expr : stmt.children) {
        if (expr.kind == "assignment" || expr.kind == "augmented_assignment") {
          if (const Node* left = syntax::ChildByField(expr, "left")) {
            CollectAssignedNames(tree, *left, &names);
          }
        }
      }
    } else if (stmt.kind == "function_definition" ||
               stmt.kind == "class_definition") {
      if (const Node* name = syntax::ChildByField(stmt, "name")) {
        names.insert(Text(tree, *name));
      }
    } else if (stmt.kind == "decorated_definition") {
      if (const Node* def = syntax::ChildByField(stmt, "definition")) {
        if (const Node* name = syntax::ChildByField(*def, "name")) {
          names.insert(Text(tree, *name));
        }
      }
    }
  }
  return names;
}

bool CallTargets(const Tree& tree, const Node& call, std::string_view method_name,
                 std::string_view class_name) {
  const Node* function = syntax::ChildByField(call, "function");
  if (!function) return false;
  if (function->kind == "identifier") {
    return syntax::NodeText(tree, *function) == method_name;
  }
  if (function->kind == "attribute") {
    const Node* object = syntax::ChildByField(*function, "object");
    const Node* attribute = syntax::ChildByField(*function, "attribute");
    if (!object || !attribute || object->kind != "identifier") return false;
    std::string_view receiver = syntax::NodeText(tree, *object);
    return syntax::NodeText(tree, *attribute) == method_name &&
           (receiver == "self" || receiver == "cls" ||
            (!class_name.empty() && receiver == class_name));
  }
  return false;
}

std::string CalleeText(const Tree& tree, const Node& call) {
  const Node* function = syntax::ChildByField(call, "function");
  if (!function) return "";
  if (function->kind == "identifier" || function->kind == "attribute") {
    return Text(tree, *function);
  }
  return "";
}

const Node* ReceiverRoot(const Node& node) {
  const Node* current = &node;
  while (current) {
    if (current->kind == "identifier") return current;
    if (current->kind == "attribute") {
      current = syntax::ChildByField(*current, "object");
    } else if (current->kind == "call") {
      current = syntax::ChildByField(*current, "function");
    } else if (current->kind == "subscript") {
      current = syntax::ChildByField(*current, "value");
    } else {
      return nullptr;
    }
  }
  return nullptr;
}

// An identifier used as a variable name, as opposed to an attribute name,
// keyword-argument name, or definition name.
bool IsNameReference(const Tree& tree, const Node& ident) {
  if (ident.kind != "identifier") return false;
  const Node* parent = tree.Parent(ident);
  if (!parent) return true;
  if (parent->kind == "attribute" && ident.field == "attribute") return false;
  if (parent->kind == "keyword_argument" && ident.field == "name") return false;
  if (IsOneOf(parent->kind, {"function_definition", "class_definition"}) &&
      ident.field == "name") {
    return false;
  }
  if (IsOneOf(parent->kind, {"dotted_name", "aliased_import", "global_statement",
                             "nonlocal_statement", "decorator"})) {
    return false;
  }
  return true;
}

// True when the identifier sits in a position that binds its name.
bool IsBindingOccurrence(const Tree& tree, const Node& ident) {
  const Node* current = &ident;
  const Node* parent = tree.Parent(*current);
  while (parent && IsOneOf(parent->kind, {"pattern_list", "tuple_pattern",
                                          "list_pattern", "list_splat_pattern",
                                          "tuple", "list",
                                          "parenthesized_expression"})) {
    current = parent;
    parent = tree.Parent(*current);
  }
  if (!parent) return false;
  if (IsOneOf(parent->kind, {"assignment", "augmented_assignment", "for_statement",
                             "for_in_clause"})) {
    return current->field == "left";
  }
  if (parent->kind == "as_pattern_target") return true;
  if (parent->kind == "named_expression") return current->field == "name";
  if (parent->kind == "parameters" || parent->kind == "lambda_parameters") {
    return true;
  }
  if (IsOneOf(parent->kind, {"default_parameter", "typed_default_parameter"})) {
    return current->field == "name";
  }
  if (parent->kind == "typed_parameter") return current->kind == "identifier";
  if (parent->kind == "dictionary_splat_pattern") return true;
  return false;
}

std::vector<std::string> ParameterNames(const Tree& tree, const Node& function) {
  std::vector<std::string> names;
  const Node* params = syntax::ChildByField(function, "parameters");
  if (!params) return names;
  for (const Node& p : params->children) {
    const Node* ident = nullptr;
    if (p.kind == "identifier") {
      ident = &p;
    } else if (IsOneOf(p.kind, {"default_parameter", "typed_default_parameter"})) {
      ident = syntax::ChildByField(p, "name");
    } else if (IsOneOf(p.kind, {"typed_parameter", "list_splat_pattern",
                                "dictionary_splat_pattern"})) {
      for (const Node& c : p.children) {
        if (c.kind == "identifier") {
          ident = &c;
          break;
        }
      }
    }
    if (ident) {
      std::string name = Text(tree, *ident);
      if (name != "self" && name != "cls") names.push_back(name);
    }
  }
  return names;
}

bool IsIdentifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(head) || head == '_' || head >= 0x80)) return false;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_' || u >= 0x80)) return false;
  }
  return true;
}

bool IsDocstring(const Tree& tree, const Node& string_node) {
  const Node* stmt = tree.Parent(string_node);
  if (!stmt || stmt->kind != "expression_statement" ||
      syntax::NamedChildren(*stmt).size() != 1) {
    return false;
  }
  const Node* block = tree.Parent(*stmt);
  if (!block || (block->kind != "block" && block->kind != "module")) {
    return false;
  }
  for (const Node& sibling : block->children) {
    if (sibling.kind == "comment") continue;
    return &sibling == stmt;
  }
  return false;
}

std::size_t LineStart(std::string_view source, std::size_t offset) {
  offset = std::min(offset, source.size());
  while (offset > 0 && source[offset - 1] != '\n') --offset;
  return offset;
}

std::size_t LineEnd(std::string_view source, std::size_t offset) {
  std::size_t nl = source.find('\n', offset);
  return nl == std::string_view::npos ? source.size() : nl + 1;
}

}  // namespace ctxbug::python
