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

#include "ctxbug/obfuscate.hpp"

#include <array>
#include <functional>
#include <set>

#include "ctxbug/perturb.hpp"
#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"
#include "ctxbug/text_util.hpp"

namespace ctxbug::obfuscate {

using syntax::Node;
using syntax::Tree;

namespace {

enum class Family { kClass, kFunction, kVariable };

std::string Text(const Tree& tree, const Node& node) {
  return std::string(syntax::NodeText(tree, node));
}

bool IsDunder(std::string_view name) {
  return name.size() > 4 && name.starts_with("__") && name.ends_with("__");
}

bool IsSelfLike(std::string_view name) { return name == "self" || name == "cls"; }

// Placeholders are blanked to same-length spaces so that byte offsets stay
// aligned and placeholder text never becomes an identifier token.
std::string BlankPlaceholders(std::string_view source) {
  std::string blanked(source);
  for (std::string_view placeholder : perturb::kPlaceholders) {
    for (std::size_t pos = blanked.find(placeholder); pos != std::string::npos;
         pos = blanked.find(placeholder, pos + placeholder.size())) {
      blanked.replace(pos, placeholder.size(), placeholder.size(), ' ');
    }
  }
  return blanked;
}

bool InImport(const Tree& tree, const Node& node) {
  for (const Node* p = tree.Parent(node); p; p = tree.Parent(*p)) {
    if (p->kind == "import_statement" || p->kind == "import_from_statement" ||
        p->kind == "future_import_statement") {
      return true;
    }
  }
  return false;
}

const Node* AttributeReceiver(const Tree& tree, const Node& ident) {
  const Node* parent = tree.Parent(ident);
  if (!parent || parent->kind != "attribute" || ident.field != "attribute") {
    return nullptr;
  }
  return syntax::ChildByField(*parent, "object");
}

struct Census {
  std::vector<std::string> order;  // candidate names, first occurrence
  std::set<std::string, std::less<>> seen;
  python::NameSet class_names;
  python::NameSet function_names;
  python::NameSet bound_names;
  python::NameSet attribute_names;
  python::NameSet import_names;
  python::NameSet all_identifiers;
};

void TakeCensus(const Tree& tree, Census* census) {
  for (const auto& binding : python::ImportBindings(tree)) {
    census->import_names.insert(binding.bound_name);
  }
  python::NameSet class_receivers{"self", "cls"};
  syntax::Walk(tree.root(), [&](const Node& node) {
    if (node.kind == "class_definition") {
      if (const Node* name = syntax::ChildByField(node, "name")) {
        census->class_names.insert(Text(tree, *name));
      }
    }
    return true;
  });
  for (const auto& name : census->class_names) class_receivers.insert(name);

  syntax::Walk(tree.root(), [&](const Node& node) {
    if (node.kind != "identifier") return true;
    std::string name = Text(tree, node);
    census->all_identifiers.insert(name);
    if (InImport(tree, node)) return true;
    const Node* parent = tree.Parent(node);
    if (parent && parent->kind == "function_definition" && node.field == "name") {
      census->function_names.insert(name);
    } else if (const Node* receiver = AttributeReceiver(tree, node)) {
      if (receiver->kind == "identifier" &&
          class_receivers.contains(Text(tree, *receiver))) {
        census->attribute_names.insert(name);
      }
    } else if (python::IsBindingOccurrence(tree, node)) {
      census->bound_names.insert(name);
    }
    if (census->seen.insert(name).second) census->order.push_back(name);
    return true;
  });
}

bool Excluded(std::string_view name, const Census& census) {
  return IsDunder(name) || IsSelfLike(name) ||
         python::Keywords().contains(name) ||
         python::Builtins().contains(name) ||
         census.import_names.contains(name);
}

bool IsUserCallee(const Tree& tree, const Node& call, const RenamingMap& map,
                  const python::NameSet& receivers) {
  const Node* callee = syntax::ChildByField(call, "function");
  if (!callee) return false;
  if (callee->kind == "identifier") {
    return map.Forward(syntax::NodeText(tree, *callee)).has_value();
  }
  if (callee->kind == "attribute") {
    const Node* object = syntax::ChildByField(*callee, "object");
    const Node* attribute = syntax::ChildByField(*callee, "attribute");
    return object && attribute && object->kind == "identifier" &&
           receivers.contains(syntax::NodeText(tree, *object)) &&
           map.Forward(syntax::NodeText(tree, *attribute)).has_value();
  }
  return false;
}

// Decides, per identifier token of the obfuscation input, whether it is
// renamed.
bool RenameOccurrence(const Tree& tree, const Node& ident, const RenamingMap& map,
                      const python::NameSet& receivers) {
  if (InImport(tree, ident)) return false;
  if (const Node* receiver = AttributeReceiver(tree, ident)) {
    return receiver->kind == "identifier" &&
           receivers.contains(syntax::NodeText(tree, *receiver));
  }
  const Node* parent = tree.Parent(ident);
  if (parent && parent->kind == "keyword_argument" && ident.field == "name") {
    const Node* args = tree.Parent(*parent);
    const Node* call = args ? tree.Parent(*args) : nullptr;
    return call && call->kind == "call" && IsUserCallee(tree, *call, map, receivers);
  }
  return true;
}

using Lookup = std::optional<std::string_view> (RenamingMap::*)(
    std::string_view) const;

std::string RewriteIdentifiers(
    std::string_view source, const RenamingMap& map, Lookup lookup,
    const std::function<bool(const Tree&, const Node&)>& eligible) {
  if (map.empty()) return std::string(source);
  std::string blanked = BlankPlaceholders(source);
  Tree tree = syntax::Parse(blanked);
  std::vector<syntax::SpanEdit> edits;
  syntax::Walk(tree.root(), [&](const Node& node) {
    if (node.kind != "identifier") return true;
    auto renamed = (map.*lookup)(syntax::NodeText(tree, node));
    if (renamed && eligible(tree, node)) {
      edits.push_back({node.span, std::string(*renamed)});
    }
    return true;
  });
  return syntax::Splice(source, std::move(edits));
}

std::string RewriteWords(std::string_view text, const RenamingMap& map,
                         Lookup lookup) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (!text::IsWordChar(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text::IsWordChar(text[j])) ++j;
    std::string_view word = text.substr(i, j - i);
    auto renamed = (map.*lookup)(word);
    out.append(renamed ? *renamed : word);
    i = j;
  }
  return out;
}

python::NameSet ClassReceivers(const RenamingMap& map) {
  python::NameSet receivers{"self", "cls"};
  for (const auto& [original, obfuscated] : map.pairs()) {
    if (obfuscated.starts_with("class_")) receivers.insert(original);
  }
  return receivers;
}

}  // namespace

RenamingMap::RenamingMap(std::vector<std::pair<std::string, std::string>> pairs,
                         Scope scope)
    : pairs_(std::move(pairs)), scope_(scope) {
  for (const auto& [original, obfuscated] : pairs_) {
    if (!forward_.emplace(original, obfuscated).second ||
        !backward_.emplace(obfuscated, original).second) {
      throw ObfuscationError("renaming map is not injective at " + original);
    }
  }
  for (const auto& [original, obfuscated] : pairs_) {
    if (forward_.contains(obfuscated) && forward_.at(obfuscated) != obfuscated) {
      // An obfuscated name that is also an original would make the
      // inverse ambiguous for unrenamed occurrences.
      throw ObfuscationError("obfuscated name collides with original: " +
                             obfuscated);
    }
  }
}

std::optional<std::string_view> RenamingMap::Forward(
    std::string_view original) const {
  auto it = forward_.find(original);
  if (it == forward_.end()) return std::nullopt;
  return std::string_view(it->second);
}

std::optional<std::string_view> RenamingMap::Backward(
    std::string_view obfuscated) const {
  auto it = backward_.find(obfuscated);
  if (it == backward_.end()) return std::nullopt;
  return std::string_view(it->second);
}

RenamingMap BuildRenaming(const corpus::AdaptationCase& c, Scope scope) {
  Census census;
  if (scope == Scope::kClass) {
    TakeCensus(syntax::Parse(BlankPlaceholders(c.class_context)), &census);
  }
  TakeCensus(syntax::Parse(BlankPlaceholders(c.solution_method)), &census);
  if (scope == Scope::kMethod) census.class_names.insert(c.class_name);

  // Every word of the requirement is reserved too, so prose round-trips.
  python::NameSet reserved = census.all_identifiers;
  for (std::size_t i = 0; i < c.requirement.size();) {
    if (!text::IsWordChar(c.requirement[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < c.requirement.size() && text::IsWordChar(c.requirement[j])) ++j;
    reserved.insert(c.requirement.substr(i, j - i));
    i = j;
  }

  std::array<int, 3> next{0, 0, 0};
  auto fresh = [&](Family family) {
    static constexpr std::array<std::string_view, 3> kPrefix = {"class_", "func_",
                                                                "var_"};
    int& counter = next[static_cast<int>(family)];
    while (true) {
      std::string candidate =
          std::string(kPrefix[static_cast<int>(family)]) + std::to_string(counter++);
      if (!reserved.contains(candidate) && !python::Keywords().contains(candidate) &&
          !python::Builtins().contains(candidate)) {
        return candidate;
      }
    }
  };

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& name : census.order) {
    if (Excluded(name, census)) continue;
    Family family;
    if (census.class_names.contains(name)) {
      family = Family::kClass;
    } else if (census.function_names.contains(name)) {
      family = Family::kFunction;
    } else if (census.bound_names.contains(name) ||
               census.attribute_names.contains(name)) {
      family = Family::kVariable;
    } else {
      continue;  // free name defined elsewhere, e.g. a library global
    }
    pairs.emplace_back(name, fresh(family));
  }
  return RenamingMap(std::move(pairs), scope);
}

std::string ObfuscateCode(std::string_view source, const RenamingMap& map) {
  python::NameSet receivers = ClassReceivers(map);
  return RewriteIdentifiers(source, map, &RenamingMap::Forward,
                            [&](const Tree& tree, const Node& node) {
                              return RenameOccurrence(tree, node, map, receivers);
                            });
}

std::string DeobfuscateCode(std::string_view source, const RenamingMap& map) {
  return RewriteIdentifiers(source, map, &RenamingMap::Backward,
                            [](const Tree&, const Node&) { return true; });
}

std::string ObfuscateText(std::string_view text, const RenamingMap& map) {
  return RewriteWords(text, map, &RenamingMap::Forward);
}

std::string DeobfuscateText(std::string_view text, const RenamingMap& map) {
  return RewriteWords(text, map, &RenamingMap::Backward);
}

nlohmann::json ToJson(const RenamingMap& map) {
  nlohmann::json j = nlohmann::json::object();
  j["scope"] = map.scope() == Scope::kClass ? "class" : "method";
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [original, obfuscated] : map.pairs()) {
    pairs.push_back({original, obfuscated});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

RenamingMap MapFromJson(const nlohmann::json& j) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& pair : j.at("pairs")) {
    pairs.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  }
  Scope scope = j.value("scope", std::string("class")) == "method" ? Scope::kMethod
                                                                   : Scope::kClass;
  return RenamingMap(std::move(pairs), scope);
}

}  // namespace ctxbug::obfuscate
