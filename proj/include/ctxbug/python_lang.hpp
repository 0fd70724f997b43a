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

#ifndef CTXBUG_PYTHON_LANG_HPP_
#define CTXBUG_PYTHON_LANG_HPP_

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbug/syntax.hpp"

// Python-specific facts and lookups shared by the pipeline stages.
namespace ctxbug::python {

using NameSet = std::set<std::string, std::less<>>;

// Versioned name lists. The defaults are compiled in from config/*.txt;
// LoadNameList reads a replacement list (one name per line, '#' comments).
const NameSet& Keywords();
const NameSet& Builtins();
const NameSet& DefaultStdlibModules();
NameSet LoadNameList(const std::filesystem::path& path);
NameSet ParseNameList(std::string_view text);

// A function definition located in a tree. `slot` is the node that owns
// the definition in its block: the decorated_definition when decorators
// are present, otherwise the function_definition itself.
struct FunctionSite {
  const syntax::Node* slot = nullptr;
  const syntax::Node* definition = nullptr;
  std::string name;
};

const syntax::Node* FindClass(const syntax::Tree& tree,
                              std::string_view class_name);
// Methods declared directly in the class body, in source order.
std::vector<FunctionSite> ClassMethods(const syntax::Tree& tree,
                                       const syntax::Node& class_node);
// Module-level (not nested) function definitions, excluding methods.
std::vector<FunctionSite> TopLevelFunctions(const syntax::Tree& tree);

// The single function definition a method-source tree holds, or nullptr
// when the source is not exactly one definition.
const syntax::Node* SoleFunction(const syntax::Tree& tree);

struct ImportBinding {
  std::string bound_name;   // name introduced into the namespace
  std::string module_root;  // top-level module name
  bool relative = false;
};
std::vector<ImportBinding> ImportBindings(const syntax::Tree& tree);

// Names assigned, defined, or declared at module level, excluding imports.
NameSet ModuleLevelNames(const syntax::Tree& tree);

// True if `call` (a call node) targets `method_name` through a self/cls
// receiver, the class name, or as a bare name.
bool CallTargets(const syntax::Tree& tree, const syntax::Node& call,
                 std::string_view method_name, std::string_view class_name);

// Text of the callee when it is a plain or dotted name; empty otherwise.
std::string CalleeText(const syntax::Tree& tree, const syntax::Node& call);

// Leftmost identifier of an attribute/call chain, e.g. "np" for
// np.linalg.norm(x). Returns nullptr when the chain does not bottom out in
// an identifier.
const syntax::Node* ReceiverRoot(const syntax::Node& node);

// True for an identifier used as a variable name, as opposed to an
// attribute name, keyword-argument name, definition name, or import path.
bool IsNameReference(const syntax::Tree& tree, const syntax::Node& ident);
// True when the identifier sits in a position that binds its name:
// assignment and loop targets, with/except aliases, walrus names, and
// parameters.
bool IsBindingOccurrence(const syntax::Tree& tree, const syntax::Node& ident);
// Declared parameter names of a function definition, without self/cls.
std::vector<std::string> ParameterNames(const syntax::Tree& tree,
                                        const syntax::Node& function);

bool IsIdentifier(std::string_view text);
bool IsDocstring(const syntax::Tree& tree, const syntax::Node& string_node);

// Column of the first byte of the line containing `offset`.
std::size_t LineStart(std::string_view source, std::size_t offset);
std::size_t LineEnd(std::string_view source, std::size_t offset);

}  // namespace ctxbug::python

#endif  // CTXBUG_PYTHON_LANG_HPP_
