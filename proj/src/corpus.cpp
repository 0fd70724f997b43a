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

#include "ctxbug/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ctxbug/text_util.hpp"

namespace ctxbug::corpus {

using nlohmann::json;
using syntax::Node;
using syntax::Tree;

namespace {

constexpr const char* kKeys[] = {"case_id",         "class_name",
                                 "class_context",   "method_name",
                                 "solution_method", "requirement",
                                 "test_suite",      "lib_deps",
                                 "topic"};

bool BodyCalls(const Tree& tree, const Node& definition,
               std::string_view method_name, std::string_view class_name) {
  bool found = false;
  const Node* body = syntax::ChildByField(definition, "body");
  if (!body) return false;
  syntax::Walk(*body, [&](const Node& node) {
    if (found) return false;
    if (node.kind == "call" &&
        python::CallTargets(tree, node, method_name, class_name)) {
      found = true;
    }
    return true;
  });
  return found;
}

// Methods that reach `method_name` through any chain of in-class calls.
std::set<std::string> TransitiveCallers(const Tree& tree, const Node& class_node,
                                        std::string_view class_name,
                                        std::string_view method_name) {
  auto methods = python::ClassMethods(tree, class_node);
  std::set<std::string> reached{std::string(method_name)};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& site : methods) {
      if (reached.contains(site.name)) continue;
      for (const std::string& callee : reached) {
        if (BodyCalls(tree, *site.definition, callee, class_name)) {
          reached.insert(site.name);
          changed = true;
          break;
        }
      }
    }
  }
  return reached;
}

}  // namespace

json ToJson(const AdaptationCase& c) {
  // Key order is fixed so serialization is byte-stable.
  json j = json::object();
  j["case_id"] = c.case_id;
  j["class_name"] = c.class_name;
  j["class_context"] = c.class_context;
  j["method_name"] = c.method_name;
  j["solution_method"] = c.solution_method;
  j["requirement"] = c.requirement;
  j["test_suite"] = c.test_suite;
  j["lib_deps"] = c.lib_deps;
  j["topic"] = c.topic;
  if (c.language != "python") j["language"] = c.language;
  return j;
}

AdaptationCase FromJson(const json& j) {
  for (const char* key : kKeys) {
    if (!j.contains(key)) {
      throw CorpusError(std::string("missing key: ") + key);
    }
  }
  AdaptationCase c;
  c.case_id = j.at("case_id").get<std::string>();
  c.class_name = j.at("class_name").get<std::string>();
  c.class_context = j.at("class_context").get<std::string>();
  c.method_name = j.at("method_name").get<std::string>();
  c.solution_method = j.at("solution_method").get<std::string>();
  c.requirement = j.at("requirement").get<std::string>();
  c.test_suite = j.at("test_suite").get<std::string>();
  c.lib_deps = j.at("lib_deps").get<std::vector<std::string>>();
  c.topic = j.at("topic").get<std::string>();
  c.language = j.value("language", std::string("python"));
  return c;
}

std::string ValidateCase(const AdaptationCase& c) {
  if (c.case_id.empty()) return "empty case_id";
  if (c.language != "python") return "unsupported language: " + c.language;
  Tree method = syntax::Parse(c.solution_method);
  const Node* function = python::SoleFunction(method);
  if (method.has_errors() || !function) {
    return "solution_method does not parse as a single method definition";
  }
  const Node* name = syntax::ChildByField(*function, "name");
  if (!name || syntax::NodeText(method, *name) != c.method_name) {
    return "solution_method defines a different name than method_name";
  }
  Tree context = syntax::Parse(c.class_context);
  if (context.has_errors()) return "class_context does not parse";
  const Node* class_node = python::FindClass(context, c.class_name);
  if (!class_node) return "class_context lacks class " + c.class_name;
  auto methods = python::ClassMethods(context, *class_node);
  bool present = std::any_of(methods.begin(), methods.end(), [&](const auto& s) {
    return s.name == c.method_name;
  });
  if (!present) return "class_context lacks method " + c.method_name;
  if (text::FindWholeWord(c.test_suite, c.class_name).empty()) {
    return "test_suite does not reference " + c.class_name;
  }
  bool exercised = false;
  for (const std::string& caller :
       TransitiveCallers(context, *class_node, c.class_name, c.method_name)) {
    if (!text::FindWholeWord(c.test_suite, caller).empty()) {
      exercised = true;
      break;
    }
  }
  if (!exercised && c.method_name == "__init__") exercised = true;
  if (!exercised) return "test_suite does not exercise " + c.method_name;
  return "";
}

LoadResult ParseCorpus(std::string_view jsonl, const python::NameSet& stdlib) {
  LoadResult result;
  std::unordered_set<std::string> seen;
  std::size_t line_number = 0;
  for (std::string_view line : text::SplitLinesKeepEnds(jsonl)) {
    ++line_number;
    std::string_view trimmed = text::Trim(line);
    if (trimmed.empty()) continue;
    AdaptationCase c;
    try {
      c = FromJson(json::parse(trimmed));
    } catch (const std::exception& e) {
      result.diagnostics.push_back({Diagnostic::Severity::kError, line_number,
                                    "", std::string("malformed record: ") + e.what()});
      continue;
    }
    if (!seen.insert(c.case_id).second) {
      throw CorpusError("duplicate case_id: " + c.case_id);
    }
    std::string violation = ValidateCase(c);
    if (!violation.empty()) {
      result.diagnostics.push_back(
          {Diagnostic::Severity::kError, line_number, c.case_id, violation});
      continue;
    }
    auto deps = ExtractLibDeps(c.class_context, stdlib);
    if (deps != c.lib_deps) {
      result.diagnostics.push_back({Diagnostic::Severity::kWarning, line_number,
                                    c.case_id,
                                    "lib_deps recomputed from class imports"});
      c.lib_deps = std::move(deps);
    }
    result.cases.push_back(std::move(c));
  }
  if (result.cases.empty() && result.diagnostics.empty()) {
    result.diagnostics.push_back(
        {Diagnostic::Severity::kWarning, 0, "", "corpus is empty"});
  }
  return result;
}

LoadResult LoadCorpus(const std::filesystem::path& path,
                      const python::NameSet& stdlib) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("corpus file not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCorpus(buffer.str(), stdlib);
}

std::string SerializeCorpus(const std::vector<AdaptationCase>& cases) {
  std::string out;
  for (const auto& c : cases) {
    out += ToJson(c).dump();
    out += '\n';
  }
  return out;
}

void WriteCorpus(const std::filesystem::path& path,
                 const std::vector<AdaptationCase>& cases) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus: " + path.string());
  out << SerializeCorpus(cases);
}

MethodSlot FindMethodSlot(const Tree& class_tree, std::string_view class_name,
                          std::string_view method_name) {
  const Node* class_node = python::FindClass(class_tree, class_name);
  if (!class_node) {
    throw CorpusError("class not found: " + std::string(class_name));
  }
  for (const auto& site : python::ClassMethods(class_tree, *class_node)) {
    if (site.name == method_name) {
      MethodSlot slot;
      slot.span = site.slot->span;
      slot.def_span = site.definition->span;
      slot.indent =
          site.slot->span.start -
          python::LineStart(class_tree.source(), site.slot->span.start);
      return slot;
    }
  }
  throw CorpusError("method not found: " + std::string(method_name));
}

TargetContext BuildTargetContext(const AdaptationCase& c) {
  Tree tree = syntax::Parse(c.class_context);
  const Node* class_node = python::FindClass(tree, c.class_name);
  if (!class_node) throw CorpusError("class not found: " + c.class_name);
  auto methods = python::ClassMethods(tree, *class_node);

  TargetContext context;
  context.case_id = c.case_id;
  std::vector<const python::FunctionSite*> removed;
  for (const auto& site : methods) {
    if (site.name == c.method_name) {
      removed.insert(removed.begin(), &site);
    }
  }
  if (removed.empty()) {
    throw CorpusError("method not found in class_context: " + c.method_name);
  }
  for (const auto& site : methods) {
    if (site.name != c.method_name &&
        BodyCalls(tree, *site.definition, c.method_name, c.class_name)) {
      removed.push_back(&site);
    }
  }
  for (const auto* site : removed) context.removed_methods.push_back(site->name);

  const std::string& source = tree.source();
  std::vector<syntax::SpanEdit> edits;
  for (const auto* site : removed) {
    std::size_t start = python::LineStart(source, site->slot->span.start);
    std::size_t end = python::LineEnd(source, site->slot->span.end - 1);
    edits.push_back({{start, end}, ""});
  }
  const Node* body = syntax::ChildByField(*class_node, "body");
  std::size_t remaining = 0;
  for (const Node& stmt : body->children) {
    if (stmt.kind == "comment") continue;
    bool gone = std::any_of(removed.begin(), removed.end(), [&](auto* site) {
      return site->slot == &stmt;
    });
    if (!gone) ++remaining;
  }
  if (remaining == 0) {
    std::size_t indent = removed.front()->slot->span.start -
                         python::LineStart(source, removed.front()->slot->span.start);
    auto first = std::min_element(edits.begin(), edits.end(),
                                  [](const auto& a, const auto& b) {
                                    return a.span.start < b.span.start;
                                  });
    first->replacement = std::string(indent, ' ') + "pass\n";
  }
  context.context_source = syntax::Splice(source, std::move(edits));
  if (syntax::Parse(context.context_source).has_errors()) {
    throw CorpusError("target context does not parse for " + c.case_id);
  }
  return context;
}

std::vector<std::string> ExtractLibDeps(std::string_view source,
                                        const python::NameSet& stdlib) {
  Tree tree = syntax::Parse(std::string(source));
  std::set<std::string> roots;
  for (const auto& binding : python::ImportBindings(tree)) {
    if (binding.relative || binding.module_root.empty()) continue;
    if (stdlib.contains(binding.module_root)) continue;
    roots.insert(binding.module_root);
  }
  return {roots.begin(), roots.end()};
}

std::vector<std::string> ExtractLibDeps(const AdaptationCase& c,
                                        const python::NameSet& stdlib) {
  return ExtractLibDeps(c.class_context, stdlib);
}

std::vector<AdaptationCase> ConvertClassEval(const json& release,
                                             const python::NameSet& stdlib) {
  std::vector<AdaptationCase> cases;
  for (const json& record : release) {
    const std::string task_id = record.value("task_id", std::string());
    const std::string class_name = record.at("class_name").get<std::string>();
    const std::string class_file = record.at("solution_code").get<std::string>();
    const std::string tests = record.at("test").get<std::string>();
    const std::string class_description =
        record.value("class_description", std::string());
    Tree tree = syntax::Parse(class_file);
    auto deps = ExtractLibDeps(class_file, stdlib);
    for (const json& method : record.at("methods_info")) {
      AdaptationCase c;
      c.method_name = method.at("method_name").get<std::string>();
      c.case_id = task_id + "." + c.method_name;
      c.class_name = class_name;
      c.class_context = class_file;
      c.test_suite = tests;
      c.lib_deps = deps;
      c.topic = task_id;
      std::string method_description =
          method.value("method_description", std::string());
      c.requirement = std::string(text::Trim(class_description));
      if (!method_description.empty()) {
        if (!c.requirement.empty()) c.requirement += "\n\n";
        c.requirement += std::string(text::Trim(method_description));
      }
      try {
        MethodSlot slot = FindMethodSlot(tree, class_name, c.method_name);
        std::string_view def_text = std::string_view(class_file).substr(
            slot.def_span.start, slot.def_span.size());
        c.solution_method = text::Dedent(
            std::string(slot.indent, ' ') + std::string(def_text), slot.indent);
      } catch (const CorpusError&) {
        c.solution_method = text::DedentToFirstLine(
            method.value("solution_code", std::string()));
      }
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

}  // namespace ctxbug::corpus
