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

#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <random>
#include <stdexcept>

namespace ctxbug::oracles {

namespace {

using syntax::Node;
using syntax::Span;

// Flat pre-order view of a tree; every lookup is a linear scan.
struct Flat {
  struct Entry {
    const Node* node;
    int parent;
  };
  std::vector<Entry> entries;
  std::string source;

  explicit Flat(const syntax::Tree& tree) : source(tree.source()) {
    Add(tree.root(), -1);
  }
  void Add(const Node& n, int parent) {
    int id = static_cast<int>(entries.size());
    entries.push_back({&n, parent});
    for (const Node& c : n.children) Add(c, id);
  }
  const Node& At(int i) const { return *entries[i].node; }
  int Parent(int i) const { return entries[i].parent; }
  std::string Kind(int i) const { return i < 0 ? "" : At(i).kind; }
  std::string Text(int i) const {
    return source.substr(At(i).span.start, At(i).span.size());
  }
  bool Under(int i, int ancestor) const {
    for (int p = i; p >= 0; p = Parent(p)) {
      if (p == ancestor) return true;
    }
    return false;
  }
  bool UnderKind(int i, const std::string& kind) const {
    for (int p = Parent(i); p >= 0; p = Parent(p)) {
      if (Kind(p) == kind) return true;
    }
    return false;
  }
  // Child of `i` carrying `field`, or -1.
  int Field(int i, const std::string& field) const {
    for (int j = 0; j < static_cast<int>(entries.size()); ++j) {
      if (Parent(j) == i && At(j).field == field) return j;
    }
    return -1;
  }
  std::vector<int> Children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(entries.size()); ++j) {
      if (Parent(j) == i) out.push_back(j);
    }
    return out;
  }
};

bool In(const std::string& s, std::initializer_list<const char*> set) {
  for (const char* x : set) {
    if (s == x) return true;
  }
  return false;
}

// Drops any span contained in another kept span; ties keep the first.
std::vector<Span> Outermost(std::vector<Span> spans) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    bool inside = false;
    for (std::size_t j = 0; j < spans.size(); ++j) {
      if (i == j) continue;
      bool contains = spans[j].start <= spans[i].start && spans[i].end <= spans[j].end;
      bool strictly = contains && spans[j] != spans[i];
      if (strictly || (contains && j < i)) inside = true;
    }
    if (!inside) out.push_back(spans[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ClassFacts {
  std::set<std::string> methods;
  std::set<std::string> module_names;
  std::set<std::string> library_names;
};

ClassFacts Facts(const corpus::AdaptationCase& c) {
  syntax::Tree tree = syntax::Parse(c.class_context);
  Flat f(tree);
  ClassFacts facts;
  std::set<std::string> deps(c.lib_deps.begin(), c.lib_deps.end());
  for (int i = 0; i < static_cast<int>(f.entries.size()); ++i) {
    int p = f.Parent(i);
    std::string kind = f.Kind(i);
    // Module level means a direct child of the module node, or the
    // definition inside a top-level decorated_definition.
    bool top = p == 0 || (f.Kind(p) == "decorated_definition" && f.Parent(p) == 0);
    if (top && In(kind, {"function_definition", "class_definition"})) {
      facts.module_names.insert(f.Text(f.Field(i, "name")));
    }
    if (kind == "expression_statement" && p == 0) {
      for (int a : f.Children(i)) {
        if (!In(f.Kind(a), {"assignment", "augmented_assignment"})) continue;
        int left = f.Field(a, "left");
        for (int k = 0; k < static_cast<int>(f.entries.size()); ++k) {
          if (f.Kind(k) == "identifier" && f.Under(k, left)) {
            facts.module_names.insert(f.Text(k));
          }
        }
      }
    }
    if (kind == "class_definition" && f.Text(f.Field(i, "name")) == c.class_name) {
      int body = f.Field(i, "body");
      for (int m : f.Children(body)) {
        int def = f.Kind(m) == "decorated_definition" ? f.Field(m, "definition") : m;
        if (f.Kind(def) == "function_definition") {
          facts.methods.insert(f.Text(f.Field(def, "name")));
        }
      }
    }
    if (kind == "import_statement" && p == 0) {
      for (int item : f.Children(i)) {
        if (f.Kind(item) == "dotted_name") {
          std::string text = f.Text(item);
          std::string root = text.substr(0, text.find('.'));
          if (deps.contains(root)) facts.library_names.insert(root);
        } else if (f.Kind(item) == "aliased_import") {
          std::string text = f.Text(f.Field(item, "name"));
          if (deps.contains(text.substr(0, text.find('.')))) {
            facts.library_names.insert(f.Text(f.Field(item, "alias")));
          }
        }
      }
    }
    if (kind == "import_from_statement" && p == 0) {
      std::string module = f.Text(f.Field(i, "module_name"));
      if (!module.starts_with(".") && deps.contains(module.substr(0, module.find('.')))) {
        for (int item : f.Children(i)) {
          if (f.At(item).field != "name") continue;
          if (f.Kind(item) == "aliased_import") {
            facts.library_names.insert(f.Text(f.Field(item, "alias")));
          } else {
            std::string text = f.Text(item);
            facts.library_names.insert(text.substr(text.rfind('.') + 1));
          }
        }
      }
    }
  }
  return facts;
}

bool IsDocstringAt(const Flat& f, int i) {
  int stmt = f.Parent(i);
  if (f.Kind(stmt) != "expression_statement" || f.Children(stmt).size() != 1) return false;
  int block = f.Parent(stmt);
  if (f.Kind(block) != "block" && f.Kind(block) != "module") return false;
  for (int c : f.Children(block)) {
    if (f.At(c).named && f.Kind(c) != "comment") return c == stmt;
  }
  return false;
}

// Identifier in a variable-name position (not attribute, keyword, or
// definition name).
bool IsVariableUse(const Flat& f, int i) {
  if (f.Kind(i) != "identifier") return false;
  int p = f.Parent(i);
  std::string field = f.At(i).field;
  std::string pk = f.Kind(p);
  if (pk == "attribute" && field == "attribute") return false;
  if (In(pk, {"keyword_argument", "function_definition", "class_definition"}) &&
      field == "name") {
    return false;
  }
  return !In(pk, {"dotted_name", "aliased_import", "global_statement", "nonlocal_statement",
                  "decorator"});
}

bool IsBinding(const Flat& f, int i) {
  int cur = i;
  int p = f.Parent(cur);
  while (In(f.Kind(p), {"pattern_list", "tuple_pattern", "list_pattern", "list_splat_pattern",
                        "tuple", "list", "parenthesized_expression"})) {
    cur = p;
    p = f.Parent(cur);
  }
  std::string pk = f.Kind(p);
  std::string field = f.At(cur).field;
  if (In(pk, {"assignment", "augmented_assignment", "for_statement", "for_in_clause"})) {
    return field == "left";
  }
  if (pk == "as_pattern_target" || pk == "parameters" || pk == "lambda_parameters" ||
      pk == "dictionary_splat_pattern") {
    return true;
  }
  if (pk == "named_expression") return field == "name";
  if (In(pk, {"default_parameter", "typed_default_parameter"})) return field == "name";
  if (pk == "typed_parameter") return f.Kind(cur) == "identifier";
  return false;
}

struct Method {
  int function = -1;
  int body = -1;
  std::set<std::string> parameters;
  std::set<std::string> locals;
};

Method Analyze(const Flat& f) {
  Method m;
  for (int i = 0; i < static_cast<int>(f.entries.size()); ++i) {
    if (f.Kind(i) == "function_definition") {
      m.function = i;
      break;
    }
  }
  if (m.function < 0) throw std::logic_error("no function");
  m.body = f.Field(m.function, "body");
  int params = f.Field(m.function, "parameters");
  for (int i = 0; i < static_cast<int>(f.entries.size()); ++i) {
    if (f.Kind(i) != "identifier") continue;
    // Direct parameter names: the identifier that names each parameter.
    int p = f.Parent(i);
    bool names_param =
        p == params ||
        (f.Parent(p) == params &&
         (f.At(i).field == "name" ||
          In(f.Kind(p), {"typed_parameter", "list_splat_pattern", "dictionary_splat_pattern"})));
    if (names_param && f.Under(i, params)) {
      // First identifier child only for typed parameters.
      if (f.Kind(p) == "typed_parameter" && f.Children(p).front() != i) continue;
      m.parameters.insert(f.Text(i));
    }
  }
  m.parameters.erase("self");
  m.parameters.erase("cls");
  m.locals = m.parameters;
  std::set<std::string> declared_global;
  for (int i = 0; i < static_cast<int>(f.entries.size()); ++i) {
    if (f.Kind(i) == "identifier" && f.Under(i, m.body) && IsBinding(f, i)) {
      m.locals.insert(f.Text(i));
    }
    if (In(f.Kind(i), {"global_statement", "nonlocal_statement"})) {
      for (int c : f.Children(i)) {
        if (f.Kind(c) == "identifier") declared_global.insert(f.Text(c));
      }
    }
  }
  for (const auto& g : declared_global) m.locals.erase(g);
  m.locals.erase("self");
  m.locals.erase("cls");
  return m;
}

int Root(const Flat& f, int i) {
  while (i >= 0) {
    std::string k = f.Kind(i);
    if (k == "identifier") return i;
    if (k == "attribute") {
      i = f.Field(i, "object");
    } else if (k == "call") {
      i = f.Field(i, "function");
    } else if (k == "subscript") {
      i = f.Field(i, "value");
    } else {
      return -1;
    }
  }
  return -1;
}

}  // namespace

std::vector<ExpectedTemplate> PerturbationTargets(const corpus::AdaptationCase& c,
                                                  int rule_id) {
  syntax::Tree tree = syntax::Parse(c.solution_method);
  Flat f(tree);
  Method m = Analyze(f);
  ClassFacts facts = Facts(c);
  const int n = static_cast<int>(f.entries.size());
  auto span = [&](int i) { return f.At(i).span; };
  auto in_code = [&](int i) { return f.Under(i, m.function) && !f.UnderKind(i, "type") &&
                                     f.Kind(i) != "type"; };
  auto in_body = [&](int i) { return f.Under(i, m.body) && !f.UnderKind(i, "type"); };

  std::vector<ExpectedTemplate> out;
  auto all = [&](std::vector<Span> spans) {
    spans = Outermost(std::move(spans));
    if (!spans.empty()) out.push_back({spans, ""});
  };
  auto each = [&](const std::vector<Span>& spans) {
    for (const Span& s : spans) out.push_back({{s}, ""});
  };

  switch (rule_id) {
    case 1:
      all({span(f.Field(m.function, "parameters"))});
      break;
    case 2: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (f.Kind(i) == "return_statement") spans.push_back(span(i));
      }
      all(spans);
      break;
    }
    case 3: {
      std::map<std::string, std::vector<Span>> by_type;
      for (int i = 0; i < n; ++i) {
        if (!in_code(i)) continue;
        std::string k = f.Kind(i);
        std::string type;
        if (k == "integer" || k == "float" || k == "none") type = k;
        if (k == "true" || k == "false") type = "boolean";
        if (k == "string" && !IsDocstringAt(f, i)) {
          bool interpolated = false;
          for (int j : f.Children(i)) interpolated |= f.Kind(j) == "interpolation";
          if (!interpolated) type = "string";
        }
        if (!type.empty()) by_type[type].push_back(span(i));
      }
      for (const char* type : {"integer", "float", "string", "boolean", "none"}) {
        if (!by_type.contains(type)) continue;
        out.push_back({Outermost(by_type[type]), type});
      }
      break;
    }
    case 4: {
      static const std::set<std::string> kTokens = {
          "+", "-", "*", "/", "//", "%", "**", "@", "<<", ">>", "&", "|", "^", "~",
          "<", ">", "<=", ">=", "==", "!=", "<>", "in", "not in", "is", "is not",
          "and", "or", "not", "+=", "-=", "*=", "/=", "//=", "%=", "**=", "@=",
          "<<=", ">>=", "&=", "|=", "^="};
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (!in_code(i) || f.At(i).named) continue;
        if (!kTokens.contains(f.Text(i))) continue;
        std::string pk = f.Kind(f.Parent(i));
        if (In(pk, {"binary_operator", "unary_operator", "boolean_operator", "not_operator",
                    "comparison_operator", "augmented_assignment"})) {
          spans.push_back(span(i));
        }
      }
      all(spans);
      break;
    }
    case 5: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        std::string k = f.Kind(i);
        if (!In(k, {"assignment", "augmented_assignment"})) continue;
        if (f.Kind(f.Parent(i)) == "assignment" && f.At(i).field == "right") continue;
        int right = f.Field(i, "right");
        while (right >= 0 && f.Kind(right) == "assignment") right = f.Field(right, "right");
        if (right >= 0) spans.push_back(span(right));
      }
      each(spans);
      break;
    }
    case 6: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        std::string k = f.Kind(i);
        if (In(k, {"if_statement", "elif_clause", "while_statement"})) {
          spans.push_back(span(f.Field(i, "condition")));
        } else if (k == "conditional_expression") {
          auto kids = f.Children(i);
          bool seen_if = false;
          for (int kid : kids) {
            if (seen_if && f.At(kid).named) {
              spans.push_back(span(kid));
              break;
            }
            if (f.Kind(kid) == "if") seen_if = true;
          }
        }
      }
      each(spans);
      break;
    }
    case 7: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (f.Kind(i) != "call") continue;
        int callee = f.Field(i, "function");
        bool own = false;
        if (f.Kind(callee) == "identifier") {
          std::string name = f.Text(callee);
          own = facts.methods.contains(name) || facts.module_names.contains(name);
        } else if (f.Kind(callee) == "attribute") {
          int object = f.Field(callee, "object");
          std::string receiver = f.Kind(object) == "identifier" ? f.Text(object) : "";
          bool self_like = receiver == "self" || receiver == "cls" || receiver == c.class_name;
          own = self_like && facts.methods.contains(f.Text(f.Field(callee, "attribute")));
        }
        if (!own) spans.push_back(span(i));
      }
      each(spans);
      break;
    }
    case 8: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (!f.Under(i, m.body)) continue;
        if (f.Kind(i) == "attribute") {
          int object = f.Field(i, "object");
          if (f.Kind(object) == "identifier") {
            std::string r = f.Text(object);
            if (r == "self" || r == "cls" || r == c.class_name) spans.push_back(span(i));
          }
        } else if (IsVariableUse(f, i)) {
          std::string name = f.Text(i);
          if (facts.module_names.contains(name) && !m.locals.contains(name)) {
            spans.push_back(span(i));
          }
        }
      }
      all(spans);
      break;
    }
    case 9: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (!f.Under(i, m.body) || !IsVariableUse(f, i)) continue;
        std::string name = f.Text(i);
        if (!m.locals.contains(name)) continue;
        bool kept_binding = false;
        if (!m.parameters.contains(name) && IsBinding(f, i)) {
          kept_binding = true;
          for (int j = 0; j < i; ++j) {
            if (f.Under(j, m.body) && IsVariableUse(f, j) && f.Text(j) == name &&
                IsBinding(f, j)) {
              kept_binding = false;
            }
          }
        }
        if (!kept_binding) spans.push_back(span(i));
      }
      all(spans);
      break;
    }
    case 10: {
      std::vector<Span> spans;
      for (int i = 0; i < n; ++i) {
        if (!in_body(i) || !In(f.Kind(i), {"attribute", "call"})) continue;
        int root = Root(f, i);
        if (root < 0) continue;
        std::string name = f.Text(root);
        if (facts.library_names.contains(name) && !m.locals.contains(name)) {
          spans.push_back(span(i));
        }
      }
      all(spans);
      break;
    }
    default:
      throw std::out_of_range("rule");
  }
  return out;
}

std::pair<int, int> SpliceResolution(const std::string& template_source,
                                     const std::string& placeholder,
                                     const std::vector<std::string>& solution_fills,
                                     const std::vector<std::string>& output_fills) {
  auto fill = [&](const std::vector<std::string>& fills) {
    std::string out;
    std::size_t pos = 0;
    std::size_t k = 0;
    while (true) {
      std::size_t hit = template_source.find(placeholder, pos);
      if (hit == std::string::npos) break;
      out += template_source.substr(pos, hit - pos);
      out += fills.at(k++);
      pos = hit + placeholder.size();
    }
    out += template_source.substr(pos);
    if (k != fills.size()) throw std::invalid_argument("fill count");
    return out;
  };
  std::string output = fill(output_fills);
  int resolved = 0;
  for (std::size_t i = 0; i < output_fills.size(); ++i) {
    std::vector<std::string> substituted = output_fills;
    substituted[i] = solution_fills.at(i);
    if (fill(substituted) == output) ++resolved;
  }
  return {resolved, static_cast<int>(output_fills.size())};
}

double RelativeDrop(double baseline, double value) {
  double raw = 100.0 * (baseline - value) / baseline;
  return std::floor(raw * 100.0 + 0.5) / 100.0;
}

}  // namespace ctxbug::oracles

namespace ctxbug::oracles {

namespace {

struct ModelRows {
  const char* model;
  double with[10];
  double baseline[10];
  double relative[10];
};

constexpr const char* kColumns[10] = {
    "Interface/Pass@1",  "Interface/RR",  "Functionality/Pass@1", "Functionality/RR",
    "Identifier/Pass@1", "Identifier/RR", "Dependency/Pass@1",    "Dependency/RR",
    "All/Pass@1",        "All/RR"};

constexpr ModelRows kWithoutRows[] = {
    {"GPT-4o",
     {67.18, 67.81, 33.77, 21.93, 67.34, 60.96, 43.75, 44.04, 53.20, 50.14},
     {74.52, 76.56, 53.03, 46.68, 83.50, 84.43, 68.75, 67.89, 68.67, 71.32},
     {9.85, 11.43, 36.32, 53.02, 19.35, 27.80, 36.36, 35.13, 22.53, 29.70}},
    {"DS-V3",
     {66.94, 66.43, 35.52, 27.70, 65.31, 61.40, 51.06, 56.80, 53.24, 52.10},
     {77.27, 73.43, 53.83, 50.71, 88.93, 84.20, 70.21, 72.00, 71.06, 71.72},
     {13.37, 9.53, 34.01, 45.38, 26.56, 27.08, 27.28, 21.11, 25.08, 27.36}},
    {"Qwen3",
     {65.81, 62.59, 39.43, 31.62, 66.39, 58.07, 53.33, 60.94, 54.67, 50.51},
     {77.78, 72.66, 58.29, 54.94, 86.55, 82.76, 68.89, 78.91, 71.86, 71.59},
     {15.39, 13.86, 32.36, 42.45, 23.29, 29.83, 22.59, 22.77, 23.92, 29.45}},
    {"Kimi-K2",
     {69.87, 69.64, 33.90, 22.75, 72.86, 68.98, 50.00, 58.20, 55.79, 55.33},
     {75.55, 73.57, 53.95, 47.00, 88.57, 86.25, 68.18, 77.05, 70.78, 72.43},
     {7.52, 5.34, 37.16, 51.60, 17.74, 20.02, 26.66, 24.46, 21.18, 23.61}},
};

constexpr ModelRows kIsoRows[] = {
    {"GPT-4o",
     {59.82, 49.69, 37.46, 23.65, 61.06, 57.80, 46.67, 45.28, 49.39, 44.96},
     {60.71, 58.39, 47.77, 46.53, 65.87, 74.27, 48.89, 64.15, 55.79, 62.63},
     {1.47, 14.90, 21.58, 49.17, 7.30, 22.18, 4.54, 29.42, 11.47, 28.21}},
    {"DS-V3",
     {59.00, 57.89, 33.61, 25.96, 59.85, 55.98, 51.43, 61.17, 46.73, 46.02},
     {55.00, 57.14, 37.82, 41.59, 65.91, 75.27, 68.57, 81.55, 50.69, 61.29},
     {-7.27, -1.31, 11.13, 37.58, 9.19, 25.63, 25.00, 24.99, 7.81, 24.91}},
    {"Qwen3",
     {55.93, 51.33, 38.70, 29.60, 61.39, 57.09, 41.67, 48.61, 47.99, 43.57},
     {55.08, 56.67, 44.78, 50.57, 72.28, 78.13, 41.67, 65.28, 53.07, 61.32},
     {-1.54, 9.42, 13.58, 41.47, 15.07, 26.93, 0.00, 25.54, 9.57, 28.95}},
    {"Kimi-K2",
     {48.72, 61.25, 30.68, 21.21, 71.56, 69.44, 48.00, 60.71, 52.11, 55.13},
     {51.28, 65.00, 40.91, 55.15, 71.56, 82.72, 56.00, 71.43, 56.70, 72.13},
     {4.99, 5.77, 25.01, 61.54, 0.00, 16.05, 14.29, 15.01, 8.10, 23.57}},
};

}  // namespace

const std::vector<PublishedRelative>& PublishedRelativeCells() {
  static const std::vector<PublishedRelative> cells = [] {
    std::vector<PublishedRelative> out;
    auto add = [&](const char* table, const ModelRows& rows) {
      for (int i = 0; i < 10; ++i) {
        out.push_back({table, rows.model, kColumns[i], rows.with[i], rows.baseline[i],
                       rows.relative[i]});
      }
    };
    for (const auto& rows : kWithoutRows) add("ctx_vs_without", rows);
    for (const auto& rows : kIsoRows) add("ctx_vs_iso", rows);
    return out;
  }();
  return cells;
}

}  // namespace ctxbug::oracles

namespace ctxbug::oracles {

namespace {

const std::map<std::string, std::string>& OperatorSwaps() {
  static const std::map<std::string, std::string> swaps = {
      {"+", "-"},       {"-", "+"},       {"*", "+"},      {"/", "*"},
      {"//", "/"},      {"%", "//"},      {"**", "*"},     {"|", "&"},
      {"&", "|"},       {"^", "|"},       {"<<", ">>"},    {">>", "<<"},
      {"<", ">="},      {"<=", ">"},      {">", "<="},     {">=", "<"},
      {"==", "!="},     {"!=", "=="},     {"and", "or"},   {"or", "and"},
      {"in", "not in"}, {"not in", "in"}, {"is", "is not"}, {"is not", "is"},
      {"not", "-"},     {"+=", "-="},     {"-=", "+="},    {"*=", "+="},
      {"/=", "*="},     {"//=", "/="},    {"%=", "//="},   {"|=", "&="},
      {"&=", "|="},     {"^=", "|="}};
  return swaps;
}

bool AllDigits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return ch >= '0' && ch <= '9';
  });
}

// Identifier or dotted attribute chain such as self.items.
bool PlainName(const std::string& s) {
  if (s.empty() || (s[0] >= '0' && s[0] <= '9') || s.back() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return ch == '_' || ch == '.' || (ch >= 'a' && ch <= 'z') ||
           (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9');
  });
}

// Later choices when the first alternative collides with another
// location's solution text.
std::vector<std::string> Fallbacks(const std::string& text) {
  if (text.size() >= 2 && text.back() == '=' && text != "==" && text != "<=" &&
      text != ">=" && text != "!=") {
    return {"+=", "-=", "*=", "|=", "&="};
  }
  if (OperatorSwaps().contains(text)) {
    if (text == "not" || text == "-") return {"-", "+", "~"};
    return {"-", "+", "*", "==", "!=", "<", ">"};
  }
  return {"None", "0", "-1", "2.5"};
}

}  // namespace

std::string AlternativeFill(int rule_id, const std::string& text) {
  if (auto it = OperatorSwaps().find(text); it != OperatorSwaps().end()) return it->second;
  if (text == "True") return "False";
  if (text == "False") return "True";
  if (text == "None") return "0";
  if (rule_id == 1 && text.size() >= 2 && text.front() == '(' && text.back() == ')') {
    return text.substr(0, text.size() - 1) + ", extra=None)";
  }
  if (text.starts_with("return")) return text == "return None" ? "return 0" : "return None";
  if (AllDigits(text)) return text + "1";
  if (!text.empty() && (text.back() == '"' || text.back() == '\'')) {
    char quote = text.back();
    std::size_t open = text.find(quote);
    std::size_t run = 0;
    while (open + run < text.size() && text[open + run] == quote && run < 3) ++run;
    if (run == 2) run = 1;  // empty string literal
    return text.substr(0, open + run) + "_" + text.substr(open + run);
  }
  if (text.find_first_not_of("0123456789.") == std::string::npos) return text + "1";
  if (PlainName(text)) return text + "_x";
  return "None";
}

std::vector<ResolutionTrial> ResolutionTrials(const corpus::AdaptationCase& c,
                                              int random_mixes, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<ResolutionTrial> trials;
  for (const auto& t : perturb::PerturbAll(c)) {
    std::string placeholder(perturb::Rule(t.rule_id).placeholder);
    std::vector<std::string> solution;
    for (const auto& loc : t.locations) {
      solution.push_back(c.solution_method.substr(loc.span.start, loc.span.size()));
    }
    // A permutation of solution texts is a move to tree matching but a
    // change to text splicing, so alternatives avoid every solution text.
    std::set<std::string> taken(solution.begin(), solution.end());
    std::vector<std::string> alternative;
    for (const auto& text : solution) {
      std::string choice = AlternativeFill(t.rule_id, text);
      for (const auto& fallback : Fallbacks(text)) {
        if (!taken.contains(choice)) break;
        choice = fallback;
      }
      alternative.push_back(choice);
    }
    std::vector<std::vector<std::string>> mixes = {solution, alternative};
    for (int m = 0; m < random_mixes; ++m) {
      std::vector<std::string> mix = solution;
      for (std::size_t i = 0; i < mix.size(); ++i) {
        if (rng() & 1u) mix[i] = alternative[i];
      }
      mixes.push_back(std::move(mix));
    }
    for (const auto& fills : mixes) {
      ResolutionTrial trial;
      trial.template_id = t.Id();
      trial.locations = t.locations;
      trial.output = perturb::FillPlaceholders(t.template_source, placeholder, fills);
      trial.expected = SpliceResolution(t.template_source, placeholder, solution, fills);
      trials.push_back(std::move(trial));
    }
  }
  return trials;
}

}  // namespace ctxbug::oracles

namespace ctxbug::oracles {

namespace {

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::size_t Indent(const std::string& line) {
  std::size_t n = 0;
  while (n < line.size() && line[n] == ' ') ++n;
  return n;
}

bool IsWord(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// True when `line` contains `name(` preceded by nothing word-like, or by
// one of the accepted receivers and a dot.
bool LineCalls(const std::string& line, const std::string& name,
               const std::vector<std::string>& receivers) {
  for (std::size_t pos = line.find(name); pos != std::string::npos;
       pos = line.find(name, pos + 1)) {
    std::size_t after = pos + name.size();
    while (after < line.size() && line[after] == ' ') ++after;
    if (after >= line.size() || line[after] != '(') continue;
    if (pos + name.size() < line.size() && IsWord(line[pos + name.size()])) continue;
    if (pos == 0 || (!IsWord(line[pos - 1]) && line[pos - 1] != '.')) return true;
    if (line[pos - 1] != '.') continue;
    for (const auto& receiver : receivers) {
      std::size_t r = pos - 1;
      if (r < receiver.size()) continue;
      std::size_t begin = r - receiver.size();
      if (line.compare(begin, receiver.size(), receiver) != 0) continue;
      if (begin == 0 || !IsWord(line[begin - 1])) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> RemovedMethodsByScan(const std::string& class_source,
                                              const std::string& class_name,
                                              const std::string& target) {
  std::vector<std::string> lines = Lines(class_source);
  std::size_t class_indent = std::string::npos;
  std::size_t method_indent = std::string::npos;
  struct Method {
    std::string name;
    std::vector<std::string> body;
  };
  std::vector<Method> methods;
  for (const auto& line : lines) {
    std::size_t indent = Indent(line);
    std::string stripped = line.substr(indent);
    if (stripped.empty()) continue;
    if (class_indent == std::string::npos) {
      if (stripped.rfind("class " + class_name, 0) == 0) class_indent = indent;
      continue;
    }
    if (indent <= class_indent) break;
    if (method_indent == std::string::npos) method_indent = indent;
    if (indent == method_indent && stripped.rfind("def ", 0) == 0) {
      std::size_t open = stripped.find('(');
      methods.push_back({stripped.substr(4, open - 4), {}});
      continue;
    }
    if (!methods.empty() && indent > method_indent) methods.back().body.push_back(line);
  }
  std::vector<std::string> removed = {target};
  const std::vector<std::string> receivers = {"self", "cls", class_name};
  for (const auto& method : methods) {
    if (method.name == target) continue;
    for (const auto& line : method.body) {
      std::string code = line.substr(0, line.find('#'));
      if (LineCalls(code, target, receivers)) {
        removed.push_back(method.name);
        break;
      }
    }
  }
  return removed;
}

std::vector<std::string> ImportRootsByScan(const std::string& source,
                                           const std::set<std::string, std::less<>>& stdlib) {
  std::set<std::string> roots;
  auto add = [&](std::string module) {
    while (!module.empty() && module.back() == ' ') module.pop_back();
    std::size_t dot = module.find('.');
    std::string root = module.substr(0, dot);
    if (!root.empty() && !stdlib.contains(root)) roots.insert(root);
  };
  for (const auto& line : Lines(source)) {
    std::string stripped = line.substr(Indent(line));
    if (stripped.rfind("import ", 0) == 0) {
      std::string rest = stripped.substr(7);
      std::size_t start = 0;
      while (start <= rest.size()) {
        std::size_t comma = rest.find(',', start);
        if (comma == std::string::npos) comma = rest.size();
        std::string item = rest.substr(start, comma - start);
        item.erase(0, item.find_first_not_of(' '));
        add(item.substr(0, item.find(' ')));
        start = comma + 1;
      }
    } else if (stripped.rfind("from ", 0) == 0) {
      std::string module = stripped.substr(5, stripped.find(" import") - 5);
      if (!module.empty() && module[0] != '.') add(module);
    }
  }
  return {roots.begin(), roots.end()};
}

}  // namespace ctxbug::oracles
