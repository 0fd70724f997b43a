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

#include "ctxbug/perturb.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace ctxbug::perturb {

using syntax::Node;
using syntax::Tree;

namespace {

constexpr std::array<RuleSpec, 10> kRules = {{
    {1, "Parameter", Task::kInterface, Granularity::kAllInstances,
     kParamsPlaceholder},
    {2, "Return Statement", Task::kInterface, Granularity::kAllInstances,
     kReturnPlaceholder},
    {3, "Constant", Task::kFunctionality, Granularity::kAllInstances,
     kInfillPlaceholder},
    {4, "Operator", Task::kFunctionality, Granularity::kAllInstances,
     kInfillPlaceholder},
    {5, "Operation", Task::kFunctionality, Granularity::kPerOccurrence,
     kInfillPlaceholder},
    {6, "Conditional", Task::kFunctionality, Granularity::kPerOccurrence,
     kInfillPlaceholder},
    {7, "Function Call", Task::kFunctionality, Granularity::kPerOccurrence,
     kInfillPlaceholder},
    {8, "Bounded Identifier", Task::kIdentifier, Granularity::kAllInstances,
     kInfillPlaceholder},
    {9, "Free Identifier", Task::kIdentifier, Granularity::kAllInstances,
     kVarPlaceholder},
    {10, "Library Usage", Task::kDependency, Granularity::kAllInstances,
     kInfillPlaceholder},
}};

std::string Text(const Tree& tree, const Node& node) {
  return std::string(syntax::NodeText(tree, node));
}

bool IsOneOf(std::string_view kind, std::initializer_list<std::string_view> kinds) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

// Pre-order walk over the function, skipping type annotations.
void WalkCode(const Node& node, const std::function<void(const Node&)>& visit) {
  if (node.kind == "type") return;
  visit(node);
  for (const Node& child : node.children) WalkCode(child, visit);
}

std::string ConstantType(const Tree& tree, const Node& node) {
  if (node.kind == "integer") return "integer";
  if (node.kind == "float") return "float";
  if (node.kind == "true" || node.kind == "false") return "boolean";
  if (node.kind == "none") return "none";
  if (node.kind == "string") {
    for (const Node& child : node.children) {
      if (child.kind == "interpolation") return "";
    }
    if (python::IsDocstring(tree, node)) return "";
    return "string";
  }
  return "";
}

bool IsOperatorToken(const Tree& tree, const Node& node) {
  if (node.named) return false;
  const Node* parent = tree.Parent(node);
  if (!parent) return false;
  if (IsOneOf(parent->kind, {"binary_operator", "boolean_operator",
                             "unary_operator", "augmented_assignment"})) {
    return node.field == "operator";
  }
  if (parent->kind == "comparison_operator") return node.field == "operators";
  if (parent->kind == "not_operator") return node.kind == "not";
  return false;
}

const Node* RightValue(const Node& assignment) {
  const Node* right = syntax::ChildByField(assignment, "right");
  while (right && right->kind == "assignment") {
    right = syntax::ChildByField(*right, "right");
  }
  return right;
}

const Node* ConditionOf(const Node& node) {
  if (IsOneOf(node.kind, {"if_statement", "elif_clause", "while_statement"})) {
    return syntax::ChildByField(node, "condition");
  }
  if (node.kind == "conditional_expression") {
    // body "if" condition "else" alternative
    bool after_if = false;
    for (const Node& child : node.children) {
      if (after_if && child.named) return &child;
      if (!child.named && child.kind == "if") after_if = true;
    }
  }
  return nullptr;
}

bool IsSelfLike(std::string_view name) { return name == "self" || name == "cls"; }

bool IsBoundedAttribute(const Tree& tree, const Node& node,
                        const RuleContext& context) {
  if (node.kind != "attribute") return false;
  const Node* object = syntax::ChildByField(node, "object");
  if (!object || object->kind != "identifier") return false;
  std::string receiver = Text(tree, *object);
  return IsSelfLike(receiver) ||
         (!context.class_name.empty() && receiver == context.class_name);
}

python::NameSet GlobalDeclarations(const Tree& tree, const Node& function) {
  python::NameSet names;
  syntax::Walk(function, [&](const Node& node) {
    if (node.kind == "global_statement" || node.kind == "nonlocal_statement") {
      for (const Node& c : node.children) {
        if (c.kind == "identifier") names.insert(Text(tree, c));
      }
    }
    return true;
  });
  return names;
}

// Names bound anywhere inside the function (parameters included).
python::NameSet LocalNames(const Tree& tree, const Node& function) {
  python::NameSet locals;
  for (auto& name : python::ParameterNames(tree, function)) locals.insert(name);
  const Node* body = syntax::ChildByField(function, "body");
  if (body) {
    syntax::Walk(*body, [&](const Node& node) {
      if (node.kind == "identifier" && python::IsBindingOccurrence(tree, node)) {
        locals.insert(Text(tree, node));
      }
      return true;
    });
  }
  for (const auto& name : GlobalDeclarations(tree, function)) locals.erase(name);
  for (const char* self_like : {"self", "cls"}) locals.erase(self_like);
  return locals;
}

std::vector<const Node*> SelectRule1(const Node& function) {
  const Node* params = syntax::ChildByField(function, "parameters");
  if (!params) return {};
  return {params};
}

std::vector<const Node*> SelectRule2(const Node& function) {
  std::vector<const Node*> targets;
  syntax::Walk(function, [&](const Node& node) {
    if (node.kind == "return_statement") targets.push_back(&node);
    return true;
  });
  return targets;
}

std::vector<const Node*> SelectRule4(const Tree& tree, const Node& function) {
  std::vector<const Node*> targets;
  WalkCode(function, [&](const Node& node) {
    if (IsOperatorToken(tree, node)) targets.push_back(&node);
  });
  return targets;
}

std::vector<const Node*> SelectRule5(const Node& function) {
  std::vector<const Node*> targets;
  syntax::Walk(function, [&](const Node& node) {
    if (node.kind == "assignment" || node.kind == "augmented_assignment") {
      if (const Node* right = RightValue(node)) targets.push_back(right);
      // Chained assignments are one statement; the inner assignment is
      // reached through RightValue only.
      return node.kind != "assignment" ||
             syntax::ChildByField(node, "right") == nullptr ||
             syntax::ChildByField(node, "right")->kind != "assignment";
    }
    return true;
  });
  return targets;
}

std::vector<const Node*> SelectRule6(const Node& function) {
  std::vector<const Node*> targets;
  syntax::Walk(function, [&](const Node& node) {
    if (const Node* condition = ConditionOf(node)) targets.push_back(condition);
    return true;
  });
  return targets;
}

std::vector<const Node*> SelectRule7(const Tree& tree, const Node& function,
                                     const RuleContext& context) {
  std::vector<const Node*> targets;
  syntax::Walk(function, [&](const Node& node) {
    if (node.kind != "call") return true;
    bool own_method = false;
    for (const auto& method : context.class_methods) {
      if (python::CallTargets(tree, node, method, context.class_name)) {
        own_method = true;
        break;
      }
    }
    const Node* callee = syntax::ChildByField(node, "function");
    if (!own_method && callee && callee->kind == "identifier" &&
        context.module_names.contains(Text(tree, *callee))) {
      own_method = true;  // module-level function of the target context
    }
    if (!own_method) targets.push_back(&node);
    return true;
  });
  return targets;
}

std::vector<const Node*> SelectRule8(const Tree& tree, const Node& function,
                                     const RuleContext& context) {
  std::vector<const Node*> targets;
  python::NameSet locals = LocalNames(tree, function);
  const Node* body = syntax::ChildByField(function, "body");
  if (!body) return targets;
  syntax::Walk(*body, [&](const Node& node) {
    if (IsBoundedAttribute(tree, node, context)) {
      targets.push_back(&node);
      return false;
    }
    if (node.kind == "identifier" && python::IsNameReference(tree, node)) {
      std::string name = Text(tree, node);
      if (context.module_names.contains(name) && !locals.contains(name)) {
        targets.push_back(&node);
      }
    }
    return true;
  });
  return targets;
}

std::vector<const Node*> SelectRule9(const Tree& tree, const Node& function) {
  python::NameSet locals = LocalNames(tree, function);
  python::NameSet parameters;
  for (auto& name : python::ParameterNames(tree, function)) parameters.insert(name);
  const Node* body = syntax::ChildByField(function, "body");
  if (!body) return {};

  std::vector<const Node*> occurrences;
  std::map<std::string, const Node*, std::less<>> first_binding;
  syntax::Walk(*body, [&](const Node& node) {
    if (node.kind != "identifier" || !python::IsNameReference(tree, node)) return true;
    std::string name = Text(tree, node);
    if (!locals.contains(name)) return true;
    if (!parameters.contains(name) && !first_binding.contains(name) &&
        python::IsBindingOccurrence(tree, node)) {
      first_binding.emplace(name, &node);
      return true;
    }
    occurrences.push_back(&node);
    return true;
  });
  return occurrences;
}

std::vector<const Node*> SelectRule10(const Tree& tree, const Node& function,
                                      const RuleContext& context) {
  std::vector<const Node*> targets;
  if (context.library_names.empty()) return targets;
  python::NameSet locals = LocalNames(tree, function);
  const Node* body = syntax::ChildByField(function, "body");
  if (!body) return targets;
  WalkCode(*body, [&](const Node& node) {
    if (node.kind != "attribute" && node.kind != "call") return;
    const Node* root = python::ReceiverRoot(node);
    if (!root) return;
    std::string name = Text(tree, *root);
    if (context.library_names.contains(name) && !locals.contains(name)) {
      targets.push_back(&node);
    }
  });
  return targets;
}

}  // namespace

const std::array<RuleSpec, 10>& Rules() { return kRules; }

const RuleSpec& Rule(int rule_id) {
  if (rule_id < 1 || rule_id > 10) {
    throw std::out_of_range("rule id out of range: " + std::to_string(rule_id));
  }
  return kRules[rule_id - 1];
}

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kInterface:
      return "Interface";
    case Task::kFunctionality:
      return "Functionality";
    case Task::kIdentifier:
      return "Identifier";
    case Task::kDependency:
      return "Dependency";
  }
  return "";
}

Task TaskForRule(int rule_id) { return Rule(rule_id).task; }

std::string PerturbedTemplate::Id() const {
  std::string id = case_id + "#r" + std::to_string(rule_id);
  if (constant_type) id += ":" + *constant_type;
  if (occurrence_index) id += ":" + std::to_string(*occurrence_index);
  return id;
}

nlohmann::json ToJson(const PerturbedTemplate& t) {
  nlohmann::json j = nlohmann::json::object();
  j["template_id"] = t.Id();
  j["case_id"] = t.case_id;
  j["rule_id"] = t.rule_id;
  j["template_source"] = t.template_source;
  nlohmann::json spans = nlohmann::json::array();
  nlohmann::json paths = nlohmann::json::array();
  for (const Location& loc : t.locations) {
    spans.push_back({loc.span.start, loc.span.end});
    paths.push_back(loc.path);
  }
  j["locations"] = std::move(spans);
  j["paths"] = std::move(paths);
  j["constant_type"] = t.constant_type ? nlohmann::json(*t.constant_type)
                                       : nlohmann::json(nullptr);
  j["occurrence_index"] = t.occurrence_index
                              ? nlohmann::json(*t.occurrence_index)
                              : nlohmann::json(nullptr);
  return j;
}

PerturbedTemplate TemplateFromJson(const nlohmann::json& j) {
  PerturbedTemplate t;
  t.case_id = j.at("case_id").get<std::string>();
  t.rule_id = j.at("rule_id").get<int>();
  t.template_source = j.at("template_source").get<std::string>();
  const auto& spans = j.at("locations");
  const auto& paths = j.at("paths");
  if (spans.size() != paths.size()) {
    throw std::invalid_argument("locations/paths length mismatch");
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Location loc;
    loc.span = {spans[i].at(0).get<std::size_t>(), spans[i].at(1).get<std::size_t>()};
    loc.path = paths[i].get<syntax::NodePath>();
    t.locations.push_back(std::move(loc));
  }
  if (!j.at("constant_type").is_null()) {
    t.constant_type = j.at("constant_type").get<std::string>();
  }
  if (!j.at("occurrence_index").is_null()) {
    t.occurrence_index = j.at("occurrence_index").get<int>();
  }
  return t;
}

RuleContext BuildRuleContext(const corpus::AdaptationCase& c) {
  RuleContext context;
  context.class_name = c.class_name;
  Tree tree = syntax::Parse(c.class_context);
  if (const Node* class_node = python::FindClass(tree, c.class_name)) {
    for (const auto& site : python::ClassMethods(tree, *class_node)) {
      context.class_methods.insert(site.name);
    }
  }
  context.module_names = python::ModuleLevelNames(tree);
  python::NameSet deps(c.lib_deps.begin(), c.lib_deps.end());
  for (const auto& binding : python::ImportBindings(tree)) {
    if (!binding.relative && deps.contains(binding.module_root)) {
      context.library_names.insert(binding.bound_name);
    }
  }
  return context;
}

std::vector<const Node*> OutermostOnly(std::vector<const Node*> nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) {
    if (a->span.start != b->span.start) return a->span.start < b->span.start;
    if (a->span.end != b->span.end) return a->span.end > b->span.end;
    return a->path.size() < b->path.size();
  });
  std::vector<const Node*> kept;
  for (const Node* node : nodes) {
    if (!kept.empty() && kept.back()->span.Contains(node->span)) continue;
    kept.push_back(node);
  }
  return kept;
}

std::vector<std::vector<const Node*>> SelectTargets(
    const Tree& solution, const RuleSpec& rule, const RuleContext& context,
    std::vector<std::string>* constant_types) {
  std::vector<std::vector<const Node*>> groups;
  const Node* function = python::SoleFunction(solution);
  if (!function) return groups;

  auto all_instances = [&](std::vector<const Node*> nodes) {
    if (!nodes.empty()) groups.push_back(std::move(nodes));
  };
  auto per_occurrence = [&](const std::vector<const Node*>& nodes) {
    for (const Node* node : nodes) groups.push_back({node});
  };

  switch (rule.rule_id) {
    case 1:
      all_instances(SelectRule1(*function));
      break;
    case 2:
      all_instances(SelectRule2(*function));
      break;
    case 3: {
      std::map<std::string, std::vector<const Node*>> by_type;
      WalkCode(*function, [&](const Node& node) {
        std::string type = ConstantType(solution, node);
        if (!type.empty()) by_type[type].push_back(&node);
      });
      for (std::string_view type : kConstantTypes) {
        auto it = by_type.find(std::string(type));
        if (it == by_type.end()) continue;
        groups.push_back(it->second);
        if (constant_types) constant_types->emplace_back(type);
      }
      break;
    }
    case 4:
      all_instances(SelectRule4(solution, *function));
      break;
    case 5:
      per_occurrence(SelectRule5(*function));
      break;
    case 6:
      per_occurrence(SelectRule6(*function));
      break;
    case 7:
      per_occurrence(SelectRule7(solution, *function, context));
      break;
    case 8:
      all_instances(SelectRule8(solution, *function, context));
      break;
    case 9:
      all_instances(SelectRule9(solution, *function));
      break;
    case 10:
      all_instances(SelectRule10(solution, *function, context));
      break;
    default:
      throw std::out_of_range("rule id out of range");
  }
  return groups;
}

std::vector<PerturbedTemplate> ApplyRule(const corpus::AdaptationCase& c,
                                         const Tree& solution,
                                         const RuleSpec& rule,
                                         const RuleContext& context) {
  std::vector<std::string> constant_types;
  auto groups = SelectTargets(solution, rule, context, &constant_types);
  std::vector<PerturbedTemplate> templates;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<const Node*> nodes = OutermostOnly(groups[g]);
    if (nodes.empty()) continue;
    PerturbedTemplate t;
    t.case_id = c.case_id;
    t.rule_id = rule.rule_id;
    std::vector<syntax::SpanEdit> edits;
    for (const Node* node : nodes) {
      t.locations.push_back({node->path, node->span});
      edits.push_back({node->span, std::string(rule.placeholder)});
    }
    t.template_source = syntax::Splice(solution.source(), std::move(edits));
    if (rule.rule_id == 3) t.constant_type = constant_types.at(g);
    if (rule.granularity == Granularity::kPerOccurrence) {
      t.occurrence_index = static_cast<int>(g);
    }
    templates.push_back(std::move(t));
  }
  return templates;
}

std::vector<PerturbedTemplate> ApplyRule(const corpus::AdaptationCase& c,
                                         const Tree& solution,
                                         const RuleSpec& rule) {
  return ApplyRule(c, solution, rule, BuildRuleContext(c));
}

std::vector<PerturbedTemplate> PerturbAll(const corpus::AdaptationCase& c,
                                          const std::vector<int>& rule_ids) {
  Tree solution = syntax::Parse(c.solution_method);
  RuleContext context = BuildRuleContext(c);
  std::vector<PerturbedTemplate> all;
  for (int id : rule_ids) {
    auto templates = ApplyRule(c, solution, Rule(id), context);
    std::move(templates.begin(), templates.end(), std::back_inserter(all));
  }
  return all;
}

std::vector<PerturbedTemplate> PerturbAll(const corpus::AdaptationCase& c) {
  return PerturbAll(c, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
}

std::size_t CountOccurrences(std::string_view text, std::string_view token) {
  if (token.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = text.find(token); pos != std::string_view::npos;
       pos = text.find(token, pos + token.size())) {
    ++count;
  }
  return count;
}

std::string FillPlaceholders(std::string_view template_source,
                             std::string_view placeholder,
                             const std::vector<std::string>& fills) {
  std::string out;
  std::size_t pos = 0;
  std::size_t used = 0;
  for (std::size_t hit = template_source.find(placeholder);
       hit != std::string_view::npos;
       hit = template_source.find(placeholder, pos)) {
    if (used == fills.size()) {
      throw std::invalid_argument("more placeholders than fills");
    }
    out.append(template_source.substr(pos, hit - pos));
    out.append(fills[used++]);
    pos = hit + placeholder.size();
  }
  if (used != fills.size()) {
    throw std::invalid_argument("fewer placeholders than fills");
  }
  out.append(template_source.substr(pos));
  return out;
}

}  // namespace ctxbug::perturb
