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

#include "ctxbug/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "ctxbug/syntax.hpp"

namespace ctxbug::baselines {

namespace {

std::vector<perturb::Location> CheckedLocations(const identify::BugInstance& instance) {
  if (instance.kind != identify::BugKind::kCtxBug) {
    throw std::invalid_argument("baselines are built from CtxBug instances");
  }
  std::vector<perturb::Location> locations = instance.SolutionLocations();
  std::sort(locations.begin(), locations.end(),
            [](const auto& a, const auto& b) { return a.span < b.span; });
  for (std::size_t i = 1; i < locations.size(); ++i) {
    if (locations[i - 1].span.Overlaps(locations[i].span)) {
      throw std::invalid_argument("overlapping bug locations in " + instance.instance_id);
    }
  }
  return locations;
}

nlohmann::json LocationsJson(const std::vector<perturb::Location>& locations) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& loc : locations) {
    out.push_back({{"path", loc.path}, {"span", {loc.span.start, loc.span.end}}});
  }
  return out;
}

}  // namespace

MaskedCode BuildWithoutCtxBugs(const corpus::AdaptationCase& c,
                               const identify::BugInstance& instance) {
  MaskedCode masked;
  masked.case_id = c.case_id;
  masked.source_instance_id = instance.instance_id;
  masked.locations = CheckedLocations(instance);
  std::vector<syntax::SpanEdit> edits;
  for (const auto& loc : masked.locations) {
    edits.push_back({loc.span, std::string(perturb::kInfillPlaceholder)});
  }
  masked.source = syntax::Splice(c.solution_method, std::move(edits));
  return masked;
}

MarkedCode BuildMarked(const corpus::AdaptationCase& c,
                       const identify::BugInstance& instance) {
  MarkedCode marked;
  marked.case_id = c.case_id;
  marked.source_instance_id = instance.instance_id;
  marked.locations = CheckedLocations(instance);
  std::vector<syntax::SpanEdit> edits;
  for (const auto& loc : marked.locations) {
    std::string text = c.solution_method.substr(loc.span.start, loc.span.size());
    edits.push_back({loc.span, std::string(llm::kStartMarker) + text +
                                   std::string(llm::kEndMarker)});
  }
  marked.source = syntax::Splice(c.solution_method, std::move(edits));
  return marked;
}

std::string StripMarkers(std::string_view marked) {
  std::string out;
  out.reserve(marked.size());
  for (std::size_t i = 0; i < marked.size();) {
    std::string_view rest = marked.substr(i);
    if (rest.starts_with(llm::kStartMarker)) {
      i += llm::kStartMarker.size();
    } else if (rest.starts_with(llm::kEndMarker)) {
      i += llm::kEndMarker.size();
    } else {
      out.push_back(marked[i++]);
    }
  }
  return out;
}

std::string Unmask(std::string_view masked, const std::vector<std::string>& fills) {
  return perturb::FillPlaceholders(masked, perturb::kInfillPlaceholder, fills);
}

nlohmann::json ToJson(const MaskedCode& masked) {
  return {{"case_id", masked.case_id},
          {"source_instance_id", masked.source_instance_id},
          {"source", masked.source},
          {"locations", LocationsJson(masked.locations)}};
}

MaskedCode MaskedFromJson(const nlohmann::json& j) {
  MaskedCode masked;
  masked.case_id = j.at("case_id").get<std::string>();
  masked.source_instance_id = j.at("source_instance_id").get<std::string>();
  masked.source = j.at("source").get<std::string>();
  for (const auto& l : j.at("locations")) {
    masked.locations.push_back({l.at("path").get<syntax::NodePath>(),
                                {l.at("span").at(0).get<std::size_t>(),
                                 l.at("span").at(1).get<std::size_t>()}});
  }
  return masked;
}

identify::Classification ClassifyIsoBug(const corpus::AdaptationCase& c,
                                        const identify::BugInstance& ctxbug,
                                        const llm::Generation& generation,
                                        const std::string& generator_model_id,
                                        const identify::ClassifyOptions& options) {
  identify::VariantSpec spec;
  spec.kind = identify::BugKind::kIsoBug;
  spec.provenance = ctxbug.instance_id + "~markers";
  spec.rule_id = ctxbug.rule_id;
  spec.locations = CheckedLocations(ctxbug);
  spec.source_instance_id = ctxbug.instance_id;
  spec.generator_model_id = generator_model_id;
  if (generation.failed) {
    throw identify::InfrastructureError("generation failed for " + ctxbug.instance_id +
                                        ": " + generation.error);
  }
  llm::ExtractedCode extracted = llm::ExtractCode(StripMarkers(generation.text));
  return identify::ClassifyCode(c, spec, extracted.empty ? "" : extracted.code, options);
}

IsoBugAttempt BuildIsoBug(const corpus::AdaptationCase& c,
                          const identify::BugInstance& ctxbug, llm::Backend& generator,
                          const std::string& generator_model_id,
                          const identify::ClassifyOptions& options) {
  IsoBugAttempt attempt;
  attempt.source_instance_id = ctxbug.instance_id;
  MarkedCode marked = BuildMarked(c, ctxbug);
  attempt.prompt = llm::BuildIsoBugPrompt(marked.source, c.requirement);
  attempt.prompt.case_id = c.case_id;
  attempt.prompt.tag = ctxbug.instance_id;
  attempt.generation = generator.Generate(attempt.prompt);
  attempt.classification =
      ClassifyIsoBug(c, ctxbug, attempt.generation, generator_model_id, options);
  return attempt;
}

}  // namespace ctxbug::baselines
