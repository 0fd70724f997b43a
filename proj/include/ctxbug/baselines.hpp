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

#ifndef CTXBUG_BASELINES_HPP_
#define CTXBUG_BASELINES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"
#include "ctxbug/identify.hpp"
#include "ctxbug/llm.hpp"
#include "ctxbug/perturb.hpp"

// Comparison settings derived from validated CtxBugs: the masked
// "without CtxBugs" code and IsoBugs implanted at the same locations.
namespace ctxbug::baselines {

struct MaskedCode {
  std::string case_id;
  std::string source_instance_id;
  std::string source;  // solution with each bug location as <INFILL>
  std::vector<perturb::Location> locations;
};

struct MarkedCode {
  std::string case_id;
  std::string source_instance_id;
  std::string source;  // solution with inline <START>/<END> around locations
  std::vector<perturb::Location> locations;
};

// Locations must not overlap. Throws std::invalid_argument otherwise, or
// when a CtxBug is not given.
MaskedCode BuildWithoutCtxBugs(const corpus::AdaptationCase& c,
                               const identify::BugInstance& instance);
MarkedCode BuildMarked(const corpus::AdaptationCase& c,
                       const identify::BugInstance& instance);

// Inverse of BuildMarked: removes every marker token.
std::string StripMarkers(std::string_view marked);

// Restores the solution from masked code by splicing location texts.
std::string Unmask(std::string_view masked, const std::vector<std::string>& fills);

nlohmann::json ToJson(const MaskedCode& masked);
MaskedCode MaskedFromJson(const nlohmann::json& j);

struct IsoBugAttempt {
  std::string source_instance_id;
  llm::Prompt prompt;
  llm::Generation generation;
  identify::Classification classification;
};

// One generation per CtxBug, classified against the CtxBug's locations
// with the same pipeline; the instance is set when it is Valid. The
// IsoBug prompt carries no obfuscation, so no map is applied.
IsoBugAttempt BuildIsoBug(const corpus::AdaptationCase& c,
                          const identify::BugInstance& ctxbug, llm::Backend& generator,
                          const std::string& generator_model_id,
                          const identify::ClassifyOptions& options);

// Classification step alone, for a generation already in hand.
identify::Classification ClassifyIsoBug(const corpus::AdaptationCase& c,
                                        const identify::BugInstance& ctxbug,
                                        const llm::Generation& generation,
                                        const std::string& generator_model_id,
                                        const identify::ClassifyOptions& options);

}  // namespace ctxbug::baselines

#endif  // CTXBUG_BASELINES_HPP_
