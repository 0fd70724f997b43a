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

#ifndef CTXBUG_EMBEDDED_RESOURCES_HPP_
#define CTXBUG_EMBEDDED_RESOURCES_HPP_

#include <string_view>

// Contents of config/*.txt and prompts/*.txt, compiled into the library.
namespace ctxbug::embedded {

extern const std::string_view kPythonKeywords;
extern const std::string_view kPythonBuiltins;
extern const std::string_view kStdlibModules;
extern const std::string_view kInfillPrompt;
extern const std::string_view kInfillLibraryRestriction;
extern const std::string_view kIsoBugPrompt;
extern const std::string_view kAdaptationPrompt;

}  // namespace ctxbug::embedded

#endif  // CTXBUG_EMBEDDED_RESOURCES_HPP_
