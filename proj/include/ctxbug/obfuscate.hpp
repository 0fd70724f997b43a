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

#ifndef CTXBUG_OBFUSCATE_HPP_
#define CTXBUG_OBFUSCATE_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"

// Bijective renaming of user-defined identifiers in code and prose.
namespace ctxbug::obfuscate {

enum class Scope { kMethod, kClass };

class ObfuscationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Name-based rename map. Entries keep first-occurrence order.
class RenamingMap {
 public:
  RenamingMap() = default;
  // Throws ObfuscationError if the pairs are not injective both ways.
  RenamingMap(std::vector<std::pair<std::string, std::string>> pairs,
              Scope scope);

  const std::vector<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }
  Scope scope() const { return scope_; }
  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }

  std::optional<std::string_view> Forward(std::string_view original) const;
  std::optional<std::string_view> Backward(std::string_view obfuscated) const;

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  Scope scope_ = Scope::kClass;
  std::map<std::string, std::string, std::less<>> forward_;
  std::map<std::string, std::string, std::less<>> backward_;
};

// Class-level scope scans the class context and the solution; method-level
// scope scans the solution only.
RenamingMap BuildRenaming(const corpus::AdaptationCase& c, Scope scope);

// Token-aware rewrites. Placeholder tokens and string contents are never
// touched. Attribute names are renamed only behind a self, cls, or class
// receiver, so library attributes such as `d.items` keep their meaning.
std::string ObfuscateCode(std::string_view source, const RenamingMap& map);
// Renames every identifier token found in the inverse map, in any position.
std::string DeobfuscateCode(std::string_view source, const RenamingMap& map);

// Whole-word, case-sensitive rewrite of prose.
std::string ObfuscateText(std::string_view text, const RenamingMap& map);
std::string DeobfuscateText(std::string_view text, const RenamingMap& map);

nlohmann::json ToJson(const RenamingMap& map);
RenamingMap MapFromJson(const nlohmann::json& j);

}  // namespace ctxbug::obfuscate

#endif  // CTXBUG_OBFUSCATE_HPP_
