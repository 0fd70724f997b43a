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

#include "ctxbug/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <semaphore>
#include <set>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ctxbug/embedded_resources.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"
#include "ctxbug/text_util.hpp"

namespace ctxbug::llm {

using nlohmann::json;

namespace {

std::string JoinComma(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

// Code between the first ```python fence after `heading` and its closing
// fence.
std::optional<std::string> SectionCode(std::string_view prompt,
                                       std::string_view heading) {
  std::size_t at = prompt.find(heading);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t open = prompt.find("```python\n", at);
  if (open == std::string_view::npos) return std::nullopt;
  open += 10;
  std::size_t close = prompt.find("\n```", open);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(prompt.substr(open, close - open));
}

std::uint64_t SeedFrom(std::string_view key) {
  std::string hex = text::Sha256Hex(key);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

// Deterministic choice helper. Uses raw engine output only, so the
// sequence does not depend on the standard library's distributions.
class Chooser {
 public:
  explicit Chooser(std::uint64_t seed) : engine_(seed) {}
  std::size_t Index(std::size_t n) { return n == 0 ? 0 : engine_() % n; }
  template <typename T>
  const T& Pick(const std::vector<T>& items) {
    return items[Index(items.size())];
  }
  double Unit() {  // in (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

bool IsOperandEnd(char c) {
  return text::IsWordChar(c) || c == ')' || c == ']' || c == '}' || c == '"' ||
         c == '\'';
}

bool IsOperandStart(char c) {
  return text::IsWordChar(c) || c == '(' || c == '[' || c == '{' || c == '"' ||
         c == '\'' || c == '-' || c == '<';
}

std::string_view PreviousWord(std::string_view text, std::size_t end) {
  std::size_t start = end;
  while (start > 0 && text::IsWordChar(text[start - 1])) --start;
  return text.substr(start, end - start);
}

std::vector<std::string> TemplateNames(std::string_view source) {
  std::set<std::string> names;
  std::size_t i = 0;
  while (i < source.size()) {
    if (!text::IsWordChar(source[i]) ||
        std::isdigit(static_cast<unsigned char>(source[i]))) {
      // Skip whole numeric words so "0x1f" does not leak "x1f".
      while (i < source.size() && text::IsWordChar(source[i])) ++i;
      if (i < source.size()) ++i;
      continue;
    }
    std::size_t j = i;
    while (j < source.size() && text::IsWordChar(source[j])) ++j;
    std::string word(source.substr(i, j - i));
    bool placeholder_word = i > 0 && source[i - 1] == '<';
    if (!placeholder_word && !python::Keywords().contains(word) && word != "self" &&
        word != "def" && word != "cls") {
      names.insert(word);
    }
    i = j;
  }
  return {names.begin(), names.end()};
}

// Fills placeholders with plausible code, chosen deterministically.
std::string FillTemplate(std::string_view source, Chooser& chooser) {
  static const std::vector<std::string> kBinary = {"+", "-", "*", "|", "&",
                                                   "==", "<", "and", "or"};
  static const std::vector<std::string> kUnary = {"not", "-"};
  static const std::vector<std::string> kParams = {"(self)", "(self, value)",
                                                   "(self, *args)"};
  std::vector<std::string> names = TemplateNames(source);
  std::vector<std::string> expressions = {"0", "1", "None", "True"};
  expressions.insert(expressions.end(), names.begin(), names.end());
  std::vector<std::string> returns = {"return None", "return self"};
  for (const auto& name : names) returns.push_back("return " + name);
  std::vector<std::string> variables = names.empty()
                                           ? std::vector<std::string>{"value"}
                                           : names;

  std::string out;
  std::size_t pos = 0;
  while (pos < source.size()) {
    std::size_t best = std::string_view::npos;
    std::string_view which;
    for (std::string_view placeholder : perturb::kPlaceholders) {
      std::size_t hit = source.find(placeholder, pos);
      if (hit < best) {
        best = hit;
        which = placeholder;
      }
    }
    if (best == std::string_view::npos) break;
    out.append(source.substr(pos, best - pos));
    if (which == perturb::kParamsPlaceholder) {
      out += chooser.Pick(kParams);
    } else if (which == perturb::kReturnPlaceholder) {
      out += chooser.Pick(returns);
    } else if (which == perturb::kVarPlaceholder) {
      out += chooser.Pick(variables);
    } else {
      std::size_t before = best;
      while (before > 0 && source[before - 1] == ' ') --before;
      std::size_t after = best + which.size();
      while (after < source.size() && source[after] == ' ') ++after;
      bool operand_before =
          before > 0 && IsOperandEnd(source[before - 1]) &&
          !python::Keywords().contains(PreviousWord(source, before));
      bool operand_after = after < source.size() && IsOperandStart(source[after]);
      if (operand_before && operand_after) {
        out += chooser.Pick(kBinary);
      } else if (operand_after) {
        out += chooser.Pick(kUnary);
      } else {
        out += chooser.Pick(expressions);
      }
    }
    pos = best + which.size();
  }
  out.append(source.substr(pos));
  return out;
}

std::string MutateSpan(std::string_view span, Chooser& chooser) {
  static const std::map<std::string, std::vector<std::string>, std::less<>>
      kSwaps = {{"+", {"-", "*"}},       {"-", {"+"}},         {"*", {"+", "/"}},
                {"/", {"*", "//"}},      {"//", {"/"}},        {"%", {"//"}},
                {"**", {"*"}},           {"|", {"-", "&", "^"}}, {"&", {"|"}},
                {"^", {"|"}},            {"<<", {">>"}},       {">>", {"<<"}},
                {"<", {">=", "<="}},     {"<=", {"<", ">"}},   {">", {"<=", ">="}},
                {">=", {">", "<"}},      {"==", {"!="}},       {"!=", {"=="}},
                {"and", {"or"}},         {"or", {"and"}},      {"in", {"not in"}},
                {"not in", {"in"}},      {"is", {"is not"}},   {"is not", {"is"}},
                {"+=", {"-="}},          {"-=", {"+="}},       {"*=", {"+="}},
                {"|=", {"&="}},          {"&=", {"|="}},       {"True", {"False"}},
                {"False", {"True"}},     {"None", {"0"}},      {"not", {""}}};
  std::string trimmed(text::Trim(span));
  if (auto it = kSwaps.find(trimmed); it != kSwaps.end()) {
    return chooser.Pick(it->second);
  }
  if (!trimmed.empty() &&
      std::all_of(trimmed.begin(), trimmed.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    if (trimmed.size() > 18) return trimmed + "1";
    return std::to_string(std::stoll(trimmed) + 1);
  }
  if (trimmed.size() >= 2 && (trimmed.back() == '"' || trimmed.back() == '\'')) {
    return trimmed.substr(0, trimmed.size() - 1) + "_" + trimmed.back();
  }
  if (trimmed.starts_with("return")) {
    return trimmed == "return None" ? "return 0" : "return None";
  }
  if (trimmed.starts_with("(") && trimmed.ends_with(")") &&
      trimmed.find(',') != std::string::npos) {
    return trimmed.substr(0, trimmed.rfind(',')) + ")";
  }
  return "None";
}

std::string StubIsoBug(std::string_view marked, Chooser& chooser) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t start = marked.find(kStartMarker, pos);
    if (start == std::string_view::npos) break;
    std::size_t body = start + kStartMarker.size();
    std::size_t end = marked.find(kEndMarker, body);
    if (end == std::string_view::npos) break;
    out.append(marked.substr(pos, start - pos));
    out += MutateSpan(marked.substr(body, end - body), chooser);
    pos = end + kEndMarker.size();
  }
  out.append(marked.substr(pos));
  return out;
}

std::vector<TokenProb> StubTokens(std::string_view text, Chooser& chooser) {
  std::vector<TokenProb> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i + 1;
    if (text::IsWordChar(text[i])) {
      while (j < text.size() && text::IsWordChar(text[j])) ++j;
    } else if (std::isspace(static_cast<unsigned char>(text[i]))) {
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    }
    tokens.push_back({std::string(text.substr(i, j - i)), 0.5 + 0.5 * chooser.Unit(), i});
    i = j;
  }
  return tokens;
}

std::string Fenced(std::string_view code) {
  return "```python\n" + std::string(code) + "\n```\n";
}

}  // namespace

std::string_view PromptKindName(PromptKind kind) {
  switch (kind) {
    case PromptKind::kInfill:
      return "infill";
    case PromptKind::kIsoBug:
      return "isobug";
    case PromptKind::kAdaptation:
      return "adaptation";
  }
  return "";
}

std::string Prompt::Hash() const { return text::Sha256Hex(text); }

std::string RenderTemplate(std::string_view tmpl,
                           const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = tmpl.find("}}", open);
    if (close == std::string_view::npos) {
      throw PromptError("unterminated slot marker");
    }
    std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = slots.find(name);
    if (it == slots.end()) throw PromptError("unresolved slot: " + name);
    out.append(tmpl.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

Prompt BuildInfillPrompt(std::string_view template_source,
                         std::string_view requirement, int rule_id,
                         const std::vector<std::string>& lib_deps) {
  Prompt prompt;
  prompt.kind = PromptKind::kInfill;
  prompt.text = RenderTemplate(embedded::kInfillPrompt,
                               {{"requirement", std::string(requirement)},
                                {"template", std::string(template_source)}});
  if (rule_id == 10) {
    if (lib_deps.empty()) {
      throw PromptError("library restriction requires non-empty lib_deps");
    }
    if (!prompt.text.ends_with('\n')) prompt.text += '\n';
    prompt.text += RenderTemplate(embedded::kInfillLibraryRestriction,
                                  {{"lib_deps", JoinComma(lib_deps)}});
  }
  return prompt;
}

std::size_t CountMarkerPairs(std::string_view text) {
  std::size_t pairs = 0;
  bool open = false;
  std::size_t pos = 0;
  while (true) {
    std::size_t start = text.find(kStartMarker, pos);
    std::size_t end = text.find(kEndMarker, pos);
    if (start == std::string_view::npos && end == std::string_view::npos) break;
    if (start < end) {
      if (open) throw PromptError("nested <START> marker");
      open = true;
      pos = start + kStartMarker.size();
    } else {
      if (!open) throw PromptError("<END> marker without <START>");
      open = false;
      ++pairs;
      pos = end + kEndMarker.size();
    }
  }
  if (open) throw PromptError("unclosed <START> marker");
  return pairs;
}

Prompt BuildIsoBugPrompt(std::string_view marked_method,
                         std::string_view requirement) {
  if (CountMarkerPairs(marked_method) == 0) {
    throw PromptError("marked method has no <START>/<END> pair");
  }
  Prompt prompt;
  prompt.kind = PromptKind::kIsoBug;
  prompt.text = RenderTemplate(embedded::kIsoBugPrompt,
                               {{"requirement", std::string(requirement)},
                                {"marked_method", std::string(marked_method)}});
  return prompt;
}

Prompt BuildAdaptationPrompt(std::string_view requirement,
                             std::string_view reused_code,
                             std::string_view context,
                             std::string_view class_name,
                             std::string_view method_name) {
  syntax::Tree tree = syntax::Parse(std::string(context));
  if (const auto* class_node = python::FindClass(tree, class_name)) {
    for (const auto& site : python::ClassMethods(tree, *class_node)) {
      if (site.name == method_name) {
        throw PromptError("target context still defines " + std::string(method_name));
      }
    }
  }
  Prompt prompt;
  prompt.kind = PromptKind::kAdaptation;
  prompt.text = RenderTemplate(embedded::kAdaptationPrompt,
                               {{"requirement", std::string(requirement)},
                                {"reused_code", std::string(reused_code)},
                                {"context", std::string(context)}});
  return prompt;
}

json ToJson(const Generation& g) {
  json j = json::object();
  j["prompt_hash"] = g.prompt_hash;
  j["model_id"] = g.model_id;
  j["text"] = g.text;
  if (g.token_probs) {
    json probs = json::array();
    for (const auto& t : *g.token_probs) probs.push_back({t.token, t.prob, t.offset});
    j["token_probs"] = std::move(probs);
  } else {
    j["token_probs"] = nullptr;
  }
  j["temperature"] = g.temperature;
  j["max_output_tokens"] = g.max_output_tokens;
  j["truncated"] = g.truncated;
  j["failed"] = g.failed;
  j["error"] = g.error;
  return j;
}

Generation GenerationFromJson(const json& j) {
  Generation g;
  g.prompt_hash = j.value("prompt_hash", std::string());
  g.model_id = j.at("model_id").get<std::string>();
  g.text = j.at("text").get<std::string>();
  if (j.contains("token_probs") && !j.at("token_probs").is_null()) {
    std::vector<TokenProb> probs;
    for (const auto& t : j.at("token_probs")) {
      probs.push_back({t.at(0).get<std::string>(), t.at(1).get<double>(),
                       t.at(2).get<std::size_t>()});
    }
    g.token_probs = std::move(probs);
  }
  g.temperature = j.value("temperature", 0.0);
  g.max_output_tokens = j.value("max_output_tokens", 0);
  g.truncated = j.value("truncated", false);
  g.failed = j.value("failed", false);
  g.error = j.value("error", std::string());
  return g;
}

StubBackend::StubBackend(ModelConfig config) : config_(std::move(config)) {
  if (!config_.stub_table.empty()) {
    std::ifstream in(config_.stub_table);
    if (!in) {
      throw std::runtime_error("stub table not found: " + config_.stub_table.string());
    }
    json table = json::parse(in);
    for (const auto& [hash, response] : table.items()) {
      table_.emplace(hash, response.get<std::string>());
    }
  }
}

Generation StubBackend::Generate(const Prompt& prompt) {
  Generation g;
  g.model_id = config_.model_id;
  g.prompt_hash = prompt.Hash();
  g.temperature = config_.temperature;
  g.max_output_tokens = config_.max_output_tokens;
  Chooser chooser(SeedFrom(prompt.text + '\0' + config_.model_id + '\0' +
                           std::to_string(config_.seed)));
  if (auto it = table_.find(g.prompt_hash); it != table_.end()) {
    g.text = it->second;
  } else {
    switch (prompt.kind) {
      case PromptKind::kInfill:
        g.text = Fenced(FillTemplate(SectionCode(prompt.text, "### Method").value_or(""),
                                     chooser));
        break;
      case PromptKind::kAdaptation:
        g.text = Fenced(FillTemplate(
            SectionCode(prompt.text, "### Reused code").value_or(""), chooser));
        break;
      case PromptKind::kIsoBug:
        g.text = Fenced(
            StubIsoBug(SectionCode(prompt.text, "### Method").value_or(""), chooser));
        break;
    }
  }
  g.token_probs = StubTokens(g.text, chooser);
  return g;
}

struct HttpBackend::Impl {
  ModelConfig config;
  std::string host;  // scheme://host[:port]
  std::string path_prefix;
  std::string api_key;
  std::counting_semaphore<> in_flight;

  explicit Impl(ModelConfig c)
      : config(std::move(c)), in_flight(std::max(1, config.concurrency)) {}
};

HttpBackend::HttpBackend(ModelConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
  std::string base = impl_->config.endpoint;
  if (base.empty()) {
    if (const char* env = std::getenv("CTXBUG_API_BASE")) base = env;
  }
  if (base.empty()) throw std::invalid_argument("no endpoint: set CTXBUG_API_BASE");
  std::size_t scheme = base.find("://");
  std::size_t slash =
      base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  impl_->host = base.substr(0, slash);
  impl_->path_prefix = slash == std::string::npos ? "" : base.substr(slash);
  while (impl_->path_prefix.ends_with('/')) impl_->path_prefix.pop_back();
  if (const char* key = std::getenv("CTXBUG_API_KEY")) impl_->api_key = key;
}

HttpBackend::~HttpBackend() = default;

Generation HttpBackend::Generate(const Prompt& prompt) {
  const ModelConfig& cfg = impl_->config;
  Generation g;
  g.model_id = cfg.model_id;
  g.prompt_hash = prompt.Hash();
  g.temperature = cfg.temperature;
  g.max_output_tokens = cfg.max_output_tokens;

  json body = {{"model", cfg.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
               {"temperature", cfg.temperature},
               {"max_tokens", cfg.max_output_tokens},
               {"logprobs", true}};
  std::string payload = body.dump();
  httplib::Headers headers;
  if (!impl_->api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + impl_->api_key);
  }

  impl_->in_flight.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{impl_->in_flight};

  int backoff = cfg.retry.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, cfg.retry.max_attempts); ++attempt) {
    httplib::Client client(impl_->host);
    client.set_read_timeout(std::chrono::seconds(300));
    auto response = client.Post(impl_->path_prefix + "/chat/completions", headers,
                                payload, "application/json");
    bool retryable = true;
    if (!response) {
      last_error = "transport error: " + httplib::to_string(response.error());
    } else if (response->status == 200) {
      try {
        json reply = json::parse(response->body);
        const json& choice = reply.at("choices").at(0);
        g.text = choice.at("message").at("content").get<std::string>();
        g.truncated = choice.value("finish_reason", std::string()) == "length";
        if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
            choice["logprobs"].contains("content") &&
            choice["logprobs"]["content"].is_array()) {
          std::vector<TokenProb> probs;
          std::size_t offset = 0;
          for (const auto& t : choice["logprobs"]["content"]) {
            std::string token = t.at("token").get<std::string>();
            probs.push_back({token, std::exp(t.at("logprob").get<double>()), offset});
            offset += token.size();
          }
          g.token_probs = std::move(probs);
        }
        return g;
      } catch (const std::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
        retryable = false;
      }
    } else {
      last_error = "HTTP " + std::to_string(response->status);
      retryable = response->status == 429 || response->status >= 500;
    }
    if (!retryable || attempt == cfg.retry.max_attempts) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    backoff = std::min(backoff * 2, cfg.retry.max_backoff_ms);
  }
  g.failed = true;
  g.error = last_error;
  return g;
}

std::unique_ptr<Backend> MakeBackend(const ModelConfig& config) {
  if (config.stub) return std::make_unique<StubBackend>(config);
  return std::make_unique<HttpBackend>(config);
}

ExtractedCode ExtractCode(std::string_view response) {
  ExtractedCode result;
  std::size_t fence = response.find("```");
  if (fence != std::string_view::npos) {
    std::size_t line_end = response.find('\n', fence);
    if (line_end != std::string_view::npos) {
      std::size_t close = response.find("```", line_end + 1);
      std::string_view block = response.substr(
          line_end + 1,
          (close == std::string_view::npos ? response.size() : close) - line_end - 1);
      std::size_t last = block.find_last_not_of(" \n\r\t");
      result.code = text::DedentToFirstLine(
          last == std::string_view::npos ? std::string_view() : block.substr(0, last + 1));
      while (!result.code.empty() && result.code.front() == '\n') {
        result.code.erase(0, 1);
      }
      result.empty = text::Trim(result.code).empty();
      return result;
    }
  }

  // Longest parseable method definition starting at a "def" or "@" line.
  auto lines = text::SplitLinesKeepEnds(response);
  std::size_t offset = 0;
  std::vector<std::size_t> starts;
  for (std::string_view line : lines) {
    std::string_view body = text::Trim(line);
    if (body.starts_with("def ") || body.starts_with("async def ") ||
        body.starts_with("@")) {
      starts.push_back(offset);
    }
    offset += line.size();
  }
  std::string best;
  for (std::size_t start : starts) {
    std::string_view rest = response.substr(start);
    auto rest_lines = text::SplitLinesKeepEnds(rest);
    std::size_t indent = text::LeadingIndent(rest);
    std::size_t length = 0;
    bool header_done = false;
    for (std::string_view line : rest_lines) {
      std::string_view body = text::Trim(line);
      std::size_t width = line.find_first_not_of(' ');
      if (header_done && !body.empty() && width != std::string_view::npos &&
          width <= indent) {
        break;
      }
      if (body.starts_with("def ") || body.starts_with("async def ")) header_done = true;
      length += line.size();
    }
    std::string candidate = text::Dedent(rest.substr(0, length), indent);
    candidate = std::string(text::Trim(candidate));
    syntax::Tree tree = syntax::Parse(candidate);
    if (!tree.has_errors() && python::SoleFunction(tree) &&
        candidate.size() > best.size()) {
      best = candidate;
    }
  }
  if (!best.empty()) {
    result.code = best;
    result.empty = false;
    return result;
  }
  std::string whole(text::Trim(response));
  syntax::Tree whole_tree = syntax::Parse(whole);
  if (!whole.empty() && !whole_tree.has_errors() &&
      python::SoleFunction(whole_tree)) {
    result.code = whole;
    result.empty = false;
  }
  return result;
}

}  // namespace ctxbug::llm
