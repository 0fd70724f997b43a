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

#include "ctxbug/text_util.hpp"

#include <array>
#include <cctype>

#include <openssl/evp.h>

namespace ctxbug::text {

std::vector<std::string_view> SplitLinesKeepEnds(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
    lines.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  return lines;
}

std::size_t LeadingIndent(std::string_view text) {
  for (std::string_view line : SplitLinesKeepEnds(text)) {
    std::size_t width = 0;
    while (width < line.size() && line[width] == ' ') ++width;
    if (width < line.size() && line[width] != '\n' && line[width] != '\r') {
      return width;
    }
  }
  return 0;
}

std::string Dedent(std::string_view text, std::size_t width) {
  std::string out;
  out.reserve(text.size());
  for (std::string_view line : SplitLinesKeepEnds(text)) {
    std::size_t spaces = 0;
    while (spaces < width && spaces < line.size() && line[spaces] == ' ') {
      ++spaces;
    }
    if (spaces == width) line.remove_prefix(width);
    out.append(line);
  }
  return out;
}

std::string DedentToFirstLine(std::string_view text) {
  return Dedent(text, LeadingIndent(text));
}

std::string IndentFollowingLines(std::string_view text, std::size_t width) {
  std::string out;
  out.reserve(text.size() + width * 8);
  bool first = true;
  for (std::string_view line : SplitLinesKeepEnds(text)) {
    if (!first && !line.empty() && line != "\n" && line != "\r\n") {
      out.append(width, ' ');
    }
    out.append(line);
    first = false;
  }
  return out;
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string_view Trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

bool IsWordChar(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

std::vector<std::size_t> FindWholeWord(std::string_view text,
                                       std::string_view word) {
  std::vector<std::size_t> hits;
  if (word.empty()) return hits;
  std::size_t pos = text.find(word);
  while (pos != std::string_view::npos) {
    bool left_ok = pos == 0 || !IsWordChar(text[pos - 1]);
    std::size_t end = pos + word.size();
    bool right_ok = end == text.size() || !IsWordChar(text[end]);
    if (left_ok && right_ok) hits.push_back(pos);
    pos = text.find(word, pos + 1);
  }
  return hits;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(),
             nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

}  // namespace ctxbug::text
