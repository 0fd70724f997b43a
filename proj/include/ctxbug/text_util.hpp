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

#ifndef CTXBUG_TEXT_UTIL_HPP_
#define CTXBUG_TEXT_UTIL_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ctxbug::text {

// Splits on '\n'; each piece keeps its terminator except possibly the last.
std::vector<std::string_view> SplitLinesKeepEnds(std::string_view text);

// Column of the first non-blank character of the first non-blank line.
std::size_t LeadingIndent(std::string_view text);

// Removes `width` leading spaces from every line that starts with them.
std::string Dedent(std::string_view text, std::size_t width);
// Dedent by the indentation of the first non-blank line.
std::string DedentToFirstLine(std::string_view text);

// Prefixes every non-empty line after the first with `width` spaces.
// The first line is left alone because it is spliced in at a column that
// already carries the indentation.
std::string IndentFollowingLines(std::string_view text, std::size_t width);

// Collapses every whitespace run to one space and trims the ends.
std::string NormalizeWhitespace(std::string_view text);

std::string_view Trim(std::string_view text);

bool IsWordChar(char c);

// Counts of whole-word (identifier-boundary) matches of `word` in `text`.
std::vector<std::size_t> FindWholeWord(std::string_view text,
                                       std::string_view word);

// Lower-case hex SHA-256 of the bytes.
std::string Sha256Hex(std::string_view bytes);

}  // namespace ctxbug::text

#endif  // CTXBUG_TEXT_UTIL_HPP_
