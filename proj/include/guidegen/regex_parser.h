// Copyright 2026 The guidegen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GUIDEGEN_REGEX_PARSER_H_
#define GUIDEGEN_REGEX_PARSER_H_

#include <string_view>
#include <vector>

namespace guidegen {

// Inclusive range of code points.
struct CharRange {
  char32_t lo;
  char32_t hi;

  bool operator==(const CharRange&) const = default;
};

// Sorts, merges and drops empty ranges.
std::vector<CharRange> NormalizeRanges(std::vector<CharRange> ranges);
std::vector<CharRange> ComplementRanges(const std::vector<CharRange>& ranges);

struct RegexNode {
  enum class Kind { kEmpty, kChars, kConcat, kAlt, kStar, kPlus, kOptional,
                    kRepeat };

  Kind kind = Kind::kEmpty;
  std::vector<CharRange> chars;  // kChars: normalized
  std::vector<RegexNode> children;
  int min = 0;  // kRepeat
  int max = 0;  // kRepeat, -1 for unbounded
};

inline constexpr int kMaxRepeat = 1000;

// Parses the supported regex subset (see docs/regex_syntax.md). The result
// describes whole-string matches; a leading '^' and trailing '$' are accepted
// and ignored. Throws RegexError.
RegexNode ParseRegex(std::u32string_view pattern);

}  // namespace guidegen

#endif  // GUIDEGEN_REGEX_PARSER_H_
