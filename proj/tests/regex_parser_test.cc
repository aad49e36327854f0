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

#include <gtest/gtest.h>

#include <string>

#include "guidegen/errors.h"
#include "guidegen/fsm.h"
#include "guidegen/regex_parser.h"

namespace guidegen {
namespace {

RegexError::Kind ErrorKind(const std::string& pattern, std::size_t* position = nullptr) {
  try {
    CompileRegex(pattern);
  } catch (const RegexError& e) {
    if (position) *position = e.position();
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << pattern;
  return RegexError::Kind::kSyntax;
}

TEST(RegexParserTest, UnsupportedConstructs) {
  for (const char* p : {"(?=a)b", "(?!a)b", "(?<=a)b", "(?<!a)b", "(a)\\1", "(?P<x>a)(?P=x)",
                        "\\bword", "a\\B", "\\Aa", "a\\Z", "\\p{L}", "(?i)abc", "a*?", "a+?",
                        "a??", "a{2}?", "a*+", "a^b", "a$b", "a{1001}"}) {
    EXPECT_EQ(ErrorKind(p), RegexError::Kind::kUnsupported) << p;
  }
}

TEST(RegexParserTest, SyntaxErrorsCarryPosition) {
  std::size_t pos = 0;
  EXPECT_EQ(ErrorKind("ab(c", &pos), RegexError::Kind::kSyntax);
  EXPECT_EQ(ErrorKind("abc)", &pos), RegexError::Kind::kSyntax);
  EXPECT_EQ(pos, 3u);
  EXPECT_EQ(ErrorKind("*a", &pos), RegexError::Kind::kSyntax);
  EXPECT_EQ(pos, 0u);
  EXPECT_EQ(ErrorKind("a**"), RegexError::Kind::kSyntax);
  EXPECT_EQ(ErrorKind("[abc"), RegexError::Kind::kSyntax);
  EXPECT_EQ(ErrorKind("[z-a]"), RegexError::Kind::kSyntax);
  EXPECT_EQ(ErrorKind("abc\\"), RegexError::Kind::kSyntax);
}

TEST(RegexParserTest, AnchorsAtEdgesAreIgnored) {
  const Fsm fsm = CompileRegex("^ab$");
  EXPECT_TRUE(fsm.Accepts(std::string_view("ab")));
  EXPECT_FALSE(fsm.Accepts(std::string_view("^ab$")));
}

TEST(RegexParserTest, EscapesAndClasses) {
  EXPECT_TRUE(CompileRegex(R"(\x41é\x{4e2d}\t)").Accepts(std::string_view("Aé中\t")));
  EXPECT_TRUE(CompileRegex(R"([\d\s]+)").Accepts(std::string_view("1 2\t3")));
  EXPECT_FALSE(CompileRegex(R"(\W)").Accepts(std::string_view("_")));
  EXPECT_TRUE(CompileRegex(R"(\D)").Accepts(std::string_view("é")));
  EXPECT_TRUE(CompileRegex(R"([]a])").Accepts(std::string_view("]")) ||
              CompileRegex(R"([\]a])").Accepts(std::string_view("]")));
  EXPECT_TRUE(CompileRegex(R"([a\-z])").Accepts(std::string_view("-")));
  EXPECT_TRUE(CompileRegex(R"((?:ab)+)").Accepts(std::string_view("abab")));
  EXPECT_TRUE(CompileRegex(R"((?P<year>19)\d\d)").Accepts(std::string_view("1999")));
}

TEST(RegexParserTest, RangeHelpers) {
  const auto merged = NormalizeRanges({{5, 9}, {1, 3}, {4, 4}, {20, 30}});
  EXPECT_EQ(merged, (std::vector<CharRange>{{1, 9}, {20, 30}}));
  const auto comp = ComplementRanges(merged);
  ASSERT_EQ(comp.size(), 3u);
  EXPECT_EQ(comp.front(), (CharRange{0, 0}));
  EXPECT_EQ(comp.back().hi, 0x10FFFFu);
}

}  // namespace
}  // namespace guidegen
