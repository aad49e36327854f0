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

#include "guidegen/regex_parser.h"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>

#include "guidegen/errors.h"
#include "guidegen/utf8.h"

namespace guidegen {

std::vector<CharRange> NormalizeRanges(std::vector<CharRange> ranges) {
  std::erase_if(ranges, [](const CharRange& r) { return r.lo > r.hi; });
  std::sort(ranges.begin(), ranges.end(),
            [](const CharRange& a, const CharRange& b) { return a.lo < b.lo; });
  std::vector<CharRange> out;
  for (const CharRange& r : ranges) {
    if (!out.empty() && r.lo <= out.back().hi + 1) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<CharRange> ComplementRanges(const std::vector<CharRange>& ranges) {
  std::vector<CharRange> norm = NormalizeRanges(ranges);
  std::vector<CharRange> out;
  char32_t next = 0;
  for (const CharRange& r : norm) {
    if (r.lo > next) out.push_back({next, r.lo - 1});
    next = r.hi + 1;
  }
  if (next <= kMaxCodePoint) out.push_back({next, kMaxCodePoint});
  return out;
}

namespace {

const std::vector<CharRange>& DigitRanges() {
  static const std::vector<CharRange> r = {{'0', '9'}};
  return r;
}
const std::vector<CharRange>& WordRanges() {
  static const std::vector<CharRange> r = {
      {'0', '9'}, {'A', 'Z'}, {'_', '_'}, {'a', 'z'}};
  return r;
}
const std::vector<CharRange>& SpaceRanges() {
  static const std::vector<CharRange> r = {{'\t', '\r'}, {' ', ' '}};
  return r;
}

RegexNode CharsNode(std::vector<CharRange> ranges) {
  RegexNode n;
  n.kind = RegexNode::Kind::kChars;
  n.chars = NormalizeRanges(std::move(ranges));
  return n;
}

bool IsHex(char32_t c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
         (c >= 'A' && c <= 'F');
}
unsigned HexValue(char32_t c) {
  if (c <= '9') return c - '0';
  if (c >= 'a') return c - 'a' + 10;
  return c - 'A' + 10;
}
bool IsAsciiAlnum(char32_t c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

// Result of an escape sequence: either one code point or a class.
struct Escape {
  std::optional<char32_t> single;
  std::vector<CharRange> ranges;
};

class RegexParser {
 public:
  explicit RegexParser(std::u32string_view pattern) : p_(pattern) {}

  RegexNode Parse() {
    if (!p_.empty() && p_[0] == '^') pos_ = 1;
    RegexNode root = ParseAlternation();
    if (pos_ < p_.size()) {
      // Only an unmatched ')' can stop the top-level alternation early.
      SyntaxError(pos_, "unbalanced parenthesis");
    }
    return root;
  }

 private:
  [[noreturn]] void SyntaxError(std::size_t at, const std::string& msg) const {
    throw RegexError(RegexError::Kind::kSyntax, at,
                     "regex syntax error at position " + std::to_string(at) +
                         ": " + msg);
  }
  [[noreturn]] void Unsupported(std::size_t at,
                                const std::string& construct) const {
    throw RegexError(RegexError::Kind::kUnsupported, at,
                     "unsupported regex construct at position " +
                         std::to_string(at) + ": " + construct);
  }

  bool AtEnd() const { return pos_ >= p_.size(); }
  char32_t Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < p_.size() ? p_[pos_ + ahead] : U'\0';
  }
  bool Has(std::size_t ahead) const { return pos_ + ahead < p_.size(); }

  RegexNode ParseAlternation() {
    std::vector<RegexNode> branches;
    branches.push_back(ParseConcatenation());
    while (!AtEnd() && Peek() == '|') {
      ++pos_;
      branches.push_back(ParseConcatenation());
    }
    if (branches.size() == 1) return std::move(branches.front());
    RegexNode n;
    n.kind = RegexNode::Kind::kAlt;
    n.children = std::move(branches);
    return n;
  }

  RegexNode ParseConcatenation() {
    std::vector<RegexNode> items;
    while (!AtEnd() && Peek() != '|' && Peek() != ')') {
      items.push_back(ParseRepeat());
    }
    if (items.empty()) return RegexNode{};
    if (items.size() == 1) return std::move(items.front());
    RegexNode n;
    n.kind = RegexNode::Kind::kConcat;
    n.children = std::move(items);
    return n;
  }

  // Tries to read {m}, {m,}, {,n} or {m,n} at pos_. Leaves pos_ untouched and
  // returns false when the text is not a quantifier (it is then a literal).
  bool TryBraces(int& min, int& max) {
    std::size_t i = pos_ + 1;
    auto read_int = [&](long& v) {
      std::size_t start = i;
      v = 0;
      while (i < p_.size() && p_[i] >= '0' && p_[i] <= '9') {
        v = std::min<long>(v * 10 + (p_[i] - '0'), 1L << 30);
        ++i;
      }
      return i > start;
    };
    long lo = 0, hi = 0;
    bool has_lo = read_int(lo);
    bool has_comma = false, has_hi = false;
    if (i < p_.size() && p_[i] == ',') {
      has_comma = true;
      ++i;
      has_hi = read_int(hi);
    }
    if (i >= p_.size() || p_[i] != '}') return false;
    if (!has_lo && !has_hi) return false;
    if (!has_comma) hi = lo;
    if (!has_lo) lo = 0;
    if (has_comma && !has_hi) hi = -1;
    if (hi != -1 && lo > hi) {
      SyntaxError(pos_, "min repeat greater than max repeat");
    }
    if (lo > kMaxRepeat || hi > kMaxRepeat) {
      Unsupported(pos_, "repeat bound above " + std::to_string(kMaxRepeat));
    }
    min = static_cast<int>(lo);
    max = static_cast<int>(hi);
    pos_ = i + 1;
    return true;
  }

  RegexNode ParseRepeat() {
    RegexNode atom = ParseAtom();
    bool quantified = false;
    while (!AtEnd()) {
      const std::size_t qpos = pos_;
      const char32_t c = Peek();
      RegexNode wrapped;
      if (c == '*' || c == '+' || c == '?') {
        ++pos_;
        wrapped.kind = c == '*'   ? RegexNode::Kind::kStar
                       : c == '+' ? RegexNode::Kind::kPlus
                                  : RegexNode::Kind::kOptional;
      } else if (c == '{') {
        int min = 0, max = 0;
        if (!TryBraces(min, max)) break;
        wrapped.kind = RegexNode::Kind::kRepeat;
        wrapped.min = min;
        wrapped.max = max;
      } else {
        break;
      }
      if (quantified) SyntaxError(qpos, "multiple repeat");
      quantified = true;
      if (!AtEnd() && Peek() == '?') Unsupported(pos_, "lazy quantifier");
      if (!AtEnd() && Peek() == '+') Unsupported(pos_, "possessive quantifier");
      wrapped.children.push_back(std::move(atom));
      atom = std::move(wrapped);
    }
    return atom;
  }

  RegexNode ParseGroup() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    if (Peek() == '?' && Has(0)) {
      const char32_t k = Peek(1);
      if (k == ':') {
        pos_ += 2;
      } else if (k == '=') {
        Unsupported(open, "lookahead (?=...)");
      } else if (k == '!') {
        Unsupported(open, "negative lookahead (?!...)");
      } else if (k == '<' && (Peek(2) == '=' || Peek(2) == '!')) {
        Unsupported(open, "lookbehind (?<...)");
      } else if (k == 'P' && Peek(2) == '=') {
        Unsupported(open, "named backreference (?P=...)");
      } else if (k == '<' || (k == 'P' && Peek(2) == '<')) {
        pos_ += (k == '<') ? 2 : 3;
        while (!AtEnd() && Peek() != '>') {
          if (!IsAsciiAlnum(Peek()) && Peek() != '_') {
            SyntaxError(pos_, "bad character in group name");
          }
          ++pos_;
        }
        if (AtEnd()) SyntaxError(open, "missing '>' in group name");
        ++pos_;
      } else if (k == '#') {
        Unsupported(open, "comment group (?#...)");
      } else {
        Unsupported(open, "inline flags or group extension (?...)");
      }
    }
    RegexNode inner = ParseAlternation();
    if (AtEnd() || Peek() != ')') {
      SyntaxError(open, "missing ')'");
    }
    ++pos_;
    return inner;
  }

  Escape ParseEscape(bool in_class) {
    const std::size_t start = pos_;
    ++pos_;  // backslash
    if (AtEnd()) SyntaxError(start, "trailing backslash");
    const char32_t c = p_[pos_++];
    Escape e;
    switch (c) {
      case 'd': e.ranges = DigitRanges(); return e;
      case 'D': e.ranges = ComplementRanges(DigitRanges()); return e;
      case 'w': e.ranges = WordRanges(); return e;
      case 'W': e.ranges = ComplementRanges(WordRanges()); return e;
      case 's': e.ranges = SpaceRanges(); return e;
      case 'S': e.ranges = ComplementRanges(SpaceRanges()); return e;
      case 'n': e.single = '\n'; return e;
      case 't': e.single = '\t'; return e;
      case 'r': e.single = '\r'; return e;
      case 'f': e.single = '\f'; return e;
      case 'v': e.single = '\v'; return e;
      case 'a': e.single = '\a'; return e;
      case '0': e.single = U'\0'; return e;
      case 'b':
        if (in_class) {
          e.single = '\b';
          return e;
        }
        Unsupported(start, "word boundary \\b");
      case 'B': Unsupported(start, "word boundary \\B");
      case 'A':
      case 'Z':
      case 'z':
      case 'G': Unsupported(start, "anchor escape");
      case 'p':
      case 'P': Unsupported(start, "unicode property class");
      case 'k': Unsupported(start, "named backreference \\k");
      case 'x': {
        char32_t v = 0;
        if (Peek() == '{') {
          ++pos_;
          std::size_t digits = 0;
          while (!AtEnd() && IsHex(Peek())) {
            v = v * 16 + HexValue(p_[pos_++]);
            if (++digits > 6) SyntaxError(start, "hex escape too long");
          }
          if (digits == 0 || AtEnd() || Peek() != '}') {
            SyntaxError(start, "bad \\x{...} escape");
          }
          ++pos_;
        } else {
          for (int k = 0; k < 2; ++k) {
            if (AtEnd() || !IsHex(Peek())) SyntaxError(start, "bad \\x escape");
            v = v * 16 + HexValue(p_[pos_++]);
          }
        }
        if (v > kMaxCodePoint) SyntaxError(start, "code point out of range");
        e.single = v;
        return e;
      }
      case 'u':
      case 'U': {
        const int n = c == 'u' ? 4 : 8;
        char32_t v = 0;
        for (int k = 0; k < n; ++k) {
          if (AtEnd() || !IsHex(Peek())) SyntaxError(start, "bad \\u escape");
          v = v * 16 + HexValue(p_[pos_++]);
        }
        if (v > kMaxCodePoint) SyntaxError(start, "code point out of range");
        e.single = v;
        return e;
      }
      default:
        break;
    }
    if (c >= '1' && c <= '9') Unsupported(start, "backreference");
    if (IsAsciiAlnum(c)) {
      SyntaxError(start, std::string("bad escape \\") + static_cast<char>(c));
    }
    e.single = c;
    return e;
  }

  RegexNode ParseClass() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    bool negate = false;
    if (!AtEnd() && Peek() == '^') {
      negate = true;
      ++pos_;
    }
    std::vector<CharRange> ranges;
    bool first = true;
    for (;;) {
      if (AtEnd()) SyntaxError(open, "unterminated character set");
      if (Peek() == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      const std::size_t item_pos = pos_;
      char32_t lo;
      if (Peek() == '\\') {
        Escape e = ParseEscape(/*in_class=*/true);
        if (!e.single) {
          if (Peek() == '-' && Has(1) && Peek(1) != ']') {
            SyntaxError(item_pos, "bad character range");
          }
          ranges.insert(ranges.end(), e.ranges.begin(), e.ranges.end());
          continue;
        }
        lo = *e.single;
      } else {
        lo = p_[pos_++];
      }
      if (!AtEnd() && Peek() == '-' && Has(1) && Peek(1) != ']') {
        ++pos_;
        char32_t hi;
        if (Peek() == '\\') {
          Escape e = ParseEscape(/*in_class=*/true);
          if (!e.single) SyntaxError(item_pos, "bad character range");
          hi = *e.single;
        } else {
          hi = p_[pos_++];
        }
        if (lo > hi) SyntaxError(item_pos, "bad character range");
        ranges.push_back({lo, hi});
      } else {
        ranges.push_back({lo, lo});
      }
    }
    if (negate) ranges = ComplementRanges(ranges);
    return CharsNode(std::move(ranges));
  }

  RegexNode ParseAtom() {
    const char32_t c = Peek();
    switch (c) {
      case '(':
        return ParseGroup();
      case '[':
        return ParseClass();
      case '.':
        ++pos_;
        return CharsNode({{0, '\n' - 1}, {'\n' + 1, kMaxCodePoint}});
      case '\\': {
        Escape e = ParseEscape(/*in_class=*/false);
        if (e.single) return CharsNode({{*e.single, *e.single}});
        return CharsNode(std::move(e.ranges));
      }
      case '*':
      case '+':
      case '?':
        SyntaxError(pos_, "nothing to repeat");
      case '{': {
        int min = 0, max = 0;
        const std::size_t at = pos_;
        if (TryBraces(min, max)) SyntaxError(at, "nothing to repeat");
        ++pos_;
        return CharsNode({{c, c}});
      }
      case '$':
        if (pos_ + 1 == p_.size()) {
          ++pos_;
          return RegexNode{};
        }
        Unsupported(pos_, "anchor '$' before end of pattern");
      case '^':
        Unsupported(pos_, "anchor '^' after start of pattern");
      default:
        ++pos_;
        return CharsNode({{c, c}});
    }
  }

  std::u32string_view p_;
  std::size_t pos_ = 0;
};

}  // namespace

RegexNode ParseRegex(std::u32string_view pattern) {
  return RegexParser(pattern).Parse();
}

}  // namespace guidegen
