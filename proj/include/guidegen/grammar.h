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

#ifndef GUIDEGEN_GRAMMAR_H_
#define GUIDEGEN_GRAMMAR_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "guidegen/digest.h"

namespace guidegen {

struct TerminalDef {
  std::string name;
  // Regex in the supported subset; string literals are stored escaped.
  std::string pattern;
  // Skippable between symbols (whitespace, comments); never reaches the
  // parser.
  bool ignored = false;
};

// Symbols are encoded as plain ints: terminal i is i, nonterminal j is
// Grammar::NonterminalSymbol(j).
struct Production {
  int lhs;               // nonterminal index
  std::vector<int> rhs;  // symbol codes

  bool operator==(const Production&) const = default;
};

/*!
 * \brief Context-free grammar with regex-defined terminals.
 *
 * Terminal declaration order is lexer priority: when one lexeme completes
 * several terminals, the earliest declared wins. Repetition and grouping in
 * the text format are desugared into generated nonterminals whose names
 * start with "__".
 */
class Grammar {
 public:
  static constexpr int kNonterminalBase = 1 << 20;
  static int NonterminalSymbol(int index) { return kNonterminalBase + index; }
  static bool IsTerminal(int symbol) { return symbol < kNonterminalBase; }
  static int NonterminalIndex(int symbol) { return symbol - kNonterminalBase; }

  // Parses the grammar text format (docs/grammar_format.md). Throws
  // GrammarError with a line number.
  static Grammar Parse(std::string_view text);
  static Grammar Load(const std::filesystem::path& path);

  // Builds a grammar programmatically. Throws GrammarError when a production
  // references an undeclared symbol or a terminal can match "".
  Grammar(std::vector<TerminalDef> terminals,
          std::vector<std::string> nonterminals,
          std::vector<Production> productions, int start);

  const std::vector<TerminalDef>& terminals() const { return terminals_; }
  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::vector<Production>& productions() const { return productions_; }
  int start() const { return start_; }

  int FindTerminal(std::string_view name) const;     // -1 when absent
  int FindNonterminal(std::string_view name) const;  // -1 when absent
  std::string SymbolName(int symbol) const;

  // True when the start symbol derives no terminal string.
  bool IsEmptyLanguage() const { return empty_language_; }

  const Digest& digest() const { return digest_; }

 private:
  std::vector<TerminalDef> terminals_;
  std::vector<std::string> nonterminals_;
  std::vector<Production> productions_;
  int start_;
  bool empty_language_ = false;
  Digest digest_{};
};

// Escapes regex metacharacters so `text` matches literally.
std::string EscapeRegexLiteral(std::string_view text);

}  // namespace guidegen

#endif  // GUIDEGEN_GRAMMAR_H_
