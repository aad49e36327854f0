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

#include "guidegen/grammar.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <utility>

#include "guidegen/errors.h"
#include "guidegen/fsm.h"
#include "guidegen/io.h"

namespace guidegen {
namespace {

// ---------------------------------------------------------------------------
// Lexer for the grammar text format.

enum class Tok {
  kIdent, kColon, kPipe, kLParen, kRParen, kLBrack, kRBrack, kQuestion,
  kStar, kPlus, kString, kRegex, kDirective, kNewline, kEnd
};

struct Token {
  Tok kind;
  std::string text;  // identifier, decoded literal, regex body, directive
  std::size_t line;
};

std::vector<Token> Tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) -> void { throw GrammarError(line, msg); };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      out.push_back({Tok::kNewline, "", line});
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      out.push_back({Tok::kIdent, std::string(src.substr(i, j - i)), line});
      i = j;
    } else if (c == '%') {
      std::size_t j = i + 1;
      while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::kDirective, std::string(src.substr(i + 1, j - i - 1)), line});
      i = j;
    } else if (c == '"') {
      std::string lit;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= src.size() || src[j] == '\n') fail("unterminated string literal");
        if (src[j] == '"') break;
        if (src[j] == '\\') {
          if (j + 1 >= src.size()) fail("unterminated string literal");
          const char e = src[j + 1];
          switch (e) {
            case 'n': lit += '\n'; break;
            case 't': lit += '\t'; break;
            case 'r': lit += '\r'; break;
            case '"': lit += '"'; break;
            case '\\': lit += '\\'; break;
            default: fail(std::string("unknown escape \\") + e + " in string literal");
          }
          j += 2;
        } else {
          lit += src[j++];
        }
      }
      out.push_back({Tok::kString, lit, line});
      i = j + 1;
    } else if (c == '/') {
      std::string body;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= src.size() || src[j] == '\n') fail("unterminated regex literal");
        if (src[j] == '/') break;
        if (src[j] == '\\' && j + 1 < src.size() && src[j + 1] == '/') {
          body += '/';
          j += 2;
        } else if (src[j] == '\\' && j + 1 < src.size()) {
          body += src.substr(j, 2);
          j += 2;
        } else {
          body += src[j++];
        }
      }
      out.push_back({Tok::kRegex, body, line});
      i = j + 1;
    } else {
      Tok kind;
      switch (c) {
        case ':': kind = Tok::kColon; break;
        case '|': kind = Tok::kPipe; break;
        case '(': kind = Tok::kLParen; break;
        case ')': kind = Tok::kRParen; break;
        case '[': kind = Tok::kLBrack; break;
        case ']': kind = Tok::kRBrack; break;
        case '?': kind = Tok::kQuestion; break;
        case '*': kind = Tok::kStar; break;
        case '+': kind = Tok::kPlus; break;
        default: fail(std::string("unexpected character '") + c + "'");
      }
      out.push_back({kind, "", line});
      ++i;
    }
  }
  out.push_back({Tok::kEnd, "", line});
  return out;
}

bool IsTerminalName(const std::string& name) {
  return std::none_of(name.begin(), name.end(), [](char ch) {
    return std::islower(static_cast<unsigned char>(ch));
  });
}

// ---------------------------------------------------------------------------
// EBNF syntax tree.

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
using Alternatives = std::vector<std::vector<ExprPtr>>;

struct Expr {
  enum class Kind { kSymbol, kGroup, kOptional, kStar, kPlus } kind;
  std::string name;  // kSymbol
  Alternatives alts;  // kGroup
  ExprPtr inner;      // quantifiers
  std::size_t line = 0;
};

struct RuleDef {
  std::string name;
  Alternatives alts;
  std::size_t line;
};

struct ParsedFile {
  std::vector<std::pair<TerminalDef, std::size_t>> terminals;
  std::vector<RuleDef> rules;
  std::vector<std::pair<std::string, std::size_t>> ignores;
  std::string start;
  std::size_t start_line = 0;
};

class FileParser {
 public:
  explicit FileParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ParsedFile Parse() {
    ParsedFile file;
    for (;;) {
      SkipNewlines();
      const Token& t = Peek();
      if (t.kind == Tok::kEnd) break;
      if (t.kind == Tok::kDirective) {
        ParseDirective(file);
      } else if (t.kind == Tok::kIdent) {
        ParseDefinition(file);
      } else {
        throw GrammarError(t.line, "expected a definition or directive");
      }
    }
    return file;
  }

 private:
  const Token& Peek() const { return toks_[pos_]; }
  const Token& Next() { return toks_[pos_++]; }
  void SkipNewlines() {
    while (Peek().kind == Tok::kNewline) ++pos_;
  }
  void ExpectLineEnd() {
    const Token& t = Peek();
    if (t.kind != Tok::kNewline && t.kind != Tok::kEnd) {
      throw GrammarError(t.line, "unexpected trailing input");
    }
  }

  void ParseDirective(ParsedFile& file) {
    const Token dir = Next();
    if (dir.text == "ignore") {
      if (Peek().kind != Tok::kIdent) throw GrammarError(dir.line, "%ignore expects terminal names");
      while (Peek().kind == Tok::kIdent) file.ignores.emplace_back(Next().text, dir.line);
    } else if (dir.text == "start") {
      if (Peek().kind != Tok::kIdent) throw GrammarError(dir.line, "%start expects a rule name");
      if (!file.start.empty()) throw GrammarError(dir.line, "duplicate %start");
      file.start = Next().text;
      file.start_line = dir.line;
    } else {
      throw GrammarError(dir.line, "unknown directive %" + dir.text);
    }
    ExpectLineEnd();
  }

  void ParseDefinition(ParsedFile& file) {
    const Token name = Next();
    if (Peek().kind != Tok::kColon) throw GrammarError(name.line, "expected ':' after " + name.text);
    Next();
    if (IsTerminalName(name.text)) {
      const Token& body = Next();
      TerminalDef def{name.text, "", false};
      if (body.kind == Tok::kString) {
        if (body.text.empty()) throw GrammarError(body.line, "terminal " + name.text + " matches the empty string");
        def.pattern = EscapeRegexLiteral(body.text);
      } else if (body.kind == Tok::kRegex) {
        def.pattern = body.text;
      } else {
        throw GrammarError(name.line, "terminal " + name.text + " needs a string or /regex/");
      }
      ExpectLineEnd();
      file.terminals.emplace_back(std::move(def), name.line);
    } else {
      RuleDef rule{name.text, ParseAlternatives(), name.line};
      ExpectLineEnd();
      file.rules.push_back(std::move(rule));
    }
  }

  // Alternatives may continue on following lines that begin with '|'.
  Alternatives ParseAlternatives() {
    Alternatives alts;
    alts.push_back(ParseSequence());
    for (;;) {
      if (Peek().kind == Tok::kPipe) {
        Next();
        alts.push_back(ParseSequence());
        continue;
      }
      const std::size_t save = pos_;
      SkipNewlines();
      if (Peek().kind == Tok::kPipe) continue;
      pos_ = save;
      break;
    }
    return alts;
  }

  std::vector<ExprPtr> ParseSequence() {
    std::vector<ExprPtr> seq;
    for (;;) {
      const Token& t = Peek();
      ExprPtr atom;
      if (t.kind == Tok::kIdent) {
        atom = std::make_unique<Expr>();
        atom->kind = Expr::Kind::kSymbol;
        atom->name = t.text;
        atom->line = t.line;
        Next();
      } else if (t.kind == Tok::kLParen || t.kind == Tok::kLBrack) {
        const bool optional = t.kind == Tok::kLBrack;
        const std::size_t line = t.line;
        Next();
        atom = std::make_unique<Expr>();
        atom->kind = Expr::Kind::kGroup;
        atom->alts = ParseAlternatives();
        atom->line = line;
        SkipNewlines();
        const Tok close = optional ? Tok::kRBrack : Tok::kRParen;
        if (Peek().kind != close) throw GrammarError(line, optional ? "missing ']'" : "missing ')'");
        Next();
        if (optional) atom = Wrap(Expr::Kind::kOptional, std::move(atom));
      } else if (t.kind == Tok::kString || t.kind == Tok::kRegex) {
        throw GrammarError(t.line, "literals inside rules must be declared as named terminals");
      } else {
        break;
      }
      for (;;) {
        const Tok q = Peek().kind;
        if (q == Tok::kQuestion) atom = Wrap(Expr::Kind::kOptional, std::move(atom));
        else if (q == Tok::kStar) atom = Wrap(Expr::Kind::kStar, std::move(atom));
        else if (q == Tok::kPlus) atom = Wrap(Expr::Kind::kPlus, std::move(atom));
        else break;
        Next();
      }
      seq.push_back(std::move(atom));
    }
    return seq;
  }

  static ExprPtr Wrap(Expr::Kind kind, ExprPtr inner) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = inner->line;
    e->inner = std::move(inner);
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Desugaring into plain productions.

class Desugarer {
 public:
  Desugarer(const std::vector<TerminalDef>& terminals, std::map<std::string, int> rule_ids,
            std::vector<std::string> names)
      : terminals_(terminals), rule_ids_(std::move(rule_ids)), names_(std::move(names)) {
    for (std::size_t i = 0; i < terminals_.size(); ++i) terminal_ids_[terminals_[i].name] = int(i);
  }

  void AddRule(int lhs, const Alternatives& alts) {
    for (const auto& seq : alts) {
      Production p{lhs, {}};
      const std::string base = names_[lhs];
      for (const auto& e : seq) p.rhs.push_back(Lower(*e, base));
      productions_.push_back(std::move(p));
    }
  }

  std::vector<std::string> TakeNames() { return std::move(names_); }
  std::vector<Production> TakeProductions() { return std::move(productions_); }

 private:
  int Fresh(std::string base, const char* suffix) {
    const int id = static_cast<int>(names_.size());
    names_.push_back("__" + base + "_" + suffix + "_" + std::to_string(counter_++));
    return id;
  }

  int Lower(const Expr& e, std::string base) {
    switch (e.kind) {
      case Expr::Kind::kSymbol: {
        if (auto it = terminal_ids_.find(e.name); it != terminal_ids_.end()) {
          if (terminals_[it->second].ignored) {
            throw GrammarError(e.line, "ignored terminal " + e.name + " used in a rule");
          }
          return it->second;
        }
        if (auto it = rule_ids_.find(e.name); it != rule_ids_.end()) {
          return Grammar::NonterminalSymbol(it->second);
        }
        throw GrammarError(e.line, "undefined symbol " + e.name);
      }
      case Expr::Kind::kGroup: {
        if (e.alts.size() == 1 && e.alts[0].size() == 1) return Lower(*e.alts[0][0], base);
        const int id = Fresh(base, "group");
        AddRule(id, e.alts);
        return Grammar::NonterminalSymbol(id);
      }
      case Expr::Kind::kOptional: {
        const int inner = Lower(*e.inner, base);
        const int id = Fresh(base, "opt");
        productions_.push_back({id, {}});
        productions_.push_back({id, {inner}});
        return Grammar::NonterminalSymbol(id);
      }
      case Expr::Kind::kStar:
      case Expr::Kind::kPlus: {
        const int inner = Lower(*e.inner, base);
        const bool star = e.kind == Expr::Kind::kStar;
        const int id = Fresh(base, star ? "star" : "plus");
        const int self = Grammar::NonterminalSymbol(id);
        if (star) productions_.push_back({id, {}});
        else productions_.push_back({id, {inner}});
        productions_.push_back({id, {self, inner}});
        return self;
      }
    }
    return -1;
  }

  const std::vector<TerminalDef>& terminals_;
  std::map<std::string, int> terminal_ids_;
  std::map<std::string, int> rule_ids_;
  std::vector<std::string> names_;
  std::vector<Production> productions_;
  int counter_ = 0;
};

void AppendString(ByteWriter& w, const std::string& s) {
  w.U32(static_cast<std::uint32_t>(s.size()));
  w.Raw(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace

std::string EscapeRegexLiteral(std::string_view text) {
  static constexpr std::string_view kMeta = "\\.^$|?*+()[]{}/";
  std::string out;
  for (char c : text) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      if (kMeta.find(c) != std::string_view::npos) out += '\\';
      out += c;
    }
  }
  return out;
}

Grammar Grammar::Parse(std::string_view text) {
  ParsedFile file = FileParser(Tokenize(text)).Parse();

  std::vector<TerminalDef> terminals;
  std::map<std::string, std::size_t> terminal_line;
  for (auto& [def, line] : file.terminals) {
    if (terminal_line.count(def.name)) throw GrammarError(line, "duplicate terminal " + def.name);
    terminal_line[def.name] = line;
    terminals.push_back(def);
  }
  for (const auto& [name, line] : file.ignores) {
    auto it = std::find_if(terminals.begin(), terminals.end(),
                           [&](const TerminalDef& t) { return t.name == name; });
    if (it == terminals.end()) throw GrammarError(line, "%ignore names undefined terminal " + name);
    it->ignored = true;
  }

  std::map<std::string, int> rule_ids;
  std::vector<std::string> names;
  for (const auto& rule : file.rules) {
    if (rule_ids.count(rule.name)) throw GrammarError(rule.line, "duplicate rule " + rule.name);
    rule_ids[rule.name] = static_cast<int>(names.size());
    names.push_back(rule.name);
  }
  if (file.rules.empty()) throw GrammarError(0, "grammar defines no rules");

  int start;
  if (!file.start.empty()) {
    auto it = rule_ids.find(file.start);
    if (it == rule_ids.end()) throw GrammarError(file.start_line, "%start names undefined rule " + file.start);
    start = it->second;
  } else if (auto it = rule_ids.find("start"); it != rule_ids.end()) {
    start = it->second;
  } else {
    start = 0;
  }

  Desugarer d(terminals, rule_ids, names);
  for (const auto& rule : file.rules) d.AddRule(rule_ids[rule.name], rule.alts);
  try {
    return Grammar(std::move(terminals), d.TakeNames(), d.TakeProductions(), start);
  } catch (const GrammarError& e) {
    // Attach the declaring line to pattern problems when we know it.
    if (e.line() != 0) throw;
    const std::string msg = e.what();
    for (const auto& [name, line] : terminal_line) {
      if (msg.rfind("terminal " + name + ":", 0) == 0 ||
          msg.rfind("terminal " + name + " ", 0) == 0) {
        throw GrammarError(line, msg);
      }
    }
    throw;
  }
}

Grammar Grammar::Load(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return Parse(text);
  } catch (const GrammarError& e) {
    const std::string where = e.line() ? ":" + std::to_string(e.line()) : "";
    throw GrammarError(e.line(), path.string() + where + ": " + e.what());
  }
}

Grammar::Grammar(std::vector<TerminalDef> terminals, std::vector<std::string> nonterminals,
                 std::vector<Production> productions, int start)
    : terminals_(std::move(terminals)),
      nonterminals_(std::move(nonterminals)),
      start_(start) {
  const int nt = static_cast<int>(nonterminals_.size());
  const int t = static_cast<int>(terminals_.size());
  if (start_ < 0 || start_ >= nt) throw GrammarError(0, "start symbol out of range");
  for (const auto& p : productions) {
    if (p.lhs < 0 || p.lhs >= nt) throw GrammarError(0, "production lhs out of range");
    for (int s : p.rhs) {
      const bool ok = IsTerminal(s) ? (s >= 0 && s < t && !terminals_[s].ignored)
                                    : (NonterminalIndex(s) >= 0 && NonterminalIndex(s) < nt);
      if (!ok) throw GrammarError(0, "production references an invalid symbol");
    }
  }
  for (const auto& term : terminals_) {
    Fsm fsm;
    try {
      fsm = CompileRegex(term.pattern);
    } catch (const RegexError& e) {
      throw GrammarError(0, "terminal " + term.name + ": " + e.what());
    }
    if (fsm.IsFinal(fsm.start())) {
      throw GrammarError(0, "terminal " + term.name + " matches the empty string");
    }
  }

  // Productive nonterminals, then reachability from the start symbol.
  std::vector<bool> productive(nt, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : productions) {
      if (productive[p.lhs]) continue;
      const bool all = std::all_of(p.rhs.begin(), p.rhs.end(), [&](int s) {
        return IsTerminal(s) || productive[NonterminalIndex(s)];
      });
      if (all) productive[p.lhs] = changed = true;
    }
  }
  std::vector<Production> kept;
  for (auto& p : productions) {
    const bool ok = productive[p.lhs] &&
                    std::all_of(p.rhs.begin(), p.rhs.end(), [&](int s) {
                      return IsTerminal(s) || productive[NonterminalIndex(s)];
                    });
    if (ok) kept.push_back(std::move(p));
  }
  std::vector<bool> reachable(nt, false);
  reachable[start_] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : kept) {
      if (!reachable[p.lhs]) continue;
      for (int s : p.rhs) {
        if (!IsTerminal(s) && !reachable[NonterminalIndex(s)]) {
          reachable[NonterminalIndex(s)] = changed = true;
        }
      }
    }
  }
  for (auto& p : kept) {
    if (reachable[p.lhs]) productions_.push_back(std::move(p));
  }
  empty_language_ = !productive[start_];

  ByteWriter w;
  w.Raw(std::span(reinterpret_cast<const std::uint8_t*>("GGGRAM1"), 7));
  w.U32(static_cast<std::uint32_t>(terminals_.size()));
  for (const auto& term : terminals_) {
    AppendString(w, term.name);
    AppendString(w, term.pattern);
    w.U32(term.ignored ? 1 : 0);
  }
  w.U32(static_cast<std::uint32_t>(nonterminals_.size()));
  for (const auto& name : nonterminals_) AppendString(w, name);
  w.U32(static_cast<std::uint32_t>(productions_.size()));
  for (const auto& p : productions_) {
    w.U32(static_cast<std::uint32_t>(p.lhs));
    w.U32(static_cast<std::uint32_t>(p.rhs.size()));
    for (int s : p.rhs) w.U32(static_cast<std::uint32_t>(s));
  }
  w.U32(static_cast<std::uint32_t>(start_));
  const auto bytes = w.Take();
  digest_ = Sha256(bytes);
}

int Grammar::FindTerminal(std::string_view name) const {
  for (std::size_t i = 0; i < terminals_.size(); ++i) {
    if (terminals_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Grammar::FindNonterminal(std::string_view name) const {
  for (std::size_t i = 0; i < nonterminals_.size(); ++i) {
    if (nonterminals_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string Grammar::SymbolName(int symbol) const {
  if (IsTerminal(symbol)) {
    if (symbol == static_cast<int>(terminals_.size())) return "$end";
    return terminals_.at(symbol).name;
  }
  const int idx = NonterminalIndex(symbol);
  if (idx == static_cast<int>(nonterminals_.size())) return "$accept";
  return nonterminals_.at(idx);
}

}  // namespace guidegen
