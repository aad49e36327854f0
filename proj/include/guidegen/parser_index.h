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

#ifndef GUIDEGEN_PARSER_INDEX_H_
#define GUIDEGEN_PARSER_INDEX_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "guidegen/digest.h"
#include "guidegen/fsm.h"
#include "guidegen/grammar.h"
#include "guidegen/lalr.h"
#include "guidegen/scanner.h"
#include "guidegen/vocabulary.h"

namespace guidegen {

// Full runtime state of incremental parsing: the LR stack (bottom first,
// never empty) and the scanner state inside the combined automaton of the
// top stack state.
struct ParserCursor {
  std::vector<int> stack{0};
  StateId scanner_state = 0;

  bool operator==(const ParserCursor&) const = default;
};

// Bounded view of a cursor used to key the parser index.
struct ParserConfig {
  int parse_state = 0;                   // LR state on top of the stack
  StateId scanner_state = 0;
  std::vector<int> candidate_terminals;  // ascending
  std::vector<int> stack_suffix;         // states below the top, nearest first

  bool operator==(const ParserConfig&) const = default;
};

// Effect of consuming one token: pop `pops` stack entries, push `pushed`
// (bottom first), then move the scanner to `scanner_state`.
struct CursorDelta {
  std::uint32_t pops = 0;
  std::vector<int> pushed;
  StateId scanner_state = 0;

  bool operator==(const CursorDelta&) const = default;
};

void ApplyDelta(ParserCursor& cursor, const CursorDelta& delta);

/*!
 * \brief Grammar compiled for incremental recognition.
 *
 * Bundles the LALR(1) tables, the equivalent pushdown automaton and the
 * per-state combined scanners. Scanning is longest-match without
 * backtracking: a lexeme ends when the next character cannot extend it, and it
 * must then be a complete terminal (earliest declared wins). A text prefix is
 * accepted while the parse so far is valid and the unfinished lexeme can
 * still become a terminal the parser accepts (or an ignored one).
 */
class GrammarMachine {
 public:
  // Throws ConflictError for grammars outside LALR(1).
  explicit GrammarMachine(Grammar grammar);

  GrammarMachine(const GrammarMachine&) = delete;
  GrammarMachine& operator=(const GrammarMachine&) = delete;

  const Grammar& grammar() const { return *grammar_; }
  const LalrTables& tables() const { return tables_; }
  const Pda& pda() const { return pda_; }
  const ScannerTable& scanners() const { return scanners_; }
  const CombinedFsm& Combined(int lr_state) const { return scanners_.ForState(lr_state); }

  ParserCursor Start() const { return ParserCursor{}; }
  ParserConfig ConfigOf(const ParserCursor& cursor, int depth) const;

  // Consumes `text` from `cursor`; nullopt when the result is not a viable
  // prefix.
  std::optional<CursorDelta> Feed(const ParserCursor& cursor, std::u32string_view text) const;
  // True when the text read so far forms a complete sentence.
  bool CanFinish(const ParserCursor& cursor) const;

  // Whole-text recognition from scratch.
  bool IsViablePrefix(std::u32string_view text) const;
  bool Accepts(std::u32string_view text) const;

 private:
  std::unique_ptr<const Grammar> grammar_;
  LalrTables tables_;
  Pda pda_;
  ScannerTable scanners_;
};

struct ParserIndexOptions {
  // Stack entries below the top that the index may condition on.
  int max_depth = 8;
};

/*!
 * \brief Precomputed token transitions for parser configurations.
 *
 * Entries live in a trie keyed by the stack states below the top (nearest
 * first). Each node holds, per (top state, scanner state), the tokens whose
 * outcome is decided by exactly that much stack context, so a lookup walks
 * the trie along the real stack and merges what it meets. Tokens that would
 * need more than `max_depth` states are stored as unindexable and must be
 * resolved by simulation. EOS appears with an empty delta when the sentence
 * can end.
 */
class ParserIndex {
 public:
  struct Entry {
    TokenId token = 0;
    bool unindexable = false;
    CursorDelta delta;

    bool operator==(const Entry&) const = default;
  };

  struct Node {
    std::map<int, std::uint32_t> children;
    std::map<std::pair<int, StateId>, std::vector<Entry>> leaves;

    bool operator==(const Node&) const = default;
  };

  static ParserIndex Build(const GrammarMachine& machine, const Vocabulary& vocab,
                           const ParserIndexOptions& options = {});

  // Entries reachable for `cursor`, sorted by token.
  std::vector<const Entry*> Lookup(const ParserCursor& cursor) const;

  int max_depth() const { return max_depth_; }
  std::size_t entry_count() const;
  std::size_t unindexable_count() const;
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Digest& grammar_digest() const { return grammar_digest_; }
  const Digest& vocab_digest() const { return vocab_digest_; }

  std::vector<std::uint8_t> Serialize() const;
  // Throws IndexFormatError. Digests are checked when expectations are given.
  static ParserIndex Deserialize(std::span<const std::uint8_t> bytes,
                                 const Digest* expected_grammar = nullptr,
                                 const Digest* expected_vocab = nullptr);

  bool operator==(const ParserIndex&) const = default;

 private:
  std::uint32_t NodeFor(std::span<const int> suffix);

  int max_depth_ = 8;
  std::vector<Node> nodes_;
  Digest grammar_digest_{};
  Digest vocab_digest_{};
};

// True when `bytes` starts with the parser index magic.
bool IsParserIndexFile(std::span<const std::uint8_t> bytes);

}  // namespace guidegen

#endif  // GUIDEGEN_PARSER_INDEX_H_
