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

#ifndef GUIDEGEN_SCANNER_H_
#define GUIDEGEN_SCANNER_H_

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "guidegen/fsm.h"
#include "guidegen/grammar.h"
#include "guidegen/lalr.h"

namespace guidegen {

/*!
 * \brief Union automaton of the terminals a parser state can accept next.
 *
 * Tags of `fsm` index into `terminals`. Ignored terminals are always part of
 * the union so whitespace can be skipped in any state.
 */
struct CombinedFsm {
  Fsm fsm;
  std::vector<int> terminals;  // tag -> grammar terminal index, ascending
  // Per scanner state: grammar terminals that some continuation of the
  // current lexeme can still complete, ascending.
  std::vector<std::vector<int>> candidates;
  // Per scanner state: highest-priority terminal completed exactly here, or
  // -1 when the lexeme is not a complete terminal.
  std::vector<int> completed;

  const std::vector<int>& Candidates(StateId state) const { return candidates[state]; }
};

CombinedFsm BuildCombinedFsm(const Grammar& grammar, std::span<const int> terminals);

// Terminals that could produce `lexeme` as (a prefix of) the next symbol.
// When the lexeme runs past every terminal, a completed prefix decides: the
// result holds the terminal the scanner would emit for it; otherwise it is
// empty.
std::vector<int> ScanCandidates(const CombinedFsm& combined, std::u32string_view lexeme);

// Combined automata for every LALR state, shared between states that accept
// the same terminal set.
class ScannerTable {
 public:
  ScannerTable(const Grammar& grammar, const LalrTables& tables);

  const CombinedFsm& ForState(int lr_state) const { return *per_state_[lr_state]; }
  int num_distinct() const { return static_cast<int>(distinct_.size()); }

 private:
  std::vector<std::shared_ptr<const CombinedFsm>> distinct_;
  std::vector<const CombinedFsm*> per_state_;
};

}  // namespace guidegen

#endif  // GUIDEGEN_SCANNER_H_
