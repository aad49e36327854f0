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

#ifndef GUIDEGEN_LALR_H_
#define GUIDEGEN_LALR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "guidegen/grammar.h"

namespace guidegen {

struct LrAction {
  enum class Kind : std::uint8_t { kError, kShift, kReduce, kAccept };
  Kind kind = Kind::kError;
  int value = -1;  // target state for kShift, production for kReduce

  bool operator==(const LrAction&) const = default;
};

/*!
 * \brief LALR(1) parse tables for a Grammar.
 *
 * Terminal codes are the grammar's terminal indices plus the end marker
 * `end_marker()`. Production 0 is the augmented rule $accept -> start; the
 * remaining productions follow the grammar's order.
 */
class LalrTables {
 public:
  // Throws ConflictError naming the state, the lookahead and the items
  // involved.
  explicit LalrTables(const Grammar& grammar);

  int num_states() const { return static_cast<int>(action_.size()); }
  int num_terminals() const { return num_terminals_; }
  int end_marker() const { return num_terminals_; }
  int num_nonterminals() const { return num_nonterminals_; }

  const LrAction& Action(int state, int terminal) const {
    return action_[state][terminal];
  }
  // Successor after reducing to `nonterminal` (an index), or -1.
  int Goto(int state, int nonterminal) const {
    return goto_[state][nonterminal];
  }

  const Production& production(int p) const { return productions_[p]; }
  int num_productions() const { return static_cast<int>(productions_.size()); }

  // Grammar symbol shifted or reduced to when entering `state`; -1 for 0.
  int AccessingSymbol(int state) const { return accessing_[state]; }
  // States p with a transition into `state` on its accessing symbol.
  const std::vector<int>& Predecessors(int state) const {
    return predecessors_[state];
  }
  // Terminals (excluding the end marker) with a non-error action.
  const std::vector<int>& ActiveTerminals(int state) const {
    return active_[state];
  }

  // Human-readable items of a state, for diagnostics.
  std::vector<std::string> DescribeState(int state) const;

 private:
  const Grammar* grammar_;
  int num_terminals_;
  int num_nonterminals_;  // including $accept
  std::vector<Production> productions_;
  std::vector<std::vector<LrAction>> action_;
  std::vector<std::vector<int>> goto_;
  std::vector<int> accessing_;
  std::vector<std::vector<int>> predecessors_;
  std::vector<std::vector<int>> active_;
  std::vector<std::vector<std::pair<int, int>>> kernels_;
};

/*!
 * \brief Deterministic pushdown automaton.
 *
 * A transition reads one input symbol or none (-1) and pops one stack symbol
 * or none (-1), then moves to a state and optionally pushes one stack symbol.
 */
class Pda {
 public:
  struct Transition {
    int from;
    int input;  // -1 for an epsilon move
    int pop;    // -1 when nothing is popped
    int to;
    int push;   // -1 when nothing is pushed

    bool operator==(const Transition&) const = default;
  };

  // Throws UsageError when a transition refers to an undeclared state or
  // symbol.
  Pda(int num_states, int num_inputs, int num_stack_symbols, std::vector<Transition> transitions,
      int start, std::vector<int> finals);

  int num_states() const { return num_states_; }
  int num_inputs() const { return num_inputs_; }
  int num_stack_symbols() const { return num_stack_symbols_; }
  int start() const { return start_; }
  const std::vector<int>& finals() const { return finals_; }
  bool IsFinal(int state) const;
  const std::vector<Transition>& transitions() const { return transitions_; }

  // Stack symbols g (-1 standing for "no pop") such that some transition
  // from `state` reading one of `inputs` pops g. Sorted ascending.
  std::vector<int> Preimage(int state, std::span<const int> inputs) const;

 private:
  int num_states_;
  int num_inputs_;
  int num_stack_symbols_;
  std::vector<Transition> transitions_;
  int start_;
  std::vector<int> finals_;
  // (from * num_inputs + input) -> sorted pops of reading transitions.
  std::vector<std::vector<int>> reading_pops_;
};

// Pushdown automaton equivalent to the LR parser. Stack symbols are LR
// states and input symbols are the tables' terminal codes (end marker
// included). State 0 pushes LR state 0 and moves to kPdaReadState, the only
// state that reads input; kPdaAcceptState is the single final state.
inline constexpr int kPdaReadState = 1;
inline constexpr int kPdaAcceptState = 2;
Pda BuildParserPda(const LalrTables& tables);

}  // namespace guidegen

#endif  // GUIDEGEN_LALR_H_
