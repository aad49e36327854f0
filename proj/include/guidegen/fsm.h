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

#ifndef GUIDEGEN_FSM_H_
#define GUIDEGEN_FSM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guidegen/regex_parser.h"

namespace guidegen {

using StateId = std::int32_t;
inline constexpr StateId kNoState = -1;

struct CompileOptions {
  // Merge equivalent states after subset construction.
  bool minimize = true;
  // Drop states from which no final state is reachable.
  bool prune_dead_states = true;
};

/*!
 * \brief Deterministic finite automaton over Unicode code points.
 *
 * States are dense integers with start state 0, numbered in breadth-first
 * order from the start (character classes visited in ascending code point
 * order), so two compilations of the same pattern are structurally equal.
 * Transitions are stored per character class: the code point space is cut
 * into classes of characters that behave identically in every state.
 * Characters outside every class have no transition anywhere.
 *
 * Each final state carries the sorted list of tags (pattern indices) it
 * completes. A single compiled regex uses tag 0; a union of terminal patterns
 * tags each final state with the terminals it matches.
 */
class Fsm {
 public:
  Fsm() = default;

  int num_states() const { return num_states_; }
  int num_classes() const { return num_classes_; }
  int num_tags() const { return num_tags_; }
  StateId start() const { return 0; }

  bool IsFinal(StateId state) const { return !tags_[state].empty(); }
  std::vector<StateId> Finals() const;
  // Tags completed at `state`, ascending.
  const std::vector<int>& Tags(StateId state) const { return tags_[state]; }

  // delta(state, ch). Throws UsageError when `state` is out of range.
  std::optional<StateId> Step(StateId state, char32_t ch) const;
  // Unchecked variant for hot loops; kNoState when undefined.
  StateId Next(StateId state, char32_t ch) const {
    const int cls = ClassOf(ch);
    return cls < 0 ? kNoState : table_[state * num_classes_ + cls];
  }
  StateId NextByClass(StateId state, int cls) const {
    return table_[state * num_classes_ + cls];
  }

  // All states s with delta(s, ch) defined, ascending.
  std::span<const StateId> StatesReading(char32_t ch) const;

  // Walks from the start state; true iff every step is defined and the walk
  // ends in a final state.
  bool Accepts(std::u32string_view text) const;
  bool Accepts(std::string_view utf8) const;

  // Walks `text` from `from`; kNoState when some step is undefined.
  StateId Walk(StateId from, std::u32string_view text) const;

  bool InAlphabet(char32_t ch) const { return ClassOf(ch) >= 0; }
  // Character class of `ch`, or -1 when `ch` is outside the alphabet.
  int ClassOf(char32_t ch) const;
  std::vector<CharRange> ClassRanges(int cls) const;
  // Number of (state, character) pairs with a defined transition.
  std::uint64_t TransitionCount() const;

  // States from which some final state is reachable (including finals).
  std::vector<bool> LiveStates() const;

  // Stable byte encoding of the whole automaton, used for digests.
  std::vector<std::uint8_t> CanonicalBytes() const;

  bool operator==(const Fsm& other) const;

  // Assembles an automaton from explicit parts; used by the compiler.
  // `interval_starts` must begin at 0 and be strictly increasing;
  // `interval_class` gives the class of each interval or -1.
  static Fsm FromParts(int num_states, int num_classes, int num_tags,
                       std::vector<char32_t> interval_starts,
                       std::vector<int> interval_class,
                       std::vector<StateId> table,
                       std::vector<std::vector<int>> tags);

 private:
  void BuildLookups();

  int num_states_ = 0;
  int num_classes_ = 0;
  int num_tags_ = 0;
  std::vector<char32_t> interval_starts_;
  std::vector<int> interval_class_;
  std::vector<StateId> table_;  // num_states_ x num_classes_
  std::vector<std::vector<int>> tags_;

  std::array<std::int16_t, 128> ascii_class_{};
  std::vector<std::vector<StateId>> readers_;  // per class
};

// Compiles a single pattern with whole-string match semantics. Throws
// RegexError.
Fsm CompileRegex(std::string_view pattern, const CompileOptions& options = {});

// Compiles the union of `patterns`; final states are tagged with the indices
// of the patterns they complete.
Fsm CompileUnion(std::span<const std::string> patterns,
                 const CompileOptions& options = {});

}  // namespace guidegen

#endif  // GUIDEGEN_FSM_H_
