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

#ifndef GUIDEGEN_VOCAB_INDEX_H_
#define GUIDEGEN_VOCAB_INDEX_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "guidegen/digest.h"
#include "guidegen/fsm.h"
#include "guidegen/vocabulary.h"

namespace guidegen {

struct TokenTransition {
  TokenId token;
  StateId end;

  bool operator==(const TokenTransition&) const = default;
};

// Every state path through `fsm` that reads all of `token`, one per start
// state that reads token[0]. Walks that hit an undefined transition are
// dropped. Empty tokens yield no paths.
std::vector<std::vector<StateId>> FindSubSequences(const Fsm& fsm,
                                                   std::u32string_view token);

struct IndexBuildOptions {
  // Worker threads used to walk the vocabulary; 0 picks the hardware count.
  unsigned threads = 1;
};

/*!
 * \brief For each automaton state, the tokens readable from it and the state
 * each one ends in.
 *
 * Entries are stored in compressed rows: states ascending, tokens ascending
 * within a state. Lookup is a constant-time slice.
 */
class StateVocabIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  StateVocabIndex() = default;

  static StateVocabIndex Build(const Fsm& fsm, const Vocabulary& vocab,
                               const IndexBuildOptions& options = {});

  // Entries for `state`; empty for states without entries or out of range.
  std::span<const TokenTransition> Allowed(StateId state) const {
    if (state < 0 || static_cast<std::size_t>(state) + 1 >= offsets_.size()) {
      return {};
    }
    return {entries_.data() + offsets_[state],
            entries_.data() + offsets_[state + 1]};
  }

  // End state after reading `token` from `state`, or kNoState when the index
  // has no such entry.
  StateId EndState(StateId state, TokenId token) const;

  int num_states() const {
    return offsets_.empty() ? 0 : static_cast<int>(offsets_.size() - 1);
  }
  std::size_t entry_count() const { return entries_.size(); }
  const Digest& fsm_digest() const { return fsm_digest_; }
  const Digest& vocab_digest() const { return vocab_digest_; }

  std::vector<std::uint8_t> Serialize() const;
  // Throws IndexFormatError. Digests are checked against the expected values
  // when given.
  static StateVocabIndex Deserialize(std::span<const std::uint8_t> bytes,
                                     const Digest* expected_fsm = nullptr,
                                     const Digest* expected_vocab = nullptr);

  bool operator==(const StateVocabIndex&) const = default;

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<TokenTransition> entries_;
  Digest fsm_digest_{};
  Digest vocab_digest_{};
};

Digest FsmDigest(const Fsm& fsm);

}  // namespace guidegen

#endif  // GUIDEGEN_VOCAB_INDEX_H_
