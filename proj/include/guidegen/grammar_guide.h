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

#ifndef GUIDEGEN_GRAMMAR_GUIDE_H_
#define GUIDEGEN_GRAMMAR_GUIDE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "guidegen/logits_provider.h"
#include "guidegen/parser_index.h"
#include "guidegen/sampling.h"
#include "guidegen/vocabulary.h"

namespace guidegen {

struct GrammarGuideOptions {
  // Resolve unindexable entries by simulating on the full stack. When false
  // they raise UnindexableError.
  bool fallback = true;
};

struct GrammarTransition {
  TokenId token = 0;
  CursorDelta delta;  // empty for EOS

  bool operator==(const GrammarTransition&) const = default;
};

class GrammarGuide {
 public:
  // Throws BindingError unless `index` was built for this grammar and
  // vocabulary.
  GrammarGuide(const GrammarMachine& machine, const ParserIndex& index,
               const Vocabulary& vocab, GrammarGuideOptions options = {});

  const GrammarMachine& machine() const { return *machine_; }
  const Vocabulary& vocab() const { return *vocab_; }

  // Allowed tokens for `cursor`, ascending, EOS included when the sentence
  // can end here.
  std::vector<GrammarTransition> Allowed(const ParserCursor& cursor) const;
  // Same set computed by simulating every vocabulary token directly.
  std::vector<GrammarTransition> AllowedBySimulation(const ParserCursor& cursor) const;
  std::optional<GrammarTransition> Transition(const ParserCursor& cursor, TokenId token) const;

 private:
  std::optional<GrammarTransition> Resolve(const ParserCursor& cursor,
                                           const ParserIndex::Entry& entry) const;
  std::optional<GrammarTransition> Simulate(const ParserCursor& cursor, TokenId token) const;

  const GrammarMachine* machine_;
  const ParserIndex* index_;
  const Vocabulary* vocab_;
  GrammarGuideOptions options_;
};

struct GrammarSession {
  ParserCursor cursor;
  std::vector<TokenId> emitted;  // EOS is never appended
  SessionStatus status = SessionStatus::kActive;
  std::uint64_t rng_seed = 0;
};

// Feeds one token. Throws ContractViolation for disallowed tokens or
// inactive sessions.
void Advance(GrammarSession& session, TokenId token, const GrammarGuide& guide);

// Masked sampling loop driven by the grammar.
GrammarSession GrammarGuidedSampleTokens(LogitsProvider& provider,
                                         const GrammarGuide& guide,
                                         const SamplingConfig& config);

}  // namespace guidegen

#endif  // GUIDEGEN_GRAMMAR_GUIDE_H_
