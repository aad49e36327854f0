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

#ifndef GUIDEGEN_SAMPLING_H_
#define GUIDEGEN_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "guidegen/fsm.h"
#include "guidegen/logits_provider.h"
#include "guidegen/vocab_index.h"
#include "guidegen/vocabulary.h"

namespace guidegen {

enum class SamplingStrategy { kMultinomial, kGreedy };

struct SamplingConfig {
  int max_tokens = 32;
  double temperature = 1.0;
  SamplingStrategy strategy = SamplingStrategy::kMultinomial;
  std::uint64_t seed = 0;

  // Throws UsageError unless max_tokens >= 1 and temperature > 0.
  void Validate() const;
};

// Draws from softmax(score / temperature) restricted to a candidate set.
// Greedy picks the highest score, ties going to the lowest token id.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::uint64_t seed) : rng_(seed) {}

  // `candidates` must be non-empty. Candidates whose scores are all -inf are
  // treated as equally likely.
  TokenId Sample(std::span<const float> scores,
                 std::span<const TokenId> candidates,
                 const SamplingConfig& config);

  // Uniform double in [0, 1) built from the top 53 bits of the engine.
  double Uniform();

 private:
  std::mt19937_64 rng_;
  std::vector<double> weights_;
};

// Queries `provider` for the scores of step `step`, checking the length.
// Provider failures are rethrown as ProviderError with the step attached.
std::vector<float> FetchScores(LogitsProvider& provider, std::size_t vocab_size,
                               std::span<const TokenId> prefix, long step);

// Unguided loop: samples up to max_tokens tokens, stopping (without
// appending) at EOS. Provider failures are rethrown with the step attached.
std::vector<TokenId> SampleTokens(LogitsProvider& provider,
                                  const Vocabulary& vocab,
                                  const SamplingConfig& config);

// Dense boolean mask over the vocabulary.
class MaskVector {
 public:
  explicit MaskVector(std::size_t size) : bits_(size, false) {}

  std::size_t size() const { return bits_.size(); }
  bool Test(TokenId id) const { return bits_[id]; }
  void Set(TokenId id) { bits_[id] = true; }
  std::size_t Count() const;
  std::vector<TokenId> SetIds() const;

  bool operator==(const MaskVector&) const = default;

 private:
  std::vector<bool> bits_;
};

// Bit t is set iff t is readable from `state`; the EOS bit is set iff `state`
// is final.
MaskVector BuildMask(const StateVocabIndex& index, StateId state,
                     const Fsm& fsm, const Vocabulary& vocab);

enum class SessionStatus { kActive, kFinishedEos, kFinishedMaxTokens, kDeadEnd };
std::string ToString(SessionStatus status);

struct GenerationSession {
  StateId current_state = 0;
  // Sampled tokens; EOS is never appended.
  std::vector<TokenId> emitted;
  SessionStatus status = SessionStatus::kActive;
  std::uint64_t rng_seed = 0;
};

// Throws BindingError unless `index` was built from exactly `fsm` and
// `vocab`.
void CheckBinding(const StateVocabIndex& index, const Fsm& fsm,
                  const Vocabulary& vocab);

// Feeds one token to an active session. EOS finishes the session and is only
// legal in a final state. Throws ContractViolation for disallowed tokens or
// inactive sessions.
void Advance(GenerationSession& session, TokenId token,
             const StateVocabIndex& index, const Fsm& fsm, TokenId eos_id);

// Stateless form of Advance: returns the successor of `state` after `token`.
// EOS in a final state returns `state` unchanged.
StateId AdvanceState(const StateVocabIndex& index, const Fsm& fsm,
                     TokenId eos_id, StateId state, TokenId token);

// Masked sampling loop. Each step fetches scores, restricts them to the
// tokens readable from the current state (plus EOS in final states) and
// advances to the stored end state. Terminates with kFinishedEos,
// kFinishedMaxTokens, or kDeadEnd when nothing is allowed.
GenerationSession GuidedSampleTokens(LogitsProvider& provider,
                                     const StateVocabIndex& index,
                                     const Fsm& fsm, const Vocabulary& vocab,
                                     const SamplingConfig& config);

std::string Detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace guidegen

#endif  // GUIDEGEN_SAMPLING_H_
