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

#include "guidegen/sampling.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "guidegen/errors.h"

namespace guidegen {

void SamplingConfig::Validate() const {
  if (max_tokens < 1) {
    throw UsageError("max_tokens must be at least 1, got " +
                     std::to_string(max_tokens));
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw UsageError("temperature must be a positive finite number");
  }
}

double CategoricalSampler::Uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

TokenId CategoricalSampler::Sample(std::span<const float> scores,
                                   std::span<const TokenId> candidates,
                                   const SamplingConfig& config) {
  if (candidates.empty()) throw UsageError("cannot sample from an empty support");
  if (config.strategy == SamplingStrategy::kGreedy) {
    TokenId best = candidates.front();
    for (TokenId t : candidates) {
      if (scores[t] > scores[best] || (scores[t] == scores[best] && t < best)) {
        best = t;
      }
    }
    return best;
  }
  float max = -std::numeric_limits<float>::infinity();
  for (TokenId t : candidates) max = std::max(max, scores[t]);
  if (max == -std::numeric_limits<float>::infinity()) {
    const auto i = static_cast<std::size_t>(Uniform() * candidates.size());
    return candidates[std::min(i, candidates.size() - 1)];
  }
  weights_.resize(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    weights_[i] = std::exp((static_cast<double>(scores[candidates[i]]) - max) /
                           config.temperature);
    total += weights_[i];
  }
  double target = Uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    last_positive = i;
    if (target < weights_[i]) return candidates[i];
    target -= weights_[i];
  }
  return candidates[last_positive];
}

std::vector<float> FetchScores(LogitsProvider& provider, std::size_t vocab_size,
                               std::span<const TokenId> prefix, long step) {
  std::vector<float> scores;
  try {
    scores = provider.Scores(prefix);
  } catch (const ProviderError& e) {
    throw e.WithStep(step);
  } catch (const std::exception& e) {
    throw ProviderError(ProviderError::Kind::kOther, e.what()).WithStep(step);
  }
  if (scores.size() != vocab_size) {
    throw ProviderError(ProviderError::Kind::kSizeMismatch,
                        "provider returned " + std::to_string(scores.size()) +
                            " scores for a vocabulary of " +
                            std::to_string(vocab_size))
        .WithStep(step);
  }
  return scores;
}

std::vector<TokenId> SampleTokens(LogitsProvider& provider,
                                  const Vocabulary& vocab,
                                  const SamplingConfig& config) {
  config.Validate();
  CategoricalSampler sampler(config.seed);
  std::vector<TokenId> all(vocab.size());
  std::iota(all.begin(), all.end(), TokenId{0});
  std::vector<TokenId> out;
  for (int step = 0; step < config.max_tokens; ++step) {
    const auto scores = FetchScores(provider, vocab.size(), out, step);
    const TokenId t = sampler.Sample(scores, all, config);
    if (t == vocab.eos_id()) break;
    out.push_back(t);
  }
  return out;
}

std::size_t MaskVector::Count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::vector<TokenId> MaskVector::SetIds() const {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

MaskVector BuildMask(const StateVocabIndex& index, StateId state,
                     const Fsm& fsm, const Vocabulary& vocab) {
  MaskVector mask(vocab.size());
  for (const TokenTransition& e : index.Allowed(state)) mask.Set(e.token);
  if (state >= 0 && state < fsm.num_states() && fsm.IsFinal(state)) {
    mask.Set(vocab.eos_id());
  }
  return mask;
}

std::string ToString(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive: return "active";
    case SessionStatus::kFinishedEos: return "finished-eos";
    case SessionStatus::kFinishedMaxTokens: return "finished-max-tokens";
    case SessionStatus::kDeadEnd: return "dead-end";
  }
  return "unknown";
}

void CheckBinding(const StateVocabIndex& index, const Fsm& fsm,
                  const Vocabulary& vocab) {
  if (index.fsm_digest() != FsmDigest(fsm)) {
    throw BindingError("index was built for a different automaton");
  }
  if (index.vocab_digest() != vocab.digest()) {
    throw BindingError("index was built for a different vocabulary");
  }
}

StateId AdvanceState(const StateVocabIndex& index, const Fsm& fsm,
                     TokenId eos_id, StateId state, TokenId token) {
  if (state < 0 || state >= fsm.num_states()) {
    throw UsageError("state " + std::to_string(state) + " out of range");
  }
  if (token == eos_id) {
    if (!fsm.IsFinal(state)) {
      throw ContractViolation("EOS is not allowed in non-final state " +
                              std::to_string(state));
    }
    return state;
  }
  const StateId end = index.EndState(state, token);
  if (end == kNoState) {
    throw ContractViolation("token " + std::to_string(token) +
                            " is not allowed in state " + std::to_string(state));
  }
  return end;
}

void Advance(GenerationSession& session, TokenId token,
             const StateVocabIndex& index, const Fsm& fsm, TokenId eos_id) {
  if (session.status != SessionStatus::kActive) {
    throw ContractViolation("session is " + ToString(session.status) +
                            " and accepts no more tokens");
  }
  const StateId next =
      AdvanceState(index, fsm, eos_id, session.current_state, token);
  if (token == eos_id) {
    session.status = SessionStatus::kFinishedEos;
    return;
  }
  session.current_state = next;
  session.emitted.push_back(token);
}

GenerationSession GuidedSampleTokens(LogitsProvider& provider,
                                     const StateVocabIndex& index,
                                     const Fsm& fsm, const Vocabulary& vocab,
                                     const SamplingConfig& config) {
  config.Validate();
  CheckBinding(index, fsm, vocab);
  if (provider.vocab_size() != vocab.size()) {
    throw BindingError("provider serves " + std::to_string(provider.vocab_size()) +
                       " tokens but the vocabulary has " +
                       std::to_string(vocab.size()));
  }
  GenerationSession session;
  session.rng_seed = config.seed;
  CategoricalSampler sampler(config.seed);
  std::vector<TokenId> candidates;
  for (int step = 0; step < config.max_tokens; ++step) {
    const auto scores = FetchScores(provider, vocab.size(), session.emitted, step);
    candidates.clear();
    for (const TokenTransition& e : index.Allowed(session.current_state)) {
      candidates.push_back(e.token);
    }
    if (fsm.IsFinal(session.current_state)) candidates.push_back(vocab.eos_id());
    if (candidates.empty()) {
      session.status = SessionStatus::kDeadEnd;
      return session;
    }
    const TokenId t = sampler.Sample(scores, candidates, config);
    Advance(session, t, index, fsm, vocab.eos_id());
    if (session.status != SessionStatus::kActive) return session;
  }
  session.status = SessionStatus::kFinishedMaxTokens;
  return session;
}

std::string Detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId t : ids) {
    if (t != vocab.eos_id()) out += vocab.Text(t);
  }
  return out;
}

}  // namespace guidegen
