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

#include "guidegen/grammar_guide.h"

#include <string>

#include "guidegen/errors.h"

namespace guidegen {
namespace {

std::string DescribeCursor(const ParserCursor& cursor) {
  std::string s = "stack [";
  for (std::size_t i = 0; i < cursor.stack.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(cursor.stack[i]);
  }
  return s + "], scanner state " + std::to_string(cursor.scanner_state);
}

}  // namespace

GrammarGuide::GrammarGuide(const GrammarMachine& machine, const ParserIndex& index,
                           const Vocabulary& vocab, GrammarGuideOptions options)
    : machine_(&machine), index_(&index), vocab_(&vocab), options_(options) {
  if (index.grammar_digest() != machine.grammar().digest()) {
    throw BindingError("parser index was built for a different grammar");
  }
  if (index.vocab_digest() != vocab.digest()) {
    throw BindingError("parser index was built for a different vocabulary");
  }
}

std::optional<GrammarTransition> GrammarGuide::Simulate(const ParserCursor& cursor,
                                                        TokenId token) const {
  if (token == vocab_->eos_id()) {
    if (!machine_->CanFinish(cursor)) return std::nullopt;
    return GrammarTransition{token, {}};
  }
  auto delta = machine_->Feed(cursor, vocab_->CodePoints(token));
  if (!delta) return std::nullopt;
  return GrammarTransition{token, std::move(*delta)};
}

std::optional<GrammarTransition> GrammarGuide::Resolve(const ParserCursor& cursor,
                                                       const ParserIndex::Entry& entry) const {
  if (!entry.unindexable) return GrammarTransition{entry.token, entry.delta};
  if (!options_.fallback) {
    throw UnindexableError("token " + std::to_string(entry.token) + " needs more than " +
                           std::to_string(index_->max_depth()) +
                           " stack entries of context at " + DescribeCursor(cursor));
  }
  return Simulate(cursor, entry.token);
}

std::vector<GrammarTransition> GrammarGuide::Allowed(const ParserCursor& cursor) const {
  std::vector<GrammarTransition> out;
  for (const ParserIndex::Entry* e : index_->Lookup(cursor)) {
    if (auto t = Resolve(cursor, *e)) out.push_back(std::move(*t));
  }
  return out;
}

std::vector<GrammarTransition> GrammarGuide::AllowedBySimulation(const ParserCursor& cursor) const {
  std::vector<GrammarTransition> out;
  for (TokenId t = 0; t < vocab_->size(); ++t) {
    if (auto tr = Simulate(cursor, t)) out.push_back(std::move(*tr));
  }
  return out;
}

std::optional<GrammarTransition> GrammarGuide::Transition(const ParserCursor& cursor,
                                                          TokenId token) const {
  for (const ParserIndex::Entry* e : index_->Lookup(cursor)) {
    if (e->token == token) return Resolve(cursor, *e);
  }
  return std::nullopt;
}

void Advance(GrammarSession& session, TokenId token, const GrammarGuide& guide) {
  if (session.status != SessionStatus::kActive) {
    throw ContractViolation("session is " + ToString(session.status));
  }
  if (token >= guide.vocab().size()) {
    throw ContractViolation("token id " + std::to_string(token) + " out of range");
  }
  auto tr = guide.Transition(session.cursor, token);
  if (!tr) {
    throw ContractViolation("token " + std::to_string(token) + " is not allowed at " +
                            DescribeCursor(session.cursor));
  }
  if (token == guide.vocab().eos_id()) {
    session.status = SessionStatus::kFinishedEos;
    return;
  }
  ApplyDelta(session.cursor, tr->delta);
  session.emitted.push_back(token);
}

GrammarSession GrammarGuidedSampleTokens(LogitsProvider& provider, const GrammarGuide& guide,
                                         const SamplingConfig& config) {
  config.Validate();
  const Vocabulary& vocab = guide.vocab();
  if (provider.vocab_size() != vocab.size()) {
    throw BindingError("provider serves " + std::to_string(provider.vocab_size()) +
                       " tokens but the vocabulary has " + std::to_string(vocab.size()));
  }
  GrammarSession session;
  session.cursor = guide.machine().Start();
  session.rng_seed = config.seed;
  CategoricalSampler sampler(config.seed);
  std::vector<TokenId> candidates;
  for (int step = 0; step < config.max_tokens; ++step) {
    const auto scores = FetchScores(provider, vocab.size(), session.emitted, step);
    const auto allowed = guide.Allowed(session.cursor);
    if (allowed.empty()) {
      session.status = SessionStatus::kDeadEnd;
      return session;
    }
    candidates.clear();
    for (const auto& tr : allowed) candidates.push_back(tr.token);
    const TokenId t = sampler.Sample(scores, candidates, config);
    if (t == vocab.eos_id()) {
      session.status = SessionStatus::kFinishedEos;
      return session;
    }
    for (const auto& tr : allowed) {
      if (tr.token == t) {
        ApplyDelta(session.cursor, tr.delta);
        break;
      }
    }
    session.emitted.push_back(t);
  }
  session.status = SessionStatus::kFinishedMaxTokens;
  return session;
}

}  // namespace guidegen
