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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "guidegen/errors.h"
#include "guidegen/fsm.h"
#include "guidegen/logits_provider.h"
#include "guidegen/sampling.h"
#include "guidegen/vocab_index.h"
#include "test_util.h"

namespace guidegen {
namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Chi-square goodness of fit of `counts` against `probs`. With two degrees of
// freedom the upper tail has the closed form exp(-x / 2).
double ChiSquarePValueDf2(const std::vector<int>& counts, const std::vector<double>& probs) {
  double total = 0;
  for (int c : counts) total += c;
  double x = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = total * probs[i];
    x += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  return std::exp(-x / 2);
}

std::vector<double> Softmax(const std::vector<double>& scores, double temperature) {
  double max = scores[0];
  for (double s : scores) max = std::max(max, s);
  std::vector<double> p;
  double sum = 0;
  for (double s : scores) {
    p.push_back(std::exp((s - max) / temperature));
    sum += p.back();
  }
  for (double& v : p) v /= sum;
  return p;
}

// Four tokens, one masked out: draws follow the softmax over the survivors.
TEST(CategoricalSamplerTest, MaskedSoftmaxChiSquare) {
  const std::vector<float> scores = {0.5f, 2.0f, 1.0f, -0.3f};
  const std::vector<TokenId> survivors = {0, 2, 3};
  for (double temperature : {1.0, 0.5, 2.0}) {
    CategoricalSampler sampler(1234);
    SamplingConfig config;
    config.temperature = temperature;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 100000; ++i) {
      const TokenId t = sampler.Sample(scores, survivors, config);
      ASSERT_NE(t, 1u);
      counts[t == 0 ? 0 : t == 2 ? 1 : 2]++;
    }
    const auto probs = Softmax({0.5, 1.0, -0.3}, temperature);
    EXPECT_GT(ChiSquarePValueDf2(counts, probs), 0.01) << "temperature " << temperature;
  }
}

TEST(CategoricalSamplerTest, GreedyTiesGoToLowestId) {
  CategoricalSampler sampler(0);
  SamplingConfig config;
  config.strategy = SamplingStrategy::kGreedy;
  const std::vector<float> scores = {1.0f, 3.0f, 3.0f, 3.0f};
  const std::vector<TokenId> candidates = {3, 2, 0};
  EXPECT_EQ(sampler.Sample(scores, candidates, config), 2u);
}

TEST(CategoricalSamplerTest, AllNegativeInfinityIsUniform) {
  CategoricalSampler sampler(5);
  SamplingConfig config;
  const std::vector<float> scores(3, kNegInf);
  const std::vector<TokenId> candidates = {0, 1, 2};
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) counts[sampler.Sample(scores, candidates, config)]++;
  EXPECT_GT(ChiSquarePValueDf2(counts, {1 / 3.0, 1 / 3.0, 1 / 3.0}), 0.01);
}

TEST(CategoricalSamplerTest, NegativeInfinityCandidateNeverDrawn) {
  CategoricalSampler sampler(9);
  SamplingConfig config;
  const std::vector<float> scores = {0.0f, kNegInf, 0.0f};
  const std::vector<TokenId> candidates = {0, 1, 2};
  for (int i = 0; i < 10000; ++i) EXPECT_NE(sampler.Sample(scores, candidates, config), 1u);
}

TEST(CategoricalSamplerTest, UniformIsInUnitInterval) {
  CategoricalSampler sampler(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = sampler.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(SamplingConfigTest, Validation) {
  SamplingConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.max_tokens = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  c.max_tokens = 1;
  c.temperature = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  c.temperature = std::nan("");
  EXPECT_THROW(c.Validate(), UsageError);
}

TEST(ProviderTest, SeededUniformIsDeterministicAndBounded) {
  SeededUniformProvider a(50, 49, 7), b(50, 49, 7), c(50, 49, 8);
  const std::vector<TokenId> prefix = {1, 2, 3};
  const auto sa = a.Scores(prefix);
  EXPECT_EQ(sa, b.Scores(prefix));
  EXPECT_NE(sa, c.Scores(prefix));
  EXPECT_NE(sa, a.Scores(std::vector<TokenId>{1, 2}));
  for (float s : sa) {
    EXPECT_GE(s, -1.0f);
    EXPECT_LT(s, 1.0f);
  }
  SeededUniformProvider suppressed(50, 49, 7, true);
  EXPECT_EQ(suppressed.Scores(prefix)[49], kNegInf);
}

TEST(ProviderTest, UnknownNameIsUsageError) {
  const Vocabulary vocab({"a", "</s>"}, 1);
  EXPECT_THROW(MakeProvider("builtin:nope", vocab, 0), UsageError);
  EXPECT_NE(MakeProvider("builtin:adversarial", vocab, 0), nullptr);
}

TEST(SampleTokensTest, StopsAtEosWithoutAppending) {
  const Vocabulary vocab({"a", "b", "</s>"}, 2);
  ScriptedProvider provider(3, 2, {0, 1, 0});
  SamplingConfig config;
  config.strategy = SamplingStrategy::kGreedy;
  EXPECT_EQ(SampleTokens(provider, vocab, config), (std::vector<TokenId>{0, 1, 0}));
  config.max_tokens = 2;
  EXPECT_EQ(SampleTokens(provider, vocab, config), (std::vector<TokenId>{0, 1}));
}

class ThrowingProvider : public LogitsProvider {
 public:
  explicit ThrowingProvider(int fail_at, std::size_t size = 3) : fail_at_(fail_at), size_(size) {}
  std::size_t vocab_size() const override { return 3; }
  std::vector<float> Scores(std::span<const TokenId> prefix) override {
    if (static_cast<int>(prefix.size()) == fail_at_) {
      throw ProviderError(ProviderError::Kind::kConnection, "connection refused");
    }
    std::vector<float> scores(size_, 0.0f);
    if (size_ == 3) scores[2] = kNegInf;  // never stop early
    return scores;
  }

 private:
  int fail_at_;
  std::size_t size_;
};

TEST(SampleTokensTest, ProviderFailureCarriesStep) {
  const Fsm fsm = CompileRegex("[ab]*");
  const Vocabulary vocab({"a", "b", "</s>"}, 2);
  const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
  ThrowingProvider provider(2);
  SamplingConfig config;
  config.max_tokens = 10;
  try {
    GuidedSampleTokens(provider, index, fsm, vocab, config);
    FAIL() << "expected a provider error";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.step(), 2);
    EXPECT_EQ(e.kind(), ProviderError::Kind::kConnection);
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos);
  }

  ThrowingProvider short_scores(-1, 2);
  try {
    GuidedSampleTokens(short_scores, index, fsm, vocab, config);
    FAIL() << "expected a size mismatch";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderError::Kind::kSizeMismatch);
    EXPECT_EQ(e.step(), 0);
  }
}

class GuidedTest : public ::testing::Test {
 protected:
  GuidedTest()
      : fsm_(CompileRegex(R"(([0-9]*)?\.?[0-9]*)")),
        vocab_({"A", ".", "42", ".2", "1", "</s>"}, 5),
        index_(StateVocabIndex::Build(fsm_, vocab_)) {}

  Fsm fsm_;
  Vocabulary vocab_;
  StateVocabIndex index_;
};

TEST_F(GuidedTest, MaskMatchesIndex) {
  const MaskVector m0 = BuildMask(index_, 0, fsm_, vocab_);
  EXPECT_EQ(m0.SetIds(), (std::vector<TokenId>{1, 2, 3, 4, 5}));
  const StateId s = index_.EndState(0, 3);
  const MaskVector m1 = BuildMask(index_, s, fsm_, vocab_);
  EXPECT_EQ(m1.SetIds(), (std::vector<TokenId>{2, 4, 5}));
  EXPECT_EQ(m1.Count(), 3u);
}

TEST_F(GuidedTest, AdvanceContract) {
  GenerationSession session;
  EXPECT_THROW(Advance(session, 0, index_, fsm_, 5), ContractViolation);
  Advance(session, 3, index_, fsm_, 5);
  EXPECT_EQ(session.emitted, (std::vector<TokenId>{3}));
  EXPECT_THROW(Advance(session, 1, index_, fsm_, 5), ContractViolation);
  Advance(session, 5, index_, fsm_, 5);
  EXPECT_EQ(session.status, SessionStatus::kFinishedEos);
  EXPECT_EQ(session.emitted, (std::vector<TokenId>{3}));
  EXPECT_THROW(Advance(session, 4, index_, fsm_, 5), ContractViolation);
}

TEST_F(GuidedTest, AdvanceStateIsStateless) {
  EXPECT_EQ(AdvanceState(index_, fsm_, 5, 0, 4), 0);
  EXPECT_EQ(AdvanceState(index_, fsm_, 5, 0, 5), 0);
  EXPECT_THROW(AdvanceState(index_, fsm_, 5, 0, 0), ContractViolation);
}

TEST_F(GuidedTest, ScriptedRunFollowsScript) {
  ScriptedProvider provider(vocab_.size(), 5, {4, 3, 2});
  SamplingConfig config;
  config.strategy = SamplingStrategy::kGreedy;
  const auto session = GuidedSampleTokens(provider, index_, fsm_, vocab_, config);
  EXPECT_EQ(session.status, SessionStatus::kFinishedEos);
  EXPECT_EQ(Detokenize(vocab_, session.emitted), "1.242");
}

TEST_F(GuidedTest, AdversarialProviderStillValid) {
  AdversarialProvider provider(vocab_);
  SamplingConfig config;
  config.strategy = SamplingStrategy::kGreedy;
  const auto session = GuidedSampleTokens(provider, index_, fsm_, vocab_, config);
  // EOS is allowed in the start state and scores highest.
  EXPECT_EQ(session.status, SessionStatus::kFinishedEos);
  EXPECT_TRUE(session.emitted.empty());
}

TEST_F(GuidedTest, SingleStepBudget) {
  SeededUniformProvider provider(vocab_.size(), 5, 1, /*suppress_eos=*/true);
  SamplingConfig config;
  config.max_tokens = 1;
  const auto session = GuidedSampleTokens(provider, index_, fsm_, vocab_, config);
  EXPECT_EQ(session.status, SessionStatus::kFinishedMaxTokens);
  EXPECT_EQ(session.emitted.size(), 1u);
}

TEST_F(GuidedTest, SameSeedSameOutput) {
  SamplingConfig config;
  config.seed = 77;
  SeededUniformProvider p1(vocab_.size(), 5, 3), p2(vocab_.size(), 5, 3);
  const auto a = GuidedSampleTokens(p1, index_, fsm_, vocab_, config);
  const auto b = GuidedSampleTokens(p2, index_, fsm_, vocab_, config);
  EXPECT_EQ(a.emitted, b.emitted);
  EXPECT_EQ(a.status, b.status);
}

TEST_F(GuidedTest, BindingIsChecked) {
  const Vocabulary other({"A", "</s>"}, 1);
  SeededUniformProvider provider(other.size(), 1, 0);
  EXPECT_THROW(GuidedSampleTokens(provider, index_, fsm_, other, SamplingConfig{}), BindingError);
  SeededUniformProvider wrong_size(3, 2, 0);
  EXPECT_THROW(GuidedSampleTokens(wrong_size, index_, fsm_, vocab_, SamplingConfig{}),
               BindingError);
}

// Without pruning, "a" leads into a state with no way forward.
TEST(GuidedDeadEndTest, ReportsDeadEnd) {
  const Fsm fsm = CompileRegex(R"(a[^\s\S]|b)", {.minimize = true, .prune_dead_states = false});
  const Vocabulary vocab({"a", "</s>"}, 1);
  const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
  SeededUniformProvider provider(vocab.size(), 1, 0);
  SamplingConfig config;
  config.max_tokens = 5;
  const auto session = GuidedSampleTokens(provider, index, fsm, vocab, config);
  EXPECT_EQ(session.status, SessionStatus::kDeadEnd);
  EXPECT_EQ(session.emitted, (std::vector<TokenId>{0}));
}

TEST(GuidedCompletionTest, FinishedOutputsMatch) {
  const auto& pool = testing::RegexPool();
  int finished = 0;
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const Fsm fsm = CompileRegex(pool[r]);
    const Vocabulary vocab = testing::CompletionVocabulary(60, r);
    const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SeededUniformProvider provider(vocab.size(), vocab.eos_id(), seed);
      SamplingConfig config;
      config.seed = seed;
      config.max_tokens = 40;
      const auto session = GuidedSampleTokens(provider, index, fsm, vocab, config);
      const std::string text = Detokenize(vocab, session.emitted);
      if (session.status == SessionStatus::kFinishedEos) {
        ++finished;
        EXPECT_TRUE(testing::ReferenceFullMatch(pool[r], text)) << pool[r] << " / " << text;
      } else {
        EXPECT_EQ(session.status, SessionStatus::kFinishedMaxTokens);
      }
    }
  }
  EXPECT_GT(finished, 0);
}

// True when some final state is reachable from `state` (breadth-first over
// every character of `alphabet`).
bool CanReachFinal(const Fsm& fsm, StateId state, const std::u32string& alphabet) {
  std::vector<bool> seen(fsm.num_states(), false);
  std::vector<StateId> work = {state};
  seen[state] = true;
  while (!work.empty()) {
    const StateId s = work.back();
    work.pop_back();
    if (fsm.IsFinal(s)) return true;
    for (char32_t c : alphabet) {
      const StateId t = fsm.Next(s, c);
      if (t != kNoState && !seen[t]) {
        seen[t] = true;
        work.push_back(t);
      }
    }
  }
  return false;
}

// Replays guided runs step by step: every allowed token keeps the text
// completable, and the allowed set equals the rescanning baseline.
TEST(GuidedCompletionTest, EveryStepIsSoundAndMatchesRescan) {
  const auto& pool = testing::RegexPool();
  std::u32string alphabet;
  for (char32_t c = 0; c < 128; ++c) alphabet += c;
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const Fsm fsm = CompileRegex(pool[r]);
    const Vocabulary vocab = testing::CompletionVocabulary(40, 100 + r);
    const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SeededUniformProvider provider(vocab.size(), vocab.eos_id(), seed);
      SamplingConfig config;
      config.seed = seed;
      config.max_tokens = 12;
      const auto session = GuidedSampleTokens(provider, index, fsm, vocab, config);
      std::u32string text;
      for (std::size_t step = 0; step <= session.emitted.size(); ++step) {
        const StateId state = fsm.Walk(0, text);
        ASSERT_NE(state, kNoState);
        const MaskVector mask = BuildMask(index, state, fsm, vocab);
        for (TokenId t = 0; t < vocab.size(); ++t) {
          bool naive;
          if (t == vocab.eos_id()) {
            naive = fsm.IsFinal(fsm.Walk(0, text));
          } else {
            const StateId end = fsm.Walk(0, text + std::u32string(vocab.CodePoints(t)));
            naive = end != kNoState && CanReachFinal(fsm, end, alphabet);
          }
          EXPECT_EQ(mask.Test(t), naive) << pool[r] << " step " << step << " token " << t;
        }
        if (step < session.emitted.size()) text += vocab.CodePoints(session.emitted[step]);
      }
    }
  }
}

TEST(StatusTest, Names) {
  EXPECT_EQ(ToString(SessionStatus::kActive), "active");
  EXPECT_EQ(ToString(SessionStatus::kFinishedEos), "finished-eos");
  EXPECT_EQ(ToString(SessionStatus::kFinishedMaxTokens), "finished-max-tokens");
  EXPECT_EQ(ToString(SessionStatus::kDeadEnd), "dead-end");
}

}  // namespace
}  // namespace guidegen
