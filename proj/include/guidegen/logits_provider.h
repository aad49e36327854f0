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

#ifndef GUIDEGEN_LOGITS_PROVIDER_H_
#define GUIDEGEN_LOGITS_PROVIDER_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "guidegen/vocabulary.h"

namespace guidegen {

// Source of next-token scores (logits). Implementations must return exactly
// vocab_size() values and be deterministic for a given prefix.
class LogitsProvider {
 public:
  virtual ~LogitsProvider() = default;

  virtual std::size_t vocab_size() const = 0;
  // Throws ProviderError on failure.
  virtual std::vector<float> Scores(std::span<const TokenId> prefix) = 0;
};

// Uniform(-1, 1) scores drawn from a stream keyed by (seed, prefix). With
// `suppress_eos` the EOS score is -infinity, so sampling never stops early.
class SeededUniformProvider : public LogitsProvider {
 public:
  SeededUniformProvider(std::size_t vocab_size, TokenId eos_id,
                        std::uint64_t seed, bool suppress_eos = false)
      : vocab_size_(vocab_size), eos_id_(eos_id), seed_(seed),
        suppress_eos_(suppress_eos) {}

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<float> Scores(std::span<const TokenId> prefix) override;

 private:
  std::size_t vocab_size_;
  TokenId eos_id_;
  std::uint64_t seed_;
  bool suppress_eos_;
};

// Pushes sampling toward what a guide usually forbids: EOS gets the highest
// score, then longer token strings score higher.
class AdversarialProvider : public LogitsProvider {
 public:
  explicit AdversarialProvider(const Vocabulary& vocab);

  std::size_t vocab_size() const override { return scores_.size(); }
  std::vector<float> Scores(std::span<const TokenId>) override { return scores_; }

 private:
  std::vector<float> scores_;
};

// Step i puts a high score on script[i] (when present) and a low score on
// everything else; past the end of the script EOS is preferred.
class ScriptedProvider : public LogitsProvider {
 public:
  ScriptedProvider(std::size_t vocab_size, TokenId eos_id,
                   std::vector<TokenId> script, float high = 10.0f,
                   float low = -10.0f)
      : vocab_size_(vocab_size), eos_id_(eos_id), script_(std::move(script)),
        high_(high), low_(low) {}

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<float> Scores(std::span<const TokenId> prefix) override;

 private:
  std::size_t vocab_size_;
  TokenId eos_id_;
  std::vector<TokenId> script_;
  float high_;
  float low_;
};

// Builds a provider from a name: "builtin:seeded-uniform",
// "builtin:adversarial" or "http:<url>". Throws UsageError for unknown names.
std::unique_ptr<LogitsProvider> MakeProvider(const std::string& name,
                                             const Vocabulary& vocab,
                                             std::uint64_t seed,
                                             double timeout_seconds = 10.0);

}  // namespace guidegen

#endif  // GUIDEGEN_LOGITS_PROVIDER_H_
