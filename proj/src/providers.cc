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

#include <algorithm>
#include <limits>

#include "guidegen/errors.h"
#include "guidegen/http_provider.h"
#include "guidegen/logits_provider.h"

namespace guidegen {

namespace {

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<float> SeededUniformProvider::Scores(std::span<const TokenId> prefix) {
  std::uint64_t key = seed_;
  SplitMix64(key);
  for (TokenId t : prefix) {
    key ^= t + 0x632BE59BD9B4E019ULL;
    SplitMix64(key);
  }
  std::vector<float> scores(vocab_size_);
  for (float& s : scores) {
    const double u = static_cast<double>(SplitMix64(key) >> 11) * 0x1.0p-53;
    s = static_cast<float>(2.0 * u - 1.0);
  }
  if (suppress_eos_ && eos_id_ < vocab_size_) {
    scores[eos_id_] = -std::numeric_limits<float>::infinity();
  }
  return scores;
}

AdversarialProvider::AdversarialProvider(const Vocabulary& vocab)
    : scores_(vocab.size()) {
  for (TokenId t = 0; t < vocab.size(); ++t) {
    scores_[t] = static_cast<float>(vocab.CodePoints(t).size());
  }
  scores_[vocab.eos_id()] = 1000.0f;
}

std::vector<float> ScriptedProvider::Scores(std::span<const TokenId> prefix) {
  std::vector<float> scores(vocab_size_, low_);
  const std::size_t step = prefix.size();
  const TokenId preferred = step < script_.size() ? script_[step] : eos_id_;
  if (preferred < vocab_size_) scores[preferred] = high_;
  return scores;
}

std::unique_ptr<LogitsProvider> MakeProvider(const std::string& name,
                                             const Vocabulary& vocab,
                                             std::uint64_t seed,
                                             double timeout_seconds) {
  if (name == "builtin:seeded-uniform") {
    return std::make_unique<SeededUniformProvider>(vocab.size(), vocab.eos_id(), seed);
  }
  if (name == "builtin:adversarial") {
    return std::make_unique<AdversarialProvider>(vocab);
  }
  if (name.starts_with("http:")) {
    // Accepts "http:http://host/path", "http://host/path" and "http:host/path".
    std::string url = name.substr(5);
    if (url.starts_with("//")) {
      url = "http:" + url;
    } else if (!url.starts_with("http://")) {
      url = "http://" + url;
    }
    return ExternalProviderClient({url, timeout_seconds}, vocab.size());
  }
  throw UsageError("unknown provider '" + name +
                   "' (expected builtin:seeded-uniform, builtin:adversarial "
                   "or http:<url>)");
}

}  // namespace guidegen
