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

#include "guidegen/vocab_index.h"

#include <algorithm>
#include <cstring>
#include <thread>

#include "guidegen/errors.h"
#include "guidegen/io.h"

namespace guidegen {

namespace {

constexpr char kMagic[4] = {'G', 'G', 'I', 'X'};

struct RawEntry {
  StateId start;
  TokenId token;
  StateId end;
};

void WalkTokens(const Fsm& fsm, const Vocabulary& vocab, TokenId begin,
                TokenId end, std::vector<RawEntry>& out) {
  for (TokenId t = begin; t < end; ++t) {
    if (t == vocab.eos_id()) continue;
    const std::u32string_view text = vocab.CodePoints(t);
    if (text.empty()) continue;
    for (StateId start : fsm.StatesReading(text.front())) {
      const StateId last = fsm.Walk(start, text);
      if (last != kNoState) out.push_back({start, t, last});
    }
  }
}

}  // namespace

std::vector<std::vector<StateId>> FindSubSequences(const Fsm& fsm,
                                                   std::u32string_view token) {
  std::vector<std::vector<StateId>> result;
  if (token.empty()) return result;
  for (StateId r : fsm.StatesReading(token.front())) {
    std::vector<StateId> path = {r};
    StateId s = r;
    bool complete = true;
    for (char32_t ch : token) {
      s = fsm.Next(s, ch);
      if (s == kNoState) {
        complete = false;
        break;
      }
      path.push_back(s);
    }
    if (complete) result.push_back(std::move(path));
  }
  return result;
}

Digest FsmDigest(const Fsm& fsm) { return Sha256(fsm.CanonicalBytes()); }

StateVocabIndex StateVocabIndex::Build(const Fsm& fsm, const Vocabulary& vocab,
                                       const IndexBuildOptions& options) {
  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency()
                                          : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, vocab.size()));
  const auto n = static_cast<TokenId>(vocab.size());

  std::vector<std::vector<RawEntry>> parts(threads);
  if (threads == 1) {
    WalkTokens(fsm, vocab, 0, n, parts[0]);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned i = 0; i < threads; ++i) {
      const TokenId lo = static_cast<TokenId>(std::uint64_t{n} * i / threads);
      const TokenId hi = static_cast<TokenId>(std::uint64_t{n} * (i + 1) / threads);
      workers.emplace_back([&, lo, hi, i] { WalkTokens(fsm, vocab, lo, hi, parts[i]); });
    }
  }

  // Bucket by start state. Parts cover ascending token ranges in order, so
  // tokens come out ascending within each state.
  StateVocabIndex index;
  index.fsm_digest_ = FsmDigest(fsm);
  index.vocab_digest_ = vocab.digest();
  index.offsets_.assign(fsm.num_states() + 1, 0);
  for (const auto& part : parts) {
    for (const RawEntry& e : part) ++index.offsets_[e.start + 1];
  }
  for (int s = 0; s < fsm.num_states(); ++s) index.offsets_[s + 1] += index.offsets_[s];
  index.entries_.resize(index.offsets_.back());
  std::vector<std::uint32_t> cursor(index.offsets_.begin(), index.offsets_.end() - 1);
  for (const auto& part : parts) {
    for (const RawEntry& e : part) index.entries_[cursor[e.start]++] = {e.token, e.end};
  }
  return index;
}

StateId StateVocabIndex::EndState(StateId state, TokenId token) const {
  const auto row = Allowed(state);
  auto it = std::lower_bound(
      row.begin(), row.end(), token,
      [](const TokenTransition& e, TokenId t) { return e.token < t; });
  if (it == row.end() || it->token != token) return kNoState;
  return it->end;
}

std::vector<std::uint8_t> StateVocabIndex::Serialize() const {
  ByteWriter w;
  w.Raw({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.U32(kFormatVersion);
  w.Raw(fsm_digest_);
  w.Raw(vocab_digest_);
  w.U32(static_cast<std::uint32_t>(num_states()));
  for (int s = 0; s < num_states(); ++s) {
    const auto row = Allowed(s);
    w.U32(static_cast<std::uint32_t>(s));
    w.U32(static_cast<std::uint32_t>(row.size()));
    for (const TokenTransition& e : row) {
      w.U32(e.token);
      w.U32(static_cast<std::uint32_t>(e.end));
    }
  }
  return w.Take();
}

StateVocabIndex StateVocabIndex::Deserialize(std::span<const std::uint8_t> bytes,
                                             const Digest* expected_fsm,
                                             const Digest* expected_vocab) {
  using Kind = IndexFormatError::Kind;
  ByteReader r(bytes);
  if (bytes.size() < 4 || std::memcmp(r.Raw(4).data(), kMagic, 4) != 0) {
    throw IndexFormatError(Kind::kBadMagic, "not a regex index file (bad magic)");
  }
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    throw IndexFormatError(Kind::kVersionMismatch,
                           "unsupported index version " + std::to_string(version) +
                               " (expected " + std::to_string(kFormatVersion) + ")");
  }
  StateVocabIndex index;
  auto fsm_digest = r.Raw(32);
  std::copy(fsm_digest.begin(), fsm_digest.end(), index.fsm_digest_.begin());
  auto vocab_digest = r.Raw(32);
  std::copy(vocab_digest.begin(), vocab_digest.end(), index.vocab_digest_.begin());
  const std::uint32_t num_states = r.U32();
  // Each state record takes at least 8 bytes.
  if (num_states > r.remaining() / 8) {
    throw IndexFormatError(Kind::kTruncated, "truncated index payload: " +
                                                 std::to_string(num_states) +
                                                 " state records declared");
  }
  index.offsets_.push_back(0);
  for (std::uint32_t s = 0; s < num_states; ++s) {
    if (r.U32() != s) {
      throw IndexFormatError(Kind::kCorrupt, "state records out of order at state " +
                                                 std::to_string(s));
    }
    const std::uint32_t count = r.U32();
    if (count > r.remaining() / 8) {
      throw IndexFormatError(Kind::kTruncated,
                             "truncated index payload in state " + std::to_string(s));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      TokenTransition e;
      e.token = r.U32();
      e.end = static_cast<StateId>(r.U32());
      if (e.end < 0 || static_cast<std::uint32_t>(e.end) >= num_states ||
          (i > 0 && index.entries_.back().token >= e.token)) {
        throw IndexFormatError(Kind::kCorrupt,
                               "corrupt entry in state " + std::to_string(s));
      }
      index.entries_.push_back(e);
    }
    index.offsets_.push_back(static_cast<std::uint32_t>(index.entries_.size()));
  }
  if (!r.AtEnd()) {
    throw IndexFormatError(Kind::kTrailingBytes, "trailing bytes after index payload");
  }
  if (expected_fsm != nullptr && *expected_fsm != index.fsm_digest_) {
    throw IndexFormatError(Kind::kDigestMismatch,
                           "index was built for a different automaton (digest " +
                               DigestHex(index.fsm_digest_) + ")");
  }
  if (expected_vocab != nullptr && *expected_vocab != index.vocab_digest_) {
    throw IndexFormatError(Kind::kDigestMismatch,
                           "index was built for a different vocabulary (digest " +
                               DigestHex(index.vocab_digest_) + ")");
  }
  return index;
}

}  // namespace guidegen
