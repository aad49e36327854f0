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

#ifndef GUIDEGEN_VOCABULARY_H_
#define GUIDEGEN_VOCABULARY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "guidegen/digest.h"

namespace guidegen {

using TokenId = std::uint32_t;

/*!
 * \brief Token strings indexed by dense id, plus the end-of-sequence id.
 *
 * Token strings are treated as Unicode text. The EOS token never takes part
 * in automaton transitions; its string is informational only.
 */
class Vocabulary {
 public:
  // Throws VocabularyError if ids are not dense, `eos_id` is out of range or
  // a non-EOS token is empty.
  Vocabulary(std::vector<std::string> tokens, TokenId eos_id);

  // Parses {"eos_id": int, "tokens": {"<token>": id, ...}}.
  static Vocabulary FromJson(std::string_view json_text);
  static Vocabulary Load(const std::filesystem::path& path);
  std::string ToJson() const;

  std::size_t size() const { return tokens_.size(); }
  TokenId eos_id() const { return eos_id_; }
  const std::string& Text(TokenId id) const { return tokens_[id]; }
  std::u32string_view CodePoints(TokenId id) const { return decoded_[id]; }
  const Digest& digest() const { return digest_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::u32string> decoded_;
  TokenId eos_id_;
  Digest digest_{};
};

// Deterministic synthetic vocabulary of `size` tokens (including EOS, which
// takes the last id): every printable ASCII character as a single-character
// token, then random 2-6 character strings biased toward word characters.
Vocabulary SyntheticVocabulary(std::size_t size, std::uint64_t seed);

}  // namespace guidegen

#endif  // GUIDEGEN_VOCABULARY_H_
