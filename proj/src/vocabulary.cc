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

#include "guidegen/vocabulary.h"

#include <random>
#include <unordered_set>
#include <utility>

#include "guidegen/errors.h"
#include "guidegen/io.h"
#include "guidegen/utf8.h"
#include "json.hpp"

namespace guidegen {

using json = nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos_id)
    : tokens_(std::move(tokens)), eos_id_(eos_id) {
  if (tokens_.empty()) throw VocabularyError("vocabulary is empty");
  if (eos_id_ >= tokens_.size()) {
    throw VocabularyError("eos_id " + std::to_string(eos_id_) +
                          " is not a token id (vocabulary size " +
                          std::to_string(tokens_.size()) + ")");
  }
  decoded_.reserve(tokens_.size());
  ByteWriter w;
  const std::string_view tag = "GGVOCAB1";
  w.Raw({reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()});
  w.U32(static_cast<std::uint32_t>(tokens_.size()));
  w.U32(eos_id_);
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    if (id != eos_id_ && tokens_[id].empty()) {
      throw VocabularyError("token " + std::to_string(id) + " is empty");
    }
    try {
      decoded_.push_back(DecodeUtf8(tokens_[id]));
    } catch (const Error& e) {
      throw VocabularyError("token " + std::to_string(id) + ": " + e.what());
    }
    w.U32(static_cast<std::uint32_t>(tokens_[id].size()));
    w.Raw({reinterpret_cast<const std::uint8_t*>(tokens_[id].data()),
           tokens_[id].size()});
  }
  const auto bytes = w.Take();
  digest_ = Sha256(bytes);
}

Vocabulary Vocabulary::FromJson(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    const TextPosition pos =
        PositionOf(std::string(json_text), e.byte > 0 ? e.byte - 1 : 0);
    throw VocabularyError("vocabulary JSON parse error at line " +
                          std::to_string(pos.line) + ", column " +
                          std::to_string(pos.column));
  }
  if (!doc.is_object()) throw VocabularyError("vocabulary must be a JSON object");
  if (!doc.contains("eos_id") || !doc["eos_id"].is_number_integer()) {
    throw VocabularyError("vocabulary needs an integer \"eos_id\"");
  }
  if (!doc.contains("tokens") || !doc["tokens"].is_object()) {
    throw VocabularyError("vocabulary needs a \"tokens\" object");
  }
  const auto& entries = doc["tokens"];
  std::vector<std::string> tokens(entries.size());
  std::vector<bool> seen(entries.size(), false);
  for (const auto& [text, id_value] : entries.items()) {
    if (!id_value.is_number_integer()) {
      throw VocabularyError("token id for \"" + text + "\" is not an integer");
    }
    const auto id = id_value.get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= entries.size()) {
      throw VocabularyError("token ids must be dense in [0, " +
                            std::to_string(entries.size()) + "), got " +
                            std::to_string(id));
    }
    if (seen[id]) {
      throw VocabularyError("duplicate token id " + std::to_string(id));
    }
    seen[id] = true;
    tokens[id] = text;
  }
  const auto eos = doc["eos_id"].get<std::int64_t>();
  if (eos < 0) throw VocabularyError("eos_id must be non-negative");
  return Vocabulary(std::move(tokens), static_cast<TokenId>(eos));
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return FromJson(text);
  } catch (const VocabularyError& e) {
    throw VocabularyError(path.string() + ": " + e.what());
  }
}

std::string Vocabulary::ToJson() const {
  json tokens = json::object();
  for (std::size_t id = 0; id < tokens_.size(); ++id) tokens[tokens_[id]] = id;
  json doc = {{"eos_id", eos_id_}, {"tokens", std::move(tokens)}};
  return doc.dump();
}

Vocabulary SyntheticVocabulary(std::size_t size, std::uint64_t seed) {
  if (size < 2) throw VocabularyError("synthetic vocabulary needs size >= 2");
  static constexpr std::string_view kWord =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";
  static constexpr std::string_view kOther = " .,:;()-+=\"'/";
  std::mt19937_64 rng(seed);
  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen = {"</s>"};
  for (char c = 0x20; c < 0x7F && tokens.size() + 1 < size; ++c) {
    tokens.emplace_back(1, c);
    seen.insert(tokens.back());
  }
  while (tokens.size() + 1 < size) {
    const std::size_t len = 2 + rng() % 5;
    std::string t;
    for (std::size_t i = 0; i < len; ++i) {
      // Roughly 7 in 8 characters are word characters.
      if (rng() % 8 != 0) {
        t.push_back(kWord[rng() % kWord.size()]);
      } else {
        t.push_back(kOther[rng() % kOther.size()]);
      }
    }
    if (seen.insert(t).second) tokens.push_back(std::move(t));
  }
  tokens.emplace_back("</s>");
  const auto eos = static_cast<TokenId>(tokens.size() - 1);
  return Vocabulary(std::move(tokens), eos);
}

}  // namespace guidegen
