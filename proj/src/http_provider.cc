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

#include "guidegen/http_provider.h"

#include <cmath>
#include <limits>
#include <utility>

#include "guidegen/errors.h"
#include "httplib.h"
#include "json.hpp"

namespace guidegen {

namespace {

using json = nlohmann::json;

float ScoreValue(const json& v) {
  constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
  constexpr float kInf = std::numeric_limits<float>::infinity();
  if (v.is_number()) return v.get<float>();
  if (v.is_null()) return kNaN;
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "NaN" || s == "nan") return kNaN;
    if (s == "Infinity" || s == "inf") return kInf;
    if (s == "-Infinity" || s == "-inf") return -kInf;
  }
  throw ProviderError(ProviderError::Kind::kMalformedPayload,
                      "score entry is not a number: " + v.dump());
}

}  // namespace

HttpLogitsProvider::HttpLogitsProvider(HttpEndpointConfig config,
                                       std::size_t vocab_size)
    : config_(std::move(config)), vocab_size_(vocab_size) {
  const std::string scheme = "http://";
  if (!config_.url.starts_with(scheme)) {
    throw UsageError("provider URL must start with http://: " + config_.url);
  }
  const std::size_t slash = config_.url.find('/', scheme.size());
  const std::string host = config_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
  client_ = std::make_unique<httplib::Client>(host);
  const auto seconds = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>(
      (config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client_->set_connection_timeout(seconds, micros);
  client_->set_read_timeout(seconds, micros);
  client_->set_write_timeout(seconds, micros);
  // Handshake: the empty prefix must produce exactly vocab_size scores.
  Scores({});
}

HttpLogitsProvider::~HttpLogitsProvider() = default;

std::vector<float> HttpLogitsProvider::Scores(std::span<const TokenId> prefix) {
  using Kind = ProviderError::Kind;
  const json request = {{"tokens", std::vector<TokenId>(prefix.begin(), prefix.end())}};
  auto res = client_->Post(path_, request.dump(), "application/json");
  if (!res) {
    const httplib::Error err = res.error();
    const Kind kind = (err == httplib::Error::ConnectionTimeout ||
                       err == httplib::Error::Read)
                          ? Kind::kTimeout
                          : Kind::kConnection;
    throw ProviderError(kind, "request to " + config_.url +
                                  " failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw ProviderError(Kind::kHttpStatus, "provider returned HTTP " +
                                               std::to_string(res->status));
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProviderError(Kind::kMalformedPayload,
                        std::string("provider response is not JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("scores") || !body["scores"].is_array()) {
    throw ProviderError(Kind::kMalformedPayload,
                        "provider response lacks a \"scores\" array");
  }
  const json& raw = body["scores"];
  if (raw.size() != vocab_size_) {
    throw ProviderError(Kind::kSizeMismatch,
                        "provider returned " + std::to_string(raw.size()) +
                            " scores for a vocabulary of " +
                            std::to_string(vocab_size_));
  }
  std::vector<float> scores;
  scores.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const float v = ScoreValue(raw[i]);
    if (!std::isfinite(v)) {
      throw ProviderError(Kind::kNonFiniteScore,
                          "provider returned a non-finite score for token " +
                              std::to_string(i));
    }
    scores.push_back(v);
  }
  return scores;
}

std::unique_ptr<LogitsProvider> ExternalProviderClient(
    const HttpEndpointConfig& config, std::size_t vocab_size) {
  return std::make_unique<HttpLogitsProvider>(config, vocab_size);
}

}  // namespace guidegen
