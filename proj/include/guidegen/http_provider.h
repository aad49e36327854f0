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

#ifndef GUIDEGEN_HTTP_PROVIDER_H_
#define GUIDEGEN_HTTP_PROVIDER_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "guidegen/logits_provider.h"

namespace httplib {
class Client;
}

namespace guidegen {

struct HttpEndpointConfig {
  // http://host[:port][/path]
  std::string url;
  double timeout_seconds = 10.0;
};

/*!
 * \brief Logits provider backed by an HTTP scoring service.
 *
 * Each step POSTs {"tokens": [ids...]} to the endpoint and expects
 * {"scores": [N numbers]}. Construction performs a handshake with an empty
 * prefix and fails with kSizeMismatch unless the service returns exactly
 * `vocab_size` scores. `null` entries and the strings "NaN", "Infinity" and
 * "-Infinity" are read as non-finite values and rejected with
 * kNonFiniteScore.
 */
class HttpLogitsProvider : public LogitsProvider {
 public:
  HttpLogitsProvider(HttpEndpointConfig config, std::size_t vocab_size);
  ~HttpLogitsProvider() override;

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<float> Scores(std::span<const TokenId> prefix) override;

 private:
  HttpEndpointConfig config_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
  std::size_t vocab_size_;
};

std::unique_ptr<LogitsProvider> ExternalProviderClient(
    const HttpEndpointConfig& config, std::size_t vocab_size);

}  // namespace guidegen

#endif  // GUIDEGEN_HTTP_PROVIDER_H_
