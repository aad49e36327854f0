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

#ifndef GUIDEGEN_DIGEST_H_
#define GUIDEGEN_DIGEST_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace guidegen {

// SHA-256 content hash.
using Digest = std::array<std::uint8_t, 32>;

Digest Sha256(std::span<const std::uint8_t> bytes);
std::string DigestHex(const Digest& digest);

}  // namespace guidegen

#endif  // GUIDEGEN_DIGEST_H_
