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

#ifndef GUIDEGEN_UTF8_H_
#define GUIDEGEN_UTF8_H_

#include <string>
#include <string_view>

namespace guidegen {

inline constexpr char32_t kMaxCodePoint = 0x10FFFF;

// Strict UTF-8 decoding; overlong forms, surrogates and truncated sequences
// throw an Error with ErrorCategory::kData.
std::u32string DecodeUtf8(std::string_view text);

std::string EncodeUtf8(std::u32string_view text);
void AppendUtf8(char32_t cp, std::string& out);

// Printable rendering of a code point for diagnostics, e.g. 'a' or U+000A.
std::string DescribeCodePoint(char32_t cp);

}  // namespace guidegen

#endif  // GUIDEGEN_UTF8_H_
