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

#ifndef GUIDEGEN_ERRORS_H_
#define GUIDEGEN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace guidegen {

// Broad classification used by the CLI to choose an exit code.
enum class ErrorCategory {
  kUsage,    // caller misuse: bad arguments, out-of-range states
  kData,     // malformed or inconsistent input data
  kRuntime,  // failures of external collaborators (network, provider)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorCategory::kUsage, what) {}
};

// Regex compilation failure. `position` is a code point offset into the
// pattern.
class RegexError : public Error {
 public:
  enum class Kind { kSyntax, kUnsupported };

  RegexError(Kind kind, std::size_t position, const std::string& what)
      : Error(ErrorCategory::kData, what), kind_(kind), position_(position) {}

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

class VocabularyError : public Error {
 public:
  explicit VocabularyError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

// Errors while decoding a serialized index.
class IndexFormatError : public Error {
 public:
  enum class Kind { kBadMagic, kVersionMismatch, kTruncated, kTrailingBytes,
                    kDigestMismatch, kCorrupt };

  IndexFormatError(Kind kind, const std::string& what)
      : Error(ErrorCategory::kData, what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// A guide component was paired with a mismatched FSM, vocabulary or grammar.
class BindingError : public Error {
 public:
  explicit BindingError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

// A token was fed to a session that does not allow it.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorCategory::kUsage, what) {}
};

class ProviderError : public Error {
 public:
  enum class Kind { kConnection, kTimeout, kHttpStatus, kMalformedPayload,
                    kSizeMismatch, kNonFiniteScore, kOther };

  ProviderError(Kind kind, const std::string& what)
      : Error(ErrorCategory::kRuntime, what), kind_(kind) {}

  Kind kind() const { return kind_; }

  // Sampling step at which the failure happened, or -1 when not attached.
  long step() const { return step_; }
  ProviderError WithStep(long step) const;

 private:
  Kind kind_;
  long step_ = -1;
};

// Grammar file syntax or well-formedness failure. `line` is 1-based, 0 when
// the problem is not tied to a line.
class GrammarError : public Error {
 public:
  GrammarError(std::size_t line, const std::string& what)
      : Error(ErrorCategory::kData, what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Shift/reduce or reduce/reduce conflict in LALR(1) table construction.
class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

// A parser configuration needs more stack context than the index holds and
// fallback simulation is disabled.
class UnindexableError : public Error {
 public:
  explicit UnindexableError(const std::string& what)
      : Error(ErrorCategory::kRuntime, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

}  // namespace guidegen

#endif  // GUIDEGEN_ERRORS_H_
