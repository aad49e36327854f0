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

#ifndef GUIDEGEN_BENCH_H_
#define GUIDEGEN_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "guidegen/fsm.h"
#include "guidegen/vocab_index.h"
#include "guidegen/vocabulary.h"

namespace guidegen {

enum class BenchMethod { kIndexed, kNaiveRescan };
std::string ToString(BenchMethod method);

struct BenchRecord {
  BenchMethod method = BenchMethod::kIndexed;
  int max_tokens = 0;
  std::size_t vocab_size = 0;
  double wall_time = 0;           // seconds for the whole generation
  double per_step_mask_time = 0;  // median seconds spent producing one mask

  bool operator==(const BenchRecord&) const = default;
};

// Outcome of one generation run.
struct BenchRun {
  double wall_time = 0;
  double per_step_mask_time = 0;  // median over steps
  int masks = 0;
  std::vector<TokenId> emitted;
};

// Generation where each step's allowed set comes from the state index.
BenchRun RunIndexed(const Fsm& fsm, const StateVocabIndex& index, const Vocabulary& vocab,
                    int max_tokens, std::uint64_t seed);

// Baseline that, at every step, re-walks the automaton from the start over
// the emitted text plus each candidate token. Each mask is checked against
// the state index outside the timed region; a mismatch throws Error.
BenchRun RunNaiveRescan(const Fsm& fsm, const StateVocabIndex& index, const Vocabulary& vocab,
                        int max_tokens, std::uint64_t seed);

struct BenchOptions {
  std::string regex;
  std::vector<std::size_t> vocab_sizes;
  std::vector<int> max_tokens;
  std::uint64_t seed = 0;
  int reps = 5;
};

// Runs both methods on every (vocab size, max_tokens) cell with a synthetic
// vocabulary and a seeded uniform provider whose EOS score is -inf. Times
// are medians over `reps` repetitions.
std::vector<BenchRecord> RunBench(const BenchOptions& options);

inline constexpr std::string_view kBenchCsvHeader =
    "method,max_tokens,vocab_size,wall_time,per_step_mask_time";

std::string FormatBenchCsv(const std::vector<BenchRecord>& records);
// Throws Error(kData) naming the offending line.
std::vector<BenchRecord> ParseBenchCsv(std::string_view csv);

}  // namespace guidegen

#endif  // GUIDEGEN_BENCH_H_
