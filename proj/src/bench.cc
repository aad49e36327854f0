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

#include "guidegen/bench.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <span>

#include "guidegen/errors.h"
#include "guidegen/logits_provider.h"
#include "guidegen/sampling.h"

namespace guidegen {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void AppendDouble(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

}  // namespace

std::string ToString(BenchMethod method) {
  return method == BenchMethod::kIndexed ? "indexed" : "naive-rescan";
}

BenchRun RunIndexed(const Fsm& fsm, const StateVocabIndex& index, const Vocabulary& vocab,
                    int max_tokens, std::uint64_t seed) {
  SeededUniformProvider provider(vocab.size(), vocab.eos_id(), seed, /*suppress_eos=*/true);
  CategoricalSampler sampler(seed);
  SamplingConfig config;
  config.max_tokens = max_tokens;
  config.seed = seed;

  BenchRun run;
  std::vector<double> mask_times;
  std::vector<TokenId> candidates;
  StateId state = fsm.start();
  const auto t0 = Clock::now();
  for (int step = 0; step < max_tokens; ++step) {
    const auto scores = FetchScores(provider, vocab.size(), run.emitted, step);
    static_cast<void>(Clock::now());  // warm the clock path
    const auto m0 = Clock::now();
    const std::span<const TokenTransition> allowed = index.Allowed(state);
    const bool eos_ok = fsm.IsFinal(state);
    mask_times.push_back(Seconds(Clock::now() - m0));
    ++run.masks;

    candidates.clear();
    for (const TokenTransition& e : allowed) candidates.push_back(e.token);
    if (eos_ok) candidates.push_back(vocab.eos_id());
    if (candidates.empty()) break;
    const TokenId t = sampler.Sample(scores, candidates, config);
    if (t == vocab.eos_id()) break;
    state = index.EndState(state, t);
    run.emitted.push_back(t);
  }
  run.wall_time = Seconds(Clock::now() - t0);
  run.per_step_mask_time = mask_times.empty() ? 0.0 : Median(std::move(mask_times));
  return run;
}

BenchRun RunNaiveRescan(const Fsm& fsm, const StateVocabIndex& index, const Vocabulary& vocab,
                        int max_tokens, std::uint64_t seed) {
  SeededUniformProvider provider(vocab.size(), vocab.eos_id(), seed, /*suppress_eos=*/true);
  CategoricalSampler sampler(seed);
  SamplingConfig config;
  config.max_tokens = max_tokens;
  config.seed = seed;

  BenchRun run;
  std::vector<double> mask_times;
  Clock::duration check_time{};
  std::vector<TokenId> candidates;
  std::u32string text;
  StateId state = fsm.start();  // only used for the cross-check
  const auto t0 = Clock::now();
  for (int step = 0; step < max_tokens; ++step) {
    const auto scores = FetchScores(provider, vocab.size(), run.emitted, step);
    const auto m0 = Clock::now();
    candidates.clear();
    for (TokenId t = 0; t < vocab.size(); ++t) {
      if (t == vocab.eos_id()) continue;
      const StateId prefix_end = fsm.Walk(fsm.start(), text);
      if (prefix_end == kNoState) continue;
      const StateId s = fsm.Walk(prefix_end, vocab.CodePoints(t));
      if (s != kNoState) candidates.push_back(t);
    }
    const StateId whole = fsm.Walk(fsm.start(), text);
    if (whole != kNoState && fsm.IsFinal(whole)) candidates.push_back(vocab.eos_id());
    const auto m1 = Clock::now();
    mask_times.push_back(Seconds(m1 - m0));
    ++run.masks;

    std::vector<TokenId> expected;
    for (const TokenTransition& e : index.Allowed(state)) expected.push_back(e.token);
    if (fsm.IsFinal(state)) expected.push_back(vocab.eos_id());
    if (expected != candidates) {
      throw Error(ErrorCategory::kRuntime,
                  "naive and indexed masks differ at step " + std::to_string(step));
    }
    check_time += Clock::now() - m1;

    if (candidates.empty()) break;
    const TokenId t = sampler.Sample(scores, candidates, config);
    if (t == vocab.eos_id()) break;
    state = index.EndState(state, t);
    run.emitted.push_back(t);
    text += vocab.CodePoints(t);
  }
  run.wall_time = Seconds(Clock::now() - t0 - check_time);
  run.per_step_mask_time = mask_times.empty() ? 0.0 : Median(std::move(mask_times));
  return run;
}

std::vector<BenchRecord> RunBench(const BenchOptions& options) {
  if (options.reps < 1) throw UsageError("reps must be >= 1");
  if (options.vocab_sizes.empty() || options.max_tokens.empty()) {
    throw UsageError("bench needs at least one vocabulary size and one max_tokens value");
  }
  for (int l : options.max_tokens) {
    if (l < 1) throw UsageError("max_tokens values must be >= 1");
  }
  const Fsm fsm = CompileRegex(options.regex);
  std::vector<BenchRecord> records;
  for (std::size_t n : options.vocab_sizes) {
    const Vocabulary vocab = SyntheticVocabulary(n, options.seed);
    const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
    for (int l : options.max_tokens) {
      for (BenchMethod method : {BenchMethod::kIndexed, BenchMethod::kNaiveRescan}) {
        std::vector<double> wall, per_step;
        for (int rep = 0; rep < options.reps; ++rep) {
          const BenchRun run = method == BenchMethod::kIndexed
                                   ? RunIndexed(fsm, index, vocab, l, options.seed)
                                   : RunNaiveRescan(fsm, index, vocab, l, options.seed);
          wall.push_back(run.wall_time);
          per_step.push_back(run.per_step_mask_time);
        }
        records.push_back({method, l, n, Median(wall), Median(per_step)});
      }
    }
  }
  return records;
}

std::string FormatBenchCsv(const std::vector<BenchRecord>& records) {
  std::string out(kBenchCsvHeader);
  out += '\n';
  for (const BenchRecord& r : records) {
    out += ToString(r.method);
    out += ',' + std::to_string(r.max_tokens) + ',' + std::to_string(r.vocab_size) + ',';
    AppendDouble(out, r.wall_time);
    out += ',';
    AppendDouble(out, r.per_step_mask_time);
    out += '\n';
  }
  return out;
}

std::vector<BenchRecord> ParseBenchCsv(std::string_view csv) {
  std::vector<BenchRecord> out;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    return Error(ErrorCategory::kData, "bench CSV line " + std::to_string(line_no) + ": " + msg);
  };
  while (!csv.empty()) {
    ++line_no;
    const std::size_t nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kBenchCsvHeader) throw fail("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5) throw fail("expected 5 fields");
    BenchRecord r;
    if (fields[0] == "indexed") r.method = BenchMethod::kIndexed;
    else if (fields[0] == "naive-rescan") r.method = BenchMethod::kNaiveRescan;
    else throw fail("unknown method '" + std::string(fields[0]) + "'");
    auto parse = [&](std::string_view f, auto& value) {
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw fail("bad number '" + std::string(f) + "'");
      }
    };
    parse(fields[1], r.max_tokens);
    parse(fields[2], r.vocab_size);
    parse(fields[3], r.wall_time);
    parse(fields[4], r.per_step_mask_time);
    if (r.wall_time < 0 || r.per_step_mask_time < 0) throw fail("negative time");
    out.push_back(r);
  }
  if (line_no == 0) throw Error(ErrorCategory::kData, "bench CSV is empty");
  return out;
}

}  // namespace guidegen
