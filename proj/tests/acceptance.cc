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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "grammar_oracle.h"
#include "guidegen/bench.h"
#include "guidegen/errors.h"
#include "guidegen/grammar_guide.h"
#include "guidegen/logits_provider.h"
#include "guidegen/parser_index.h"
#include "guidegen/sampling.h"
#include "guidegen/vocab_index.h"
#include "parser_check.h"
#include "pda_check.h"
#include "test_util.h"

namespace guidegen {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double Elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::set<std::string> AllowedTexts(const StateVocabIndex& index, const Vocabulary& vocab,
                                   StateId state) {
  std::set<std::string> out;
  for (const auto& e : index.Allowed(state)) out.insert(vocab.Text(e.token));
  return out;
}

Outcome DecimalNumberMasks() {
  const auto t0 = Clock::now();
  const Fsm fsm = CompileRegex(R"(([0-9]*)?\.?[0-9]*)");
  const Vocabulary vocab({"A", ".", "42", ".2", "1", "</s>"}, 5);
  const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
  const std::set<std::string> all_but_a = {".", "42", ".2", "1"};
  const bool start_ok = AllowedTexts(index, vocab, 0) == all_but_a;
  const StateId after_point_two = index.EndState(0, 3);
  const bool digits_ok = after_point_two != kNoState &&
                         AllowedTexts(index, vocab, after_point_two) ==
                             std::set<std::string>{"42", "1"};
  const StateId after_one = index.EndState(0, 4);
  const bool unchanged_ok = after_one != kNoState && AllowedTexts(index, vocab, after_one) == all_but_a;
  const double secs = Elapsed(t0);
  return {start_ok && digits_ok && unchanged_ok && secs < 1.0,
          "start " + std::string(start_ok ? "ok" : "wrong") + ", after \".2\" " +
              (digits_ok ? "ok" : "wrong") + ", after \"1\" " + (unchanged_ok ? "ok" : "wrong") +
              ", " + Fixed(secs) + " s"};
}

Outcome NameSubSequences() {
  const Fsm fsm = CompileRegex(R"([^\W\d]\w*)", {.minimize = false});
  testing::HandFsm ref;
  ref.delta.resize(3);
  ref.delta[0] = {{U'f', 1}, {U'_', 1}};
  ref.delta[1] = {{U'f', 2}, {U'7', 2}, {U'_', 2}};
  ref.delta[2] = {{U'f', 2}, {U'7', 2}, {U'_', 2}};
  ref.finals = {1, 2};
  const std::vector<int> pi = testing::FindBijection(fsm, ref, U"f7_ é");
  if (pi.empty()) return {false, "no state bijection with the reference automaton"};
  std::set<std::pair<int, int>> got;
  for (const auto& path : FindSubSequences(fsm, U"f")) {
    if (path.size() != 2) return {false, "path of wrong length"};
    got.insert({pi[path[0]], pi[path[1]]});
  }
  const std::set<std::pair<int, int>> want = {{0, 1}, {1, 2}, {2, 2}};
  std::string s;
  for (const auto& [a, b] : got) s += "(" + std::to_string(a) + "," + std::to_string(b) + ")";
  return {got == want, "sequences " + s};
}

Outcome OracleSuite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t cells = 0, bad = 0;
  for (const auto& pattern : testing::RegexPool()) {
    const Fsm fsm = CompileRegex(pattern);
    for (int v = 0; v < 20; ++v) {
      const Vocabulary vocab = testing::RandomVocabulary(20 + rng() % 181, rng());
      const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
      for (StateId s = 0; s < fsm.num_states(); ++s) {
        std::vector<TokenTransition> expected;
        for (TokenId t = 0; t < vocab.size(); ++t) {
          if (t == vocab.eos_id()) continue;
          const StateId end = testing::WalkByStep(fsm, s, vocab.CodePoints(t));
          if (end != kNoState) expected.push_back({t, end});
        }
        const auto got = index.Allowed(s);
        ++cells;
        bad += std::vector<TokenTransition>(got.begin(), got.end()) != expected;
      }
    }
  }
  const double secs = Elapsed(t0);
  return {bad == 0 && secs < 60.0, std::to_string(cells - bad) + "/" + std::to_string(cells) +
                                       " cells equal, " + Fixed(secs) + " s"};
}

Outcome CompletionSoundness() {
  const auto& pool = testing::RegexPool();
  int runs = 0, finished = 0, failures = 0;
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const Fsm fsm = CompileRegex(pool[r]);
    const Vocabulary vocab = testing::CompletionVocabulary(60, r);
    const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SeededUniformProvider provider(vocab.size(), vocab.eos_id(), seed);
      SamplingConfig config;
      config.seed = seed;
      config.max_tokens = 40;
      const auto session = GuidedSampleTokens(provider, index, fsm, vocab, config);
      ++runs;
      if (session.status == SessionStatus::kFinishedEos) {
        ++finished;
        failures += !testing::ReferenceFullMatch(pool[r], Detokenize(vocab, session.emitted));
      } else if (session.status != SessionStatus::kFinishedMaxTokens) {
        ++failures;
      }
    }
  }
  return {runs == 1000 && failures == 0 && finished > 0,
          std::to_string(runs) + " runs, " + std::to_string(finished) + " finished-eos, " +
              std::to_string(failures) + " failures"};
}

// Least-squares slope of log(y) against log(x).
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

// Superlinear growth: wall time ~ L^k with k at least this.
constexpr double kMinNaiveSlope = 1.25;

Outcome Scaling() {
  const auto t0 = Clock::now();
  BenchOptions small;
  small.regex = R"((\w+[ .,:;-]?)*)";
  small.vocab_sizes = {1000};
  small.max_tokens = {50, 100, 200, 400};
  small.reps = 5;
  BenchOptions large = small;
  large.vocab_sizes = {50000};
  large.max_tokens = {50};
  auto records = RunBench(small);
  for (const auto& r : RunBench(large)) records.push_back(r);

  auto find = [&](BenchMethod m, std::size_t n, int l) {
    for (const auto& r : records) {
      if (r.method == m && r.vocab_size == n && r.max_tokens == l) return r;
    }
    return BenchRecord{};
  };
  const double idx_ratio = find(BenchMethod::kIndexed, 50000, 50).per_step_mask_time /
                           find(BenchMethod::kIndexed, 1000, 50).per_step_mask_time;
  const double naive_ratio = find(BenchMethod::kNaiveRescan, 50000, 50).per_step_mask_time /
                             find(BenchMethod::kNaiveRescan, 1000, 50).per_step_mask_time;
  std::vector<double> ls, walls;
  for (int l : small.max_tokens) {
    ls.push_back(l);
    walls.push_back(find(BenchMethod::kNaiveRescan, 1000, l).wall_time);
  }
  const double slope = LogLogSlope(ls, walls);
  const double secs = Elapsed(t0);
  return {idx_ratio <= 2.0 && naive_ratio >= 20.0 && slope >= kMinNaiveSlope && secs < 600.0,
          "indexed ratio " + Fixed(idx_ratio, 2) + " (<= 2), naive ratio " + Fixed(naive_ratio, 1) +
              " (>= 20), naive wall-time slope " + Fixed(slope, 2) + " (>= " +
              Fixed(kMinNaiveSlope, 2) + "), " + Fixed(secs, 1) + " s"};
}

Outcome GrammarWalkThrough(const std::string& data_dir) {
  const GrammarMachine machine(Grammar::Load(data_dir + "/mini_python.lark"));
  const Vocabulary vocab = Vocabulary::Load(data_dir + "/mini_python_vocab.json");
  const ParserIndex index = ParserIndex::Build(machine, vocab);
  const GrammarGuide guide(machine, index, vocab);
  auto id = [&](const std::string& text) {
    for (TokenId t = 0; t < vocab.size(); ++t) {
      if (vocab.Text(t) == text) return t;
    }
    return vocab.eos_id();
  };
  GrammarSession session;
  for (const char* t : {"d", "ef", " f"}) Advance(session, id(t), guide);
  const auto allowed = testing::Tokens(guide.Allowed(session.cursor));
  auto has = [&](const std::string& t) {
    return std::find(allowed.begin(), allowed.end(), id(t)) != allowed.end();
  };
  const bool set_ok = has("d") && has("ef") && has("pass") && has(" ") && has("oo(") && !has("):");
  for (const char* t : {"oo(", "):", " ", "pass"}) Advance(session, id(t), guide);
  const bool text_ok = Detokenize(vocab, session.emitted) == "def foo(): pass";
  const auto end = testing::Tokens(guide.Allowed(session.cursor));
  const bool accept_ok = machine.CanFinish(session.cursor) &&
                         std::find(end.begin(), end.end(), vocab.eos_id()) != end.end();
  const testing::GrammarOracle oracle(machine.grammar());
  const auto check = testing::ExhaustiveParserCheck(guide, oracle, 7);
  std::string detail = std::string("after \"def f\" ") + (set_ok ? "ok" : "wrong") +
                       ", \"def foo(): pass\" " + (text_ok && accept_ok ? "accepted" : "rejected") +
                       ", " + std::to_string(check.configurations) +
                       " configurations checked, " + std::to_string(check.mismatches) +
                       " mismatches";
  if (check.mismatches) detail += " (first: " + check.first_mismatch + ")";
  return {set_ok && text_ok && accept_ok && check.mismatches == 0, detail};
}

Outcome PdaPreimage() {
  std::mt19937_64 rng(7);
  int automata = 0, bad = 0;
  for (int i = 0; i < 500; ++i) {
    const Pda pda = testing::RandomPda(rng, 50);
    ++automata;
    bad += !testing::PreimageMatchesBruteForce(pda, rng);
  }
  int from_grammars = 0;
  for (int attempt = 0; attempt < 4000 && from_grammars < 200; ++attempt) {
    auto g = testing::RandomGrammar(rng);
    if (!g) continue;
    std::optional<LalrTables> tables;
    try {
      tables.emplace(*g);
    } catch (const ConflictError&) {
      continue;
    }
    const Pda pda = BuildParserPda(*tables);
    if (pda.num_states() > 50) continue;
    ++from_grammars;
    bad += !testing::PreimageMatchesBruteForce(pda, rng);
  }
  automata += from_grammars;
  return {bad == 0 && from_grammars > 0,
          std::to_string(automata - bad) + "/" + std::to_string(automata) +
              " automata agree (" + std::to_string(from_grammars) + " from LALR(1) grammars)"};
}

Outcome IndexRoundTrip(const std::string& data_dir) {
  int checked = 0, bad = 0;
  const Vocabulary v1 = Vocabulary::Load(data_dir + "/decimal_vocab.json");
  for (const auto& pattern : testing::RegexPool()) {
    const Fsm fsm = CompileRegex(pattern);
    for (const Vocabulary* vocab : {&v1}) {
      const StateVocabIndex a = StateVocabIndex::Build(fsm, *vocab);
      const auto bytes = a.Serialize();
      const Digest d = FsmDigest(fsm);
      const StateVocabIndex back = StateVocabIndex::Deserialize(bytes, &d, &vocab->digest());
      const StateVocabIndex again = StateVocabIndex::Build(CompileRegex(pattern), *vocab);
      ++checked;
      bad += !(back == a) || back.Serialize() != bytes || again.Serialize() != bytes;
    }
  }
  const Vocabulary pool_vocab = testing::RandomVocabulary(200, 5);
  for (const auto& pattern : testing::RegexPool()) {
    const Fsm fsm = CompileRegex(pattern);
    const StateVocabIndex a = StateVocabIndex::Build(fsm, pool_vocab);
    const auto bytes = a.Serialize();
    ++checked;
    bad += !(StateVocabIndex::Deserialize(bytes) == a) ||
           StateVocabIndex::Build(CompileRegex(pattern), pool_vocab).Serialize() != bytes;
  }
  const Vocabulary mv = Vocabulary::Load(data_dir + "/mini_python_vocab.json");
  const GrammarMachine m1(Grammar::Load(data_dir + "/mini_python.lark"));
  const GrammarMachine m2(Grammar::Load(data_dir + "/mini_python.lark"));
  const ParserIndex p = ParserIndex::Build(m1, mv);
  const auto pbytes = p.Serialize();
  ++checked;
  bad += !(ParserIndex::Deserialize(pbytes, &m1.grammar().digest(), &mv.digest()) == p) ||
         ParserIndex::Build(m2, mv).Serialize() != pbytes;
  return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                        " indexes round-trip and recompile byte-identically"};
}

int Main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : GUIDEGEN_DATA_DIR;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"decimal-number masks", DecimalNumberMasks},
      {"name-automaton sub-sequences", NameSubSequences},
      {"oracle equivalence suite", OracleSuite},
      {"completion soundness", CompletionSoundness},
      {"scaling reproduction", Scaling},
      {"grammar walk-through", [&] { return GrammarWalkThrough(data_dir); }},
      {"pda preimage", PdaPreimage},
      {"index round-trip", [&] { return IndexRoundTrip(data_dir); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}

}  // namespace
}  // namespace guidegen

int main(int argc, char** argv) { return guidegen::Main(argc, argv); }
