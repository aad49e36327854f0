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

#include "cli.h"

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "guidegen/bench.h"
#include "guidegen/errors.h"
#include "guidegen/fsm.h"
#include "guidegen/grammar.h"
#include "guidegen/grammar_guide.h"
#include "guidegen/io.h"
#include "guidegen/logits_provider.h"
#include "guidegen/parser_index.h"
#include "guidegen/sampling.h"
#include "guidegen/vocab_index.h"
#include "guidegen/vocabulary.h"

namespace guidegen {
namespace {

constexpr char kDefaultBenchRegex[] = R"((\w+[ .,:;-]?)*)";

struct CompileArgs {
  std::string regex;
  std::string grammar;
  std::string vocab;
  std::string out;
  int threads = 1;
  int max_depth = 8;
};

struct GenerateArgs {
  std::string regex;
  std::string grammar;
  std::string vocab;
  std::string index;
  std::string provider = "builtin:seeded-uniform";
  std::uint64_t seed = 0;
  int max_tokens = 32;
  double temperature = 1.0;
  std::string strategy = "multinomial";
  double timeout = 10.0;
  bool no_fallback = false;
};

struct BenchArgs {
  std::string regex = kDefaultBenchRegex;
  std::vector<std::size_t> vocab_sizes{1000, 50000};
  std::vector<int> max_tokens{50, 100, 200, 400};
  std::uint64_t seed = 0;
  int reps = 5;
  std::string provider = "builtin:seeded-uniform";
  std::string out;
};

struct InspectArgs {
  std::string index;
  std::string vocab;
};

std::string Quoted(const std::string& s) { return nlohmann::json(s).dump(); }

void RequireOneSource(const std::string& regex, const std::string& grammar) {
  if (regex.empty() == grammar.empty()) {
    throw UsageError("exactly one of --regex or --grammar is required");
  }
}

int RunCompile(const CompileArgs& a, std::ostream& out) {
  RequireOneSource(a.regex, a.grammar);
  const Vocabulary vocab = Vocabulary::Load(a.vocab);
  std::vector<std::uint8_t> bytes;
  if (!a.regex.empty()) {
    const Fsm fsm = CompileRegex(a.regex);
    IndexBuildOptions options;
    options.threads = a.threads;
    const StateVocabIndex index = StateVocabIndex::Build(fsm, vocab, options);
    bytes = index.Serialize();
    out << "compiled regex index: " << index.num_states() << " states, "
        << index.entry_count() << " entries\n";
  } else {
    const GrammarMachine machine(Grammar::Load(a.grammar));
    ParserIndexOptions options;
    options.max_depth = a.max_depth;
    const ParserIndex index = ParserIndex::Build(machine, vocab, options);
    bytes = index.Serialize();
    out << "compiled parser index: " << machine.tables().num_states() << " parser states, "
        << index.node_count() << " nodes, " << index.entry_count() << " entries\n";
  }
  WriteBinaryFile(a.out, bytes);
  out << "wrote " << a.out << " (" << bytes.size() << " bytes)\n";
  return kExitOk;
}

int RunGenerate(const GenerateArgs& a, std::ostream& out) {
  RequireOneSource(a.regex, a.grammar);
  SamplingConfig config;
  config.max_tokens = a.max_tokens;
  config.temperature = a.temperature;
  config.seed = a.seed;
  config.strategy = a.strategy == "greedy" ? SamplingStrategy::kGreedy
                                           : SamplingStrategy::kMultinomial;
  config.Validate();

  const Vocabulary vocab = Vocabulary::Load(a.vocab);
  const auto bytes = ReadBinaryFile(a.index);
  std::string text;
  SessionStatus status;
  if (!a.regex.empty()) {
    const Fsm fsm = CompileRegex(a.regex);
    if (IsParserIndexFile(bytes)) throw BindingError(a.index + " is a parser index; use --grammar");
    const Digest fsm_digest = FsmDigest(fsm);
    const StateVocabIndex index = StateVocabIndex::Deserialize(bytes, &fsm_digest, &vocab.digest());
    auto provider = MakeProvider(a.provider, vocab, a.seed, a.timeout);
    const GenerationSession session = GuidedSampleTokens(*provider, index, fsm, vocab, config);
    text = Detokenize(vocab, session.emitted);
    status = session.status;
  } else {
    const GrammarMachine machine(Grammar::Load(a.grammar));
    const ParserIndex index =
        ParserIndex::Deserialize(bytes, &machine.grammar().digest(), &vocab.digest());
    GrammarGuideOptions options;
    options.fallback = !a.no_fallback;
    const GrammarGuide guide(machine, index, vocab, options);
    auto provider = MakeProvider(a.provider, vocab, a.seed, a.timeout);
    const GrammarSession session = GrammarGuidedSampleTokens(*provider, guide, config);
    text = Detokenize(vocab, session.emitted);
    status = session.status;
  }
  out << text << "\n";
  out << "status: " << ToString(status) << "\n";
  return kExitOk;
}

int RunBenchCommand(const BenchArgs& a, std::ostream& out) {
  if (a.provider != "builtin:seeded-uniform") {
    throw UsageError("bench only supports --provider builtin:seeded-uniform");
  }
  BenchOptions options;
  options.regex = a.regex;
  options.vocab_sizes = a.vocab_sizes;
  options.max_tokens = a.max_tokens;
  options.seed = a.seed;
  options.reps = a.reps;
  const std::string csv = FormatBenchCsv(RunBench(options));
  if (a.out.empty()) {
    out << csv;
  } else {
    WriteBinaryFile(a.out, std::vector<std::uint8_t>(csv.begin(), csv.end()));
    out << "wrote " << a.out << "\n";
  }
  return kExitOk;
}

void InspectRegexIndex(const StateVocabIndex& index, const Vocabulary* vocab, std::ostream& out) {
  out << "kind: regex index\n";
  out << "fsm digest: " << DigestHex(index.fsm_digest()) << "\n";
  out << "vocab digest: " << DigestHex(index.vocab_digest()) << "\n";
  out << "states: " << index.num_states() << "\n";
  for (StateId s = 0; s < index.num_states(); ++s) {
    const auto allowed = index.Allowed(s);
    out << "state " << s << ": " << allowed.size() << " tokens";
    if (vocab != nullptr && !allowed.empty()) {
      out << " [";
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        out << (i ? ", " : "") << Quoted(vocab->Text(allowed[i].token)) << " -> "
            << allowed[i].end;
      }
      out << "]";
    }
    out << "\n";
  }
  out << "total: " << index.entry_count() << " entries\n";
}

void InspectParserIndex(const ParserIndex& index, const Vocabulary* vocab, std::ostream& out) {
  out << "kind: parser index\n";
  out << "grammar digest: " << DigestHex(index.grammar_digest()) << "\n";
  out << "vocab digest: " << DigestHex(index.vocab_digest()) << "\n";
  out << "max depth: " << index.max_depth() << "\n";
  out << "nodes: " << index.node_count() << "\n";
  std::vector<int> depth(index.node_count(), 0);
  for (std::size_t n = 0; n < index.node_count(); ++n) {
    for (const auto& [sym, child] : index.nodes()[n].children) depth[child] = depth[n] + 1;
  }
  for (std::size_t n = 0; n < index.node_count(); ++n) {
    for (const auto& [key, entries] : index.nodes()[n].leaves) {
      out << "node " << n << " depth " << depth[n] << " state " << key.first << " scanner "
          << key.second << ": " << entries.size() << " tokens";
      if (vocab != nullptr) {
        out << " [";
        for (std::size_t i = 0; i < entries.size(); ++i) {
          out << (i ? ", " : "") << Quoted(vocab->Text(entries[i].token));
          if (entries[i].unindexable) out << " (unindexable)";
        }
        out << "]";
      }
      out << "\n";
    }
  }
  out << "unindexable: " << index.unindexable_count() << "\n";
  out << "total: " << index.entry_count() << " entries\n";
}

int RunInspect(const InspectArgs& a, std::ostream& out) {
  const auto bytes = ReadBinaryFile(a.index);
  std::optional<Vocabulary> vocab;
  if (!a.vocab.empty()) vocab.emplace(Vocabulary::Load(a.vocab));
  const Digest* expected_vocab = vocab ? &vocab->digest() : nullptr;
  if (IsParserIndexFile(bytes)) {
    InspectParserIndex(ParserIndex::Deserialize(bytes, nullptr, expected_vocab),
                       vocab ? &*vocab : nullptr, out);
  } else {
    InspectRegexIndex(StateVocabIndex::Deserialize(bytes, nullptr, expected_vocab),
                      vocab ? &*vocab : nullptr, out);
  }
  return kExitOk;
}

int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage: return kExitUsage;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kRuntime: return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guided generation with regex and grammar indexes", "guidegen"};
  app.require_subcommand(1);

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Build a token index for a regex or grammar");
  c->add_option("--regex", compile.regex, "Regular expression");
  c->add_option("--grammar", compile.grammar, "Grammar file");
  c->add_option("--vocab", compile.vocab, "Vocabulary JSON")->required();
  c->add_option("--out", compile.out, "Output index path")->required();
  c->add_option("--threads", compile.threads, "Index build threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--max-depth", compile.max_depth, "Stack context of the parser index")
      ->check(CLI::NonNegativeNumber);

  GenerateArgs generate;
  auto* g = app.add_subcommand("generate", "Sample text under an index");
  g->add_option("--regex", generate.regex, "Regular expression the index was built from");
  g->add_option("--grammar", generate.grammar, "Grammar file the index was built from")
      ;
  g->add_option("--vocab", generate.vocab, "Vocabulary JSON")->required();
  g->add_option("--index", generate.index, "Index file")->required();
  g->add_option("--provider", generate.provider,
                "builtin:seeded-uniform, builtin:adversarial or http:<url>");
  g->add_option("--seed", generate.seed, "Sampling seed");
  g->add_option("--max-tokens", generate.max_tokens, "Maximum number of tokens");
  g->add_option("--temperature", generate.temperature, "Softmax temperature");
  g->add_option("--strategy", generate.strategy, "multinomial or greedy")
      ->check(CLI::IsMember({"multinomial", "greedy"}));
  g->add_option("--timeout", generate.timeout, "HTTP provider timeout in seconds");
  g->add_flag("--no-fallback", generate.no_fallback,
              "Fail instead of simulating tokens the parser index cannot resolve");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Compare indexed masking against rescanning");
  b->add_option("--regex", bench.regex, "Regular expression")->capture_default_str();
  b->add_option("--vocab-sizes", bench.vocab_sizes, "Comma-separated vocabulary sizes")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--max-tokens", bench.max_tokens, "Comma-separated max_tokens values")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--seed", bench.seed, "Seed for vocabularies and sampling");
  b->add_option("--reps", bench.reps, "Repetitions per cell (median is reported)");
  b->add_option("--provider", bench.provider, "Score provider (builtin:seeded-uniform only)");
  b->add_option("--out", bench.out, "CSV output path (default stdout)");

  InspectArgs inspect;
  auto* i = app.add_subcommand("inspect", "Describe an index file");
  i->add_option("--index", inspect.index, "Index file")->required();
  i->add_option("--vocab", inspect.vocab, "Vocabulary JSON, to print token strings");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return RunCompile(compile, out);
    if (g->parsed()) return RunGenerate(generate, out);
    if (b->parsed()) return RunBenchCommand(bench, out);
    return RunInspect(inspect, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace guidegen
