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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "grammar_oracle.h"
#include "guidegen/errors.h"
#include "guidegen/grammar_guide.h"
#include "guidegen/logits_provider.h"
#include "guidegen/parser_index.h"
#include "guidegen/utf8.h"
#include "parser_check.h"

namespace guidegen {
namespace {

using testing::ExhaustiveParserCheck;
using testing::GrammarOracle;
using testing::OracleAllowed;
using testing::Tokens;

const std::string kDataDir = GUIDEGEN_DATA_DIR;

class MiniPython : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    machine_ = new GrammarMachine(Grammar::Load(kDataDir + "/mini_python.lark"));
    vocab_ = new Vocabulary(Vocabulary::Load(kDataDir + "/mini_python_vocab.json"));
    index_ = new ParserIndex(ParserIndex::Build(*machine_, *vocab_));
  }
  static void TearDownTestSuite() {
    delete index_;
    delete vocab_;
    delete machine_;
  }

  static TokenId Id(const std::string& text) {
    for (TokenId t = 0; t < vocab_->size(); ++t) {
      if (vocab_->Text(t) == text) return t;
    }
    ADD_FAILURE() << "no token " << text;
    return 0;
  }

  static GrammarMachine* machine_;
  static Vocabulary* vocab_;
  static ParserIndex* index_;
};

GrammarMachine* MiniPython::machine_ = nullptr;
Vocabulary* MiniPython::vocab_ = nullptr;
ParserIndex* MiniPython::index_ = nullptr;

TEST_F(MiniPython, StartConfiguration) {
  const GrammarGuide guide(*machine_, *index_, *vocab_);
  const auto allowed = Tokens(guide.Allowed(machine_->Start()));
  EXPECT_EQ(allowed, (std::vector<TokenId>{Id("d"), Id("ef"), Id(" f"), Id("oo("), Id(" "),
                                           Id("pass")}));
  const ParserConfig config = machine_->ConfigOf(machine_->Start(), 8);
  EXPECT_EQ(config.parse_state, 0);
  EXPECT_TRUE(config.stack_suffix.empty());
  const Grammar& g = machine_->grammar();
  EXPECT_EQ(config.candidate_terminals,
            (std::vector<int>{g.FindTerminal("DEF"), g.FindTerminal("NAME"), g.FindTerminal("WS")}));
}

TEST_F(MiniPython, WalkThrough) {
  const GrammarGuide guide(*machine_, *index_, *vocab_);
  GrammarSession session;
  for (const char* t : {"d", "ef", " f"}) Advance(session, Id(t), guide);
  const auto allowed = Tokens(guide.Allowed(session.cursor));
  EXPECT_EQ(allowed, (std::vector<TokenId>{Id("d"), Id("ef"), Id("oo("), Id(" "), Id("pass")}));
  EXPECT_THROW(Advance(session, Id("):"), guide), ContractViolation);
  EXPECT_THROW(Advance(session, vocab_->eos_id(), guide), ContractViolation);

  for (const char* t : {"oo(", "):", " ", "pass"}) Advance(session, Id(t), guide);
  EXPECT_EQ(Detokenize(*vocab_, session.emitted), "def foo(): pass");
  const auto end = Tokens(guide.Allowed(session.cursor));
  EXPECT_NE(std::find(end.begin(), end.end(), vocab_->eos_id()), end.end());
  Advance(session, vocab_->eos_id(), guide);
  EXPECT_EQ(session.status, SessionStatus::kFinishedEos);
  EXPECT_EQ(session.emitted.size(), 7u);
  EXPECT_THROW(Advance(session, Id("d"), guide), ContractViolation);
}

TEST_F(MiniPython, ExhaustiveAgainstOracle) {
  const GrammarGuide guide(*machine_, *index_, *vocab_);
  const GrammarOracle oracle(machine_->grammar());
  const auto result = ExhaustiveParserCheck(guide, oracle, 7);
  EXPECT_EQ(result.mismatches, 0u) << result.first_mismatch;
  EXPECT_GT(result.configurations, 1000u);
}

TEST_F(MiniPython, IndexShape) {
  // Ending after a second funcdef reduces through nine stack entries.
  for (const auto& node : index_->nodes()) {
    for (const auto& [key, entries] : node.leaves) {
      for (const auto& e : entries) {
        if (e.unindexable) EXPECT_EQ(e.token, vocab_->eos_id());
      }
    }
  }
  ParserIndexOptions deep;
  deep.max_depth = 9;
  EXPECT_EQ(ParserIndex::Build(*machine_, *vocab_, deep).unindexable_count(), 0u);
  EXPECT_GT(index_->entry_count(), 0u);
  EXPECT_LT(index_->Serialize().size(), 1u << 20);
  EXPECT_EQ(index_->grammar_digest(), machine_->grammar().digest());
  EXPECT_EQ(index_->vocab_digest(), vocab_->digest());
  for (std::size_t n = 0; n < index_->node_count(); ++n) {
    for (const auto& [key, entries] : index_->nodes()[n].leaves) {
      for (std::size_t i = 1; i < entries.size(); ++i) {
        EXPECT_LT(entries[i - 1].token, entries[i].token);
      }
    }
    for (const auto& [sym, child] : index_->nodes()[n].children) EXPECT_GT(child, n);
  }
}

TEST_F(MiniPython, SerializationRoundTrip) {
  const auto bytes = index_->Serialize();
  EXPECT_TRUE(IsParserIndexFile(bytes));
  const ParserIndex back = ParserIndex::Deserialize(bytes, &machine_->grammar().digest(),
                                                    &vocab_->digest());
  EXPECT_EQ(back, *index_);
  EXPECT_EQ(back.Serialize(), bytes);
  GrammarMachine again(Grammar::Load(kDataDir + "/mini_python.lark"));
  EXPECT_EQ(ParserIndex::Build(again, *vocab_).Serialize(), bytes);
}

IndexFormatError::Kind DecodeError(std::vector<std::uint8_t> bytes, const Digest* g = nullptr,
                                   const Digest* v = nullptr) {
  try {
    ParserIndex::Deserialize(bytes, g, v);
  } catch (const IndexFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decoded damaged bytes";
  return IndexFormatError::Kind::kCorrupt;
}

TEST_F(MiniPython, DamagedFiles) {
  using Kind = IndexFormatError::Kind;
  const auto bytes = index_->Serialize();
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(DecodeError(bad_magic), Kind::kBadMagic);
  auto bad_version = bytes;
  bad_version[4] ^= 0x7f;
  EXPECT_EQ(DecodeError(bad_version), Kind::kVersionMismatch);
  for (std::size_t cut : {std::size_t{8}, std::size_t{80}, bytes.size() / 2, bytes.size() - 1}) {
    auto truncated = bytes;
    truncated.resize(cut);
    EXPECT_EQ(DecodeError(truncated), Kind::kTruncated) << cut;
  }
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(DecodeError(trailing), Kind::kTrailingBytes);
  Digest other{};
  EXPECT_EQ(DecodeError(bytes, &other, nullptr), Kind::kDigestMismatch);
  EXPECT_EQ(DecodeError(bytes, nullptr, &other), Kind::kDigestMismatch);
}

TEST_F(MiniPython, BindingIsChecked) {
  const Vocabulary other({"a", "</s>"}, 1);
  EXPECT_THROW(GrammarGuide(*machine_, *index_, other), BindingError);
  GrammarMachine expr(Grammar::Parse("A: \"a\"\nstart: A\n"));
  EXPECT_THROW(GrammarGuide(expr, *index_, *vocab_), BindingError);
}

TEST_F(MiniPython, SampledTextIsValid) {
  const GrammarGuide guide(*machine_, *index_, *vocab_);
  const GrammarOracle oracle(machine_->grammar());
  int finished = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SeededUniformProvider provider(vocab_->size(), vocab_->eos_id(), seed);
    SamplingConfig config;
    config.seed = seed;
    config.max_tokens = 24;
    const GrammarSession s = GrammarGuidedSampleTokens(provider, guide, config);
    const std::u32string text = DecodeUtf8(Detokenize(*vocab_, s.emitted));
    ASSERT_NE(s.status, SessionStatus::kDeadEnd);
    if (s.status == SessionStatus::kFinishedEos) {
      ++finished;
      EXPECT_TRUE(oracle.Accepts(text)) << EncodeUtf8(text);
    } else {
      EXPECT_EQ(s.emitted.size(), 24u);
      EXPECT_TRUE(oracle.IsViablePrefix(text)) << EncodeUtf8(text);
    }
  }
  EXPECT_GT(finished, 0);
}

TEST_F(MiniPython, SamplingIsDeterministic) {
  const GrammarGuide guide(*machine_, *index_, *vocab_);
  SamplingConfig config;
  config.seed = 11;
  SeededUniformProvider p1(vocab_->size(), vocab_->eos_id(), 5);
  SeededUniformProvider p2(vocab_->size(), vocab_->eos_id(), 5);
  EXPECT_EQ(GrammarGuidedSampleTokens(p1, guide, config).emitted,
            GrammarGuidedSampleTokens(p2, guide, config).emitted);
}

TEST(ParserIndex, EmptyLanguage) {
  GrammarMachine m(Grammar::Parse("X: \"x\"\nstart: start X\n"));
  const Vocabulary vocab({"x", "xx", "</s>"}, 2);
  const ParserIndex index = ParserIndex::Build(m, vocab);
  EXPECT_EQ(index.entry_count(), 0u);
  EXPECT_EQ(index.node_count(), 1u);
  EXPECT_TRUE(index.Lookup(m.Start()).empty());
  const GrammarGuide guide(m, index, vocab);
  EXPECT_TRUE(guide.Allowed(m.Start()).empty());
  EXPECT_EQ(ParserIndex::Deserialize(index.Serialize()), index);
}

const char* kNested = R"g(
LP: "("
RP: ")"
X: "x"
start: p
p: LP p RP | X
)g";

class Nested : public ::testing::Test {
 protected:
  Nested()
      : machine_(Grammar::Parse(kNested)),
        vocab_({"(", ")", "x", "((", "))", ")))", "))))", "x)", "x))))", "</s>"}, 9) {}

  GrammarMachine machine_;
  Vocabulary vocab_;
};

TEST_F(Nested, ShallowIndexFallsBackToSimulation) {
  ParserIndexOptions options;
  options.max_depth = 2;
  const ParserIndex index = ParserIndex::Build(machine_, vocab_, options);
  EXPECT_GT(index.unindexable_count(), 0u);
  const GrammarGuide guide(machine_, index, vocab_);
  const GrammarOracle oracle(machine_.grammar());
  const auto result = ExhaustiveParserCheck(guide, oracle, 6);
  EXPECT_EQ(result.mismatches, 0u) << result.first_mismatch;
}

TEST_F(Nested, NoFallbackRaises) {
  ParserIndexOptions options;
  options.max_depth = 2;
  const ParserIndex index = ParserIndex::Build(machine_, vocab_, options);
  const GrammarGuide guide(machine_, index, vocab_, GrammarGuideOptions{false});
  ParserCursor cursor = machine_.Start();
  for (const char* piece : {"((", "((", "x"}) {
    const auto d = machine_.Feed(cursor, DecodeUtf8(piece));
    ASSERT_TRUE(d.has_value());
    ApplyDelta(cursor, *d);
  }
  EXPECT_THROW(guide.Allowed(cursor), UnindexableError);
}

TEST_F(Nested, DeepIndexNeedsNoFallback) {
  const ParserIndex index = ParserIndex::Build(machine_, vocab_);
  EXPECT_EQ(index.unindexable_count(), 0u);
  const GrammarGuide guide(machine_, index, vocab_, GrammarGuideOptions{false});
  const GrammarOracle oracle(machine_.grammar());
  const auto result = ExhaustiveParserCheck(guide, oracle, 6);
  EXPECT_EQ(result.mismatches, 0u) << result.first_mismatch;
}

TEST(ParserIndex, ExpressionGrammarAgainstOracle) {
  GrammarMachine m(Grammar::Parse(R"g(
%ignore WS
NUM: /[0-9]+/
PLUS: "+"
TIMES: "*"
LP: "("
RP: ")"
WS: / +/
start: expr
expr: expr PLUS term | term
term: term TIMES factor | factor
factor: NUM | LP expr RP
)g"));
  const Vocabulary vocab({"1", "23", "+", "*", "(", ")", " ", "4 ", "+(", ")*", "1)", "</s>"}, 11);
  const ParserIndex index = ParserIndex::Build(m, vocab);
  const GrammarGuide guide(m, index, vocab);
  const GrammarOracle oracle(m.grammar());
  const auto result = ExhaustiveParserCheck(guide, oracle, 4);
  EXPECT_EQ(result.mismatches, 0u) << result.first_mismatch;
  EXPECT_EQ(ParserIndex::Deserialize(index.Serialize()), index);
}

TEST(ParserCursor, ApplyDelta) {
  ParserCursor c;
  ApplyDelta(c, CursorDelta{0, {4, 5}, 3});
  EXPECT_EQ(c.stack, (std::vector<int>{0, 4, 5}));
  EXPECT_EQ(c.scanner_state, 3);
  ApplyDelta(c, CursorDelta{2, {7}, 0});
  EXPECT_EQ(c.stack, (std::vector<int>{0, 7}));
  EXPECT_THROW(ApplyDelta(c, CursorDelta{2, {}, 0}), UsageError);
}

}  // namespace
}  // namespace guidegen
