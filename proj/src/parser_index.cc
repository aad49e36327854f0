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

#include "guidegen/parser_index.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "guidegen/errors.h"
#include "guidegen/io.h"

namespace guidegen {
namespace {

constexpr char kMagic[4] = {'G', 'G', 'P', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

enum class Sim { kOk, kFail, kNeedDeeper };

// LR stack that may only know its topmost entries. Touching anything below
// the known part reports kNeedDeeper; `floor` tracks the lowest height
// reached so the net effect can be expressed as pops plus pushes.
struct SimStack {
  explicit SimStack(std::vector<int> init) : items(std::move(init)), initial(items.size()), floor(items.size()) {}

  std::vector<int> items;
  std::size_t initial;
  std::size_t floor;

  bool Pop() {
    if (items.empty()) return false;
    items.pop_back();
    floor = std::min(floor, items.size());
    return true;
  }

  CursorDelta Delta(StateId scan) const {
    CursorDelta d;
    d.pops = static_cast<std::uint32_t>(initial - floor);
    d.pushed.assign(items.begin() + static_cast<std::ptrdiff_t>(floor), items.end());
    d.scanner_state = scan;
    return d;
  }
};

class Simulator {
 public:
  Simulator(const Grammar& grammar, const LalrTables& tables, const ScannerTable& scanners)
      : grammar_(grammar), tables_(tables), scanners_(scanners) {}

  // Runs the LR driver on one terminal until it is shifted (or accepted, for
  // the end marker).
  Sim FeedTerminal(SimStack& st, int terminal) const {
    for (;;) {
      if (st.items.empty()) return Sim::kNeedDeeper;
      const LrAction& a = tables_.Action(st.items.back(), terminal);
      switch (a.kind) {
        case LrAction::Kind::kError:
          return Sim::kFail;
        case LrAction::Kind::kShift:
          st.items.push_back(a.value);
          return Sim::kOk;
        case LrAction::Kind::kAccept:
          return Sim::kOk;
        case LrAction::Kind::kReduce: {
          const Production& p = tables_.production(a.value);
          for (std::size_t i = 0; i < p.rhs.size(); ++i) {
            if (!st.Pop()) return Sim::kNeedDeeper;
          }
          if (st.items.empty()) return Sim::kNeedDeeper;
          const int next = tables_.Goto(st.items.back(), p.lhs);
          if (next < 0) return Sim::kFail;
          st.items.push_back(next);
          break;
        }
      }
    }
  }

  // Emits the terminal completed at `scan`, if any.
  Sim EmitLexeme(SimStack& st, StateId scan) const {
    const CombinedFsm& cf = scanners_.ForState(st.items.back());
    const int terminal = cf.completed[scan];
    if (terminal < 0) return Sim::kFail;
    if (grammar_.terminals()[terminal].ignored) return Sim::kOk;
    return FeedTerminal(st, terminal);
  }

  Sim FeedText(SimStack& st, StateId& scan, std::u32string_view text) const {
    for (char32_t c : text) {
      if (st.items.empty()) return Sim::kNeedDeeper;
      const StateId next = scanners_.ForState(st.items.back()).fsm.Next(scan, c);
      if (next != kNoState) {
        scan = next;
        continue;
      }
      if (scan == 0) return Sim::kFail;
      const Sim emitted = EmitLexeme(st, scan);
      if (emitted != Sim::kOk) return emitted;
      if (st.items.empty()) return Sim::kNeedDeeper;
      scan = scanners_.ForState(st.items.back()).fsm.Next(0, c);
      if (scan == kNoState) return Sim::kFail;
    }
    return Sim::kOk;
  }

  // Whether the unfinished lexeme can still be consumed by the parser.
  Sim Viable(const SimStack& st, StateId scan) const {
    if (scan == 0) return Sim::kOk;
    if (st.items.empty()) return Sim::kNeedDeeper;
    for (int v : scanners_.ForState(st.items.back()).Candidates(scan)) {
      if (grammar_.terminals()[v].ignored) return Sim::kOk;
      SimStack copy = st;
      const Sim r = FeedTerminal(copy, v);
      if (r != Sim::kFail) return r;
    }
    return Sim::kFail;
  }

  Sim Finish(SimStack st, StateId scan) const {
    if (scan != 0) {
      if (st.items.empty()) return Sim::kNeedDeeper;
      const Sim r = EmitLexeme(st, scan);
      if (r != Sim::kOk) return r;
    }
    return FeedTerminal(st, tables_.end_marker());
  }

  // Token consumption followed by the viability check.
  Sim Token(SimStack& st, StateId& scan, std::u32string_view text) const {
    const Sim r = FeedText(st, scan, text);
    if (r != Sim::kOk) return r;
    return Viable(st, scan);
  }

 private:
  const Grammar& grammar_;
  const LalrTables& tables_;
  const ScannerTable& scanners_;
};

}  // namespace

void ApplyDelta(ParserCursor& cursor, const CursorDelta& delta) {
  if (delta.pops >= cursor.stack.size()) {
    throw UsageError("cursor delta pops the stack bottom");
  }
  cursor.stack.resize(cursor.stack.size() - delta.pops);
  cursor.stack.insert(cursor.stack.end(), delta.pushed.begin(), delta.pushed.end());
  cursor.scanner_state = delta.scanner_state;
}

GrammarMachine::GrammarMachine(Grammar grammar)
    : grammar_(std::make_unique<const Grammar>(std::move(grammar))),
      tables_(*grammar_),
      pda_(BuildParserPda(tables_)),
      scanners_(*grammar_, tables_) {}

ParserConfig GrammarMachine::ConfigOf(const ParserCursor& cursor, int depth) const {
  ParserConfig c;
  c.parse_state = cursor.stack.back();
  c.scanner_state = cursor.scanner_state;
  c.candidate_terminals = Combined(c.parse_state).Candidates(cursor.scanner_state);
  for (int i = static_cast<int>(cursor.stack.size()) - 2;
       i >= 0 && static_cast<int>(c.stack_suffix.size()) < depth; --i) {
    c.stack_suffix.push_back(cursor.stack[i]);
  }
  return c;
}

std::optional<CursorDelta> GrammarMachine::Feed(const ParserCursor& cursor,
                                                std::u32string_view text) const {
  const Simulator sim(*grammar_, tables_, scanners_);
  SimStack st(cursor.stack);
  StateId scan = cursor.scanner_state;
  if (sim.Token(st, scan, text) != Sim::kOk) return std::nullopt;
  return st.Delta(scan);
}

bool GrammarMachine::CanFinish(const ParserCursor& cursor) const {
  const Simulator sim(*grammar_, tables_, scanners_);
  return sim.Finish(SimStack(cursor.stack), cursor.scanner_state) == Sim::kOk;
}

bool GrammarMachine::IsViablePrefix(std::u32string_view text) const {
  return Feed(Start(), text).has_value();
}

bool GrammarMachine::Accepts(std::u32string_view text) const {
  auto delta = Feed(Start(), text);
  if (!delta) return false;
  ParserCursor cursor = Start();
  ApplyDelta(cursor, *delta);
  return CanFinish(cursor);
}

// ---------------------------------------------------------------------------

std::uint32_t ParserIndex::NodeFor(std::span<const int> suffix) {
  std::uint32_t node = 0;
  for (int s : suffix) {
    auto it = nodes_[node].children.find(s);
    if (it == nodes_[node].children.end()) {
      const auto id = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].children.emplace(s, id);
      nodes_.emplace_back();
      node = id;
    } else {
      node = it->second;
    }
  }
  return node;
}

ParserIndex ParserIndex::Build(const GrammarMachine& machine, const Vocabulary& vocab,
                               const ParserIndexOptions& options) {
  if (options.max_depth < 0) throw UsageError("max_depth must be non-negative");
  ParserIndex index;
  index.max_depth_ = options.max_depth;
  index.grammar_digest_ = machine.grammar().digest();
  index.vocab_digest_ = vocab.digest();
  index.nodes_.emplace_back();
  if (machine.grammar().IsEmptyLanguage()) return index;

  const Simulator sim(machine.grammar(), machine.tables(), machine.scanners());
  const LalrTables& tables = machine.tables();
  std::vector<int> assumed;  // nearest first

  // Explores ever deeper assumed stack suffixes until the outcome of
  // `run` no longer depends on unknown entries.
  auto explore = [&](auto&& self, int top, StateId scan, TokenId token, auto&& run) -> void {
    std::vector<int> init(assumed.rbegin(), assumed.rend());
    init.push_back(top);
    SimStack st(std::move(init));
    StateId end_scan = scan;
    const Sim r = run(st, end_scan);
    if (r == Sim::kFail) return;
    if (r == Sim::kOk) {
      Entry e;
      e.token = token;
      if (token != vocab.eos_id()) e.delta = st.Delta(end_scan);
      const std::uint32_t node = index.NodeFor(assumed);
      index.nodes_[node].leaves[{top, scan}].push_back(std::move(e));
      return;
    }
    if (static_cast<int>(assumed.size()) == options.max_depth) {
      Entry e;
      e.token = token;
      e.unindexable = true;
      const std::uint32_t node = index.NodeFor(assumed);
      index.nodes_[node].leaves[{top, scan}].push_back(std::move(e));
      return;
    }
    const int deepest = assumed.empty() ? top : assumed.back();
    for (int p : tables.Predecessors(deepest)) {
      assumed.push_back(p);
      self(self, top, scan, token, run);
      assumed.pop_back();
    }
  };

  for (int g = 0; g < tables.num_states(); ++g) {
    const CombinedFsm& cf = machine.Combined(g);
    for (StateId s = 0; s < cf.fsm.num_states(); ++s) {
      for (TokenId t = 0; t < vocab.size(); ++t) {
        if (t == vocab.eos_id()) {
          explore(explore, g, s, t, [&](SimStack& st, StateId& scan) {
            return sim.Finish(st, scan);
          });
          continue;
        }
        const std::u32string_view text = vocab.CodePoints(t);
        if (cf.completed[s] < 0 && cf.fsm.Next(s, text[0]) == kNoState) continue;
        explore(explore, g, s, t, [&](SimStack& st, StateId& scan) {
          return sim.Token(st, scan, text);
        });
      }
    }
  }
  return index;
}

std::vector<const ParserIndex::Entry*> ParserIndex::Lookup(const ParserCursor& cursor) const {
  std::vector<const Entry*> out;
  const int top = cursor.stack.back();
  const std::pair<int, StateId> key{top, cursor.scanner_state};
  std::uint32_t node = 0;
  int i = static_cast<int>(cursor.stack.size()) - 2;
  for (int depth = 0;; ++depth) {
    auto leaf = nodes_[node].leaves.find(key);
    if (leaf != nodes_[node].leaves.end()) {
      for (const Entry& e : leaf->second) out.push_back(&e);
    }
    if (i < 0 || depth == max_depth_) break;
    auto child = nodes_[node].children.find(cursor.stack[i--]);
    if (child == nodes_[node].children.end()) break;
    node = child->second;
  }
  std::sort(out.begin(), out.end(), [](const Entry* a, const Entry* b) { return a->token < b->token; });
  return out;
}

std::size_t ParserIndex::entry_count() const {
  std::size_t n = 0;
  for (const Node& node : nodes_) {
    for (const auto& [key, entries] : node.leaves) n += entries.size();
  }
  return n;
}

std::size_t ParserIndex::unindexable_count() const {
  std::size_t n = 0;
  for (const Node& node : nodes_) {
    for (const auto& [key, entries] : node.leaves) {
      n += static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [](const Entry& e) { return e.unindexable; }));
    }
  }
  return n;
}

std::vector<std::uint8_t> ParserIndex::Serialize() const {
  ByteWriter w;
  w.Raw(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.U32(kFormatVersion);
  w.Raw(grammar_digest_);
  w.Raw(vocab_digest_);
  w.U32(static_cast<std::uint32_t>(max_depth_));
  w.U32(static_cast<std::uint32_t>(nodes_.size()));
  for (const Node& node : nodes_) {
    w.U32(static_cast<std::uint32_t>(node.children.size()));
    for (const auto& [sym, child] : node.children) {
      w.U32(static_cast<std::uint32_t>(sym));
      w.U32(child);
    }
    w.U32(static_cast<std::uint32_t>(node.leaves.size()));
    for (const auto& [key, entries] : node.leaves) {
      w.U32(static_cast<std::uint32_t>(key.first));
      w.U32(static_cast<std::uint32_t>(key.second));
      w.U32(static_cast<std::uint32_t>(entries.size()));
      for (const Entry& e : entries) {
        w.U32(e.token);
        w.U32(e.unindexable ? 1 : 0);
        w.U32(e.delta.pops);
        w.U32(static_cast<std::uint32_t>(e.delta.scanner_state));
        w.U32(static_cast<std::uint32_t>(e.delta.pushed.size()));
        for (int s : e.delta.pushed) w.U32(static_cast<std::uint32_t>(s));
      }
    }
  }
  return w.Take();
}

bool IsParserIndexFile(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

ParserIndex ParserIndex::Deserialize(std::span<const std::uint8_t> bytes,
                                     const Digest* expected_grammar,
                                     const Digest* expected_vocab) {
  using Kind = IndexFormatError::Kind;
  if (!IsParserIndexFile(bytes)) {
    throw IndexFormatError(Kind::kBadMagic, "not a parser index file (bad magic)");
  }
  ByteReader r(bytes);
  r.Raw(4);
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    throw IndexFormatError(Kind::kVersionMismatch,
                           "unsupported parser index version " + std::to_string(version) +
                               " (expected " + std::to_string(kFormatVersion) + ")");
  }
  ParserIndex index;
  auto gd = r.Raw(32);
  std::copy(gd.begin(), gd.end(), index.grammar_digest_.begin());
  auto vd = r.Raw(32);
  std::copy(vd.begin(), vd.end(), index.vocab_digest_.begin());
  index.max_depth_ = static_cast<int>(r.U32());
  const std::uint32_t node_count = r.U32();
  if (node_count == 0 || node_count > r.remaining() / 8) {
    throw IndexFormatError(node_count == 0 ? Kind::kCorrupt : Kind::kTruncated,
                           "bad node count " + std::to_string(node_count));
  }
  auto corrupt = [](std::uint32_t node) {
    return IndexFormatError(Kind::kCorrupt, "corrupt parser index node " + std::to_string(node));
  };
  index.nodes_.resize(node_count);
  for (std::uint32_t n = 0; n < node_count; ++n) {
    Node& node = index.nodes_[n];
    const std::uint32_t children = r.U32();
    if (children > r.remaining() / 8) throw IndexFormatError(Kind::kTruncated, "truncated parser index");
    for (std::uint32_t i = 0; i < children; ++i) {
      const auto sym = static_cast<int>(r.U32());
      const std::uint32_t child = r.U32();
      if (child <= n || child >= node_count || !node.children.emplace(sym, child).second ||
          (i > 0 && std::prev(node.children.end())->first != sym)) {
        throw corrupt(n);
      }
    }
    const std::uint32_t leaves = r.U32();
    if (leaves > r.remaining() / 12) throw IndexFormatError(Kind::kTruncated, "truncated parser index");
    for (std::uint32_t i = 0; i < leaves; ++i) {
      const auto top = static_cast<int>(r.U32());
      const auto scan = static_cast<StateId>(r.U32());
      auto [pos, inserted] = node.leaves.try_emplace({top, scan});
      if (!inserted || std::next(pos) != node.leaves.end()) throw corrupt(n);
      const std::uint32_t count = r.U32();
      if (count > r.remaining() / 20) throw IndexFormatError(Kind::kTruncated, "truncated parser index");
      for (std::uint32_t k = 0; k < count; ++k) {
        Entry e;
        e.token = r.U32();
        const std::uint32_t flags = r.U32();
        if (flags > 1 || (k > 0 && pos->second.back().token >= e.token)) throw corrupt(n);
        e.unindexable = flags == 1;
        e.delta.pops = r.U32();
        e.delta.scanner_state = static_cast<StateId>(r.U32());
        const std::uint32_t pushed = r.U32();
        if (pushed > r.remaining() / 4) throw IndexFormatError(Kind::kTruncated, "truncated parser index");
        for (std::uint32_t j = 0; j < pushed; ++j) e.delta.pushed.push_back(static_cast<int>(r.U32()));
        pos->second.push_back(std::move(e));
      }
    }
  }
  if (!r.AtEnd()) throw IndexFormatError(Kind::kTrailingBytes, "trailing bytes after parser index");
  if (expected_grammar != nullptr && *expected_grammar != index.grammar_digest_) {
    throw IndexFormatError(Kind::kDigestMismatch,
                           "parser index was built for a different grammar (digest " +
                               DigestHex(index.grammar_digest_) + ")");
  }
  if (expected_vocab != nullptr && *expected_vocab != index.vocab_digest_) {
    throw IndexFormatError(Kind::kDigestMismatch,
                           "parser index was built for a different vocabulary (digest " +
                               DigestHex(index.vocab_digest_) + ")");
  }
  return index;
}

}  // namespace guidegen
