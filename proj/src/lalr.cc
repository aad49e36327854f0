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

#include "guidegen/lalr.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "guidegen/errors.h"

namespace guidegen {
namespace {

// Fixed-size bit set over terminal codes.
class Bits {
 public:
  explicit Bits(int n = 0) : words_((n + 63) / 64, 0) {}
  void Set(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool Test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  bool Merge(const Bits& other) {
    bool changed = false;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const std::uint64_t next = words_[w] | other.words_[w];
      changed |= next != words_[w];
      words_[w] = next;
    }
    return changed;
  }

 private:
  std::vector<std::uint64_t> words_;
};

using Item = std::pair<int, int>;  // (production, dot)

}  // namespace

LalrTables::LalrTables(const Grammar& grammar)
    : grammar_(&grammar),
      num_terminals_(static_cast<int>(grammar.terminals().size())),
      num_nonterminals_(static_cast<int>(grammar.nonterminals().size()) + 1) {
  const int accept_nt = num_nonterminals_ - 1;
  productions_.push_back({accept_nt, {Grammar::NonterminalSymbol(grammar.start())}});
  for (const auto& p : grammar.productions()) productions_.push_back(p);

  const int end = num_terminals_;
  const int hash = num_terminals_ + 1;  // propagation marker
  const int nbits = num_terminals_ + 2;

  std::vector<std::vector<int>> by_lhs(num_nonterminals_);
  for (int p = 0; p < num_productions(); ++p) by_lhs[productions_[p].lhs].push_back(p);

  // Nullable and FIRST sets of nonterminals.
  std::vector<bool> nullable(num_nonterminals_, false);
  std::vector<Bits> first(num_nonterminals_, Bits(nbits));
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : productions_) {
      bool all_nullable = true;
      for (int s : p.rhs) {
        if (Grammar::IsTerminal(s)) {
          if (!first[p.lhs].Test(s)) {
            first[p.lhs].Set(s);
            changed = true;
          }
          all_nullable = false;
          break;
        }
        const int b = Grammar::NonterminalIndex(s);
        changed |= first[p.lhs].Merge(first[b]);
        if (!nullable[b]) {
          all_nullable = false;
          break;
        }
      }
      if (all_nullable && !nullable[p.lhs]) nullable[p.lhs] = changed = true;
    }
  }
  // FIRST of rhs[dot..]; returns whether the suffix is nullable.
  auto first_of = [&](const Production& p, std::size_t from, Bits& out) {
    for (std::size_t i = from; i < p.rhs.size(); ++i) {
      const int s = p.rhs[i];
      if (Grammar::IsTerminal(s)) {
        out.Set(s);
        return false;
      }
      out.Merge(first[Grammar::NonterminalIndex(s)]);
      if (!nullable[Grammar::NonterminalIndex(s)]) return false;
    }
    return true;
  };
  auto symbol_after_dot = [&](const Item& it) {
    const auto& rhs = productions_[it.first].rhs;
    return it.second < static_cast<int>(rhs.size()) ? rhs[it.second] : -1;
  };

  // LR(0) canonical collection.
  auto closure0 = [&](const std::vector<Item>& kernel) {
    std::set<Item> items(kernel.begin(), kernel.end());
    std::deque<Item> work(kernel.begin(), kernel.end());
    while (!work.empty()) {
      const Item it = work.front();
      work.pop_front();
      const int s = symbol_after_dot(it);
      if (s < 0 || Grammar::IsTerminal(s)) continue;
      for (int q : by_lhs[Grammar::NonterminalIndex(s)]) {
        if (items.insert({q, 0}).second) work.push_back({q, 0});
      }
    }
    return items;
  };

  std::map<std::vector<Item>, int> state_of;
  std::vector<std::map<int, int>> trans;
  kernels_.push_back({{0, 0}});
  state_of[kernels_[0]] = 0;
  trans.emplace_back();
  for (std::size_t st = 0; st < kernels_.size(); ++st) {
    const auto items = closure0(kernels_[st]);
    std::map<int, std::vector<Item>> next;
    for (const Item& it : items) {
      const int s = symbol_after_dot(it);
      if (s >= 0) next[s].push_back({it.first, it.second + 1});
    }
    for (auto& [sym, kernel] : next) {
      std::sort(kernel.begin(), kernel.end());
      auto [pos, inserted] = state_of.emplace(kernel, static_cast<int>(kernels_.size()));
      if (inserted) {
        kernels_.push_back(kernel);
        trans.emplace_back();
      }
      trans[st][sym] = pos->second;
    }
  }
  const int n = static_cast<int>(kernels_.size());

  // LR(1) closure of items carrying lookahead sets.
  auto closure1 = [&](std::map<Item, Bits> items) {
    std::deque<Item> work;
    for (const auto& [it, la] : items) work.push_back(it);
    while (!work.empty()) {
      const Item it = work.front();
      work.pop_front();
      const int s = symbol_after_dot(it);
      if (s < 0 || Grammar::IsTerminal(s)) continue;
      Bits la(nbits);
      if (first_of(productions_[it.first], it.second + 1, la)) la.Merge(items.at(it));
      for (int q : by_lhs[Grammar::NonterminalIndex(s)]) {
        auto [pos, inserted] = items.try_emplace({q, 0}, nbits);
        if (pos->second.Merge(la) || inserted) work.push_back({q, 0});
      }
    }
    return items;
  };

  // Spontaneous lookaheads and propagation links between kernel items.
  std::vector<std::vector<Bits>> la(n);
  for (int st = 0; st < n; ++st) la[st].assign(kernels_[st].size(), Bits(nbits));
  la[0][0].Set(end);
  auto kernel_index = [&](int st, const Item& it) {
    const auto& k = kernels_[st];
    return static_cast<int>(std::lower_bound(k.begin(), k.end(), it) - k.begin());
  };
  std::vector<std::vector<std::vector<std::pair<int, int>>>> links(n);
  for (int st = 0; st < n; ++st) {
    links[st].resize(kernels_[st].size());
    for (std::size_t ki = 0; ki < kernels_[st].size(); ++ki) {
      Bits seed(nbits);
      seed.Set(hash);
      const auto items = closure1({{kernels_[st][ki], seed}});
      for (const auto& [it, bits] : items) {
        const int s = symbol_after_dot(it);
        if (s < 0) continue;
        const int target = trans[st].at(s);
        const int tk = kernel_index(target, {it.first, it.second + 1});
        for (int b = 0; b < nbits; ++b) {
          if (!bits.Test(b)) continue;
          if (b == hash) links[st][ki].push_back({target, tk});
          else la[target][tk].Set(b);
        }
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int st = 0; st < n; ++st) {
      for (std::size_t ki = 0; ki < links[st].size(); ++ki) {
        for (const auto& [t, tk] : links[st][ki]) changed |= la[t][tk].Merge(la[st][ki]);
      }
    }
  }

  // Tables.
  action_.assign(n, std::vector<LrAction>(num_terminals_ + 1));
  goto_.assign(n, std::vector<int>(num_nonterminals_, -1));
  accessing_.assign(n, -1);
  predecessors_.assign(n, {});
  active_.assign(n, {});
  for (int st = 0; st < n; ++st) {
    for (const auto& [sym, target] : trans[st]) {
      if (Grammar::IsTerminal(sym)) {
        action_[st][sym] = {LrAction::Kind::kShift, target};
      } else {
        goto_[st][Grammar::NonterminalIndex(sym)] = target;
      }
      accessing_[target] = sym;
      predecessors_[target].push_back(st);
    }
  }
  for (auto& preds : predecessors_) {
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
  }

  auto term_name = [&](int t) { return t == end ? std::string("$end") : grammar.terminals()[t].name; };
  for (int st = 0; st < n; ++st) {
    std::map<Item, Bits> seed;
    for (std::size_t ki = 0; ki < kernels_[st].size(); ++ki) seed.emplace(kernels_[st][ki], la[st][ki]);
    const auto items = closure1(std::move(seed));
    for (const auto& [it, bits] : items) {
      if (symbol_after_dot(it) >= 0) continue;
      for (int t = 0; t <= end; ++t) {
        if (!bits.Test(t)) continue;
        const LrAction next = it.first == 0 ? LrAction{LrAction::Kind::kAccept, 0}
                                            : LrAction{LrAction::Kind::kReduce, it.first};
        LrAction& cur = action_[st][t];
        if (cur.kind == LrAction::Kind::kError || cur == next) {
          cur = next;
          continue;
        }
        const char* kind = cur.kind == LrAction::Kind::kShift ? "shift/reduce" : "reduce/reduce";
        std::string msg = std::string(kind) + " conflict in LALR(1) state " + std::to_string(st) +
                          " on " + term_name(t) + ":";
        for (const auto& line : DescribeState(st)) msg += "\n  " + line;
        throw ConflictError(msg);
      }
    }
    for (int t = 0; t < num_terminals_; ++t) {
      if (action_[st][t].kind != LrAction::Kind::kError) active_[st].push_back(t);
    }
  }
}

std::vector<std::string> LalrTables::DescribeState(int state) const {
  std::vector<std::string> out;
  for (const auto& [p, dot] : kernels_[state]) {
    const Production& prod = productions_[p];
    std::string line = grammar_->SymbolName(Grammar::NonterminalSymbol(prod.lhs)) + " ->";
    for (std::size_t i = 0; i <= prod.rhs.size(); ++i) {
      if (static_cast<int>(i) == dot) line += " .";
      if (i < prod.rhs.size()) line += " " + grammar_->SymbolName(prod.rhs[i]);
    }
    out.push_back(line);
  }
  return out;
}

Pda::Pda(int num_states, int num_inputs, int num_stack_symbols,
         std::vector<Transition> transitions, int start, std::vector<int> finals)
    : num_states_(num_states),
      num_inputs_(num_inputs),
      num_stack_symbols_(num_stack_symbols),
      transitions_(std::move(transitions)),
      start_(start),
      finals_(std::move(finals)) {
  auto state_ok = [&](int q) { return q >= 0 && q < num_states_; };
  auto opt_ok = [](int v, int n) { return v >= -1 && v < n; };
  if (!state_ok(start_)) throw UsageError("PDA start state out of range");
  for (int f : finals_) {
    if (!state_ok(f)) throw UsageError("PDA final state out of range");
  }
  std::sort(finals_.begin(), finals_.end());
  reading_pops_.assign(static_cast<std::size_t>(num_states_) * num_inputs_, {});
  for (const auto& t : transitions_) {
    if (!state_ok(t.from) || !state_ok(t.to) || !opt_ok(t.input, num_inputs_) ||
        !opt_ok(t.pop, num_stack_symbols_) || !opt_ok(t.push, num_stack_symbols_)) {
      throw UsageError("PDA transition out of range");
    }
    if (t.input < 0) continue;
    reading_pops_[static_cast<std::size_t>(t.from) * num_inputs_ + t.input].push_back(t.pop);
  }
  for (auto& pops : reading_pops_) {
    std::sort(pops.begin(), pops.end());
    pops.erase(std::unique(pops.begin(), pops.end()), pops.end());
  }
}

bool Pda::IsFinal(int state) const {
  return std::binary_search(finals_.begin(), finals_.end(), state);
}

std::vector<int> Pda::Preimage(int state, std::span<const int> inputs) const {
  if (state < 0 || state >= num_states_) throw UsageError("PDA state out of range");
  std::vector<int> out;
  for (int v : inputs) {
    if (v < 0 || v >= num_inputs_) throw UsageError("PDA input symbol out of range");
    const auto& pops = reading_pops_[static_cast<std::size_t>(state) * num_inputs_ + v];
    out.insert(out.end(), pops.begin(), pops.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Pda BuildParserPda(const LalrTables& tables) {
  const int num_inputs = tables.num_terminals() + 1;
  const int g_count = tables.num_states();
  auto pending = [&](int v) { return 3 + v; };
  int num_states = 3 + num_inputs;

  std::map<std::tuple<int, int, int, int>, int> aux;  // (kind, a, b, c) -> state
  auto aux_state = [&](int kind, int a, int b, int c) {
    auto [pos, inserted] = aux.emplace(std::make_tuple(kind, a, b, c), num_states);
    if (inserted) ++num_states;
    return pos->second;
  };
  std::vector<Pda::Transition> transitions;
  std::set<std::tuple<int, int, int, int, int>> seen;
  auto add = [&](int from, int input, int pop, int to, int push) {
    if (seen.emplace(from, input, pop, to, push).second) {
      transitions.push_back({from, input, pop, to, push});
    }
  };

  add(0, -1, -1, kPdaReadState, 0);
  for (int g = 0; g < g_count; ++g) {
    for (int v = 0; v < num_inputs; ++v) {
      const LrAction& a = tables.Action(g, v);
      if (a.kind == LrAction::Kind::kError) continue;
      add(kPdaReadState, v, g, pending(v), g);
      switch (a.kind) {
        case LrAction::Kind::kShift: {
          const int s = aux_state(0, a.value, 0, 0);
          add(pending(v), -1, g, s, g);
          add(s, -1, -1, kPdaReadState, a.value);
          break;
        }
        case LrAction::Kind::kAccept:
          add(pending(v), -1, g, kPdaAcceptState, -1);
          break;
        case LrAction::Kind::kReduce: {
          // Pop one state per right-hand-side symbol, then push the goto
          // target on top of the exposed state.
          const Production& p = tables.production(a.value);
          const int k = static_cast<int>(p.rhs.size());
          auto push_goto = [&](int from, int h) {
            const int x = tables.Goto(h, p.lhs);
            if (x < 0) return;
            const int gs = aux_state(1, v, x, 0);
            add(from, -1, h, gs, h);
            add(gs, -1, -1, pending(v), x);
          };
          if (k == 0) {
            push_goto(pending(v), g);
            break;
          }
          int cur = aux_state(2, v, a.value, 1);
          add(pending(v), -1, g, cur, -1);
          for (int i = 1; i < k; ++i) {
            const int nxt = aux_state(2, v, a.value, i + 1);
            for (int h = 0; h < g_count; ++h) {
              if (tables.AccessingSymbol(h) == p.rhs[k - 1 - i]) add(cur, -1, h, nxt, -1);
            }
            cur = nxt;
          }
          for (int h = 0; h < g_count; ++h) push_goto(cur, h);
          break;
        }
        case LrAction::Kind::kError:
          break;
      }
    }
  }
  return Pda(num_states, num_inputs, g_count, std::move(transitions), 0, {kPdaAcceptState});
}

}  // namespace guidegen
