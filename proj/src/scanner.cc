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

#include "guidegen/scanner.h"

#include <algorithm>
#include <map>
#include <string>

namespace guidegen {

CombinedFsm BuildCombinedFsm(const Grammar& grammar, std::span<const int> terminals) {
  CombinedFsm out;
  std::vector<int> selected(terminals.begin(), terminals.end());
  for (std::size_t t = 0; t < grammar.terminals().size(); ++t) {
    if (grammar.terminals()[t].ignored) selected.push_back(static_cast<int>(t));
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  out.terminals = selected;

  std::vector<std::string> patterns;
  for (int t : selected) patterns.push_back(grammar.terminals()[t].pattern);
  out.fsm = CompileUnion(patterns);

  const int n = out.fsm.num_states();
  // live[s] = tags completable from s; fixpoint over the transition graph.
  std::vector<std::vector<bool>> live(n, std::vector<bool>(selected.size(), false));
  for (StateId s = 0; s < n; ++s) {
    for (int tag : out.fsm.Tags(s)) live[s][tag] = true;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId s = 0; s < n; ++s) {
      for (int c = 0; c < out.fsm.num_classes(); ++c) {
        const StateId t = out.fsm.NextByClass(s, c);
        if (t == kNoState) continue;
        for (std::size_t k = 0; k < selected.size(); ++k) {
          if (live[t][k] && !live[s][k]) live[s][k] = changed = true;
        }
      }
    }
  }
  out.candidates.resize(n);
  out.completed.assign(n, -1);
  for (StateId s = 0; s < n; ++s) {
    for (std::size_t k = 0; k < selected.size(); ++k) {
      if (live[s][k]) out.candidates[s].push_back(selected[k]);
    }
    const auto& tags = out.fsm.Tags(s);
    if (!tags.empty()) out.completed[s] = selected[tags.front()];
  }
  return out;
}

std::vector<int> ScanCandidates(const CombinedFsm& combined, std::u32string_view lexeme) {
  StateId s = combined.fsm.start();
  for (char32_t c : lexeme) {
    const StateId t = combined.fsm.Next(s, c);
    if (t == kNoState) {
      if (s == combined.fsm.start() || combined.completed[s] < 0) return {};
      return {combined.completed[s]};
    }
    s = t;
  }
  return combined.candidates[s];
}

ScannerTable::ScannerTable(const Grammar& grammar, const LalrTables& tables) {
  std::map<std::vector<int>, std::size_t> by_set;
  per_state_.resize(tables.num_states());
  for (int st = 0; st < tables.num_states(); ++st) {
    const auto& active = tables.ActiveTerminals(st);
    auto [pos, inserted] = by_set.emplace(active, distinct_.size());
    if (inserted) {
      distinct_.push_back(std::make_shared<const CombinedFsm>(BuildCombinedFsm(grammar, active)));
    }
    per_state_[st] = distinct_[pos->second].get();
  }
}

}  // namespace guidegen
