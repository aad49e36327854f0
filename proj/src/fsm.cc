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

#include "guidegen/fsm.h"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <utility>

#include "guidegen/errors.h"
#include "guidegen/utf8.h"

namespace guidegen {

namespace {

constexpr std::size_t kMaxPositions = 1 << 18;
constexpr std::size_t kMaxDfaStates = 1 << 16;

std::vector<int> SortedUnion(const std::vector<int>& a,
                             const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

// Position automaton (Glushkov) construction. Position 0 is the virtual
// initial position; every character-set leaf of the expanded pattern gets
// its own position.
class PositionAutomaton {
 public:
  struct Info {
    bool nullable = false;
    std::vector<int> first;
    std::vector<int> last;
  };

  PositionAutomaton() {
    labels_.emplace_back();
    follow_.emplace_back();
    final_tag_.push_back(-1);
  }

  void AddPattern(const RegexNode& root, int tag) {
    Info info = Build(root);
    follow_[0] = SortedUnion(follow_[0], info.first);
    for (int p : info.last) final_tag_[p] = tag;
    if (info.nullable) start_tags_.push_back(tag);
  }

  std::size_t num_positions() const { return labels_.size(); }
  const std::vector<CharRange>& label(int p) const { return labels_[p]; }
  const std::vector<int>& follow(int p) const { return follow_[p]; }
  int final_tag(int p) const { return final_tag_[p]; }
  const std::vector<int>& start_tags() const { return start_tags_; }

 private:
  int NewPosition(const std::vector<CharRange>& label) {
    if (labels_.size() >= kMaxPositions) {
      throw RegexError(RegexError::Kind::kUnsupported, 0,
                       "unsupported regex construct at position 0: pattern "
                       "expands to too many positions");
    }
    labels_.push_back(label);
    follow_.emplace_back();
    final_tag_.push_back(-1);
    return static_cast<int>(labels_.size() - 1);
  }

  void AddFollow(const std::vector<int>& from, const std::vector<int>& to) {
    for (int p : from) follow_[p] = SortedUnion(follow_[p], to);
  }

  Info Concat(Info a, const Info& b) {
    AddFollow(a.last, b.first);
    Info out;
    out.nullable = a.nullable && b.nullable;
    out.first = a.nullable ? SortedUnion(a.first, b.first) : std::move(a.first);
    out.last = b.nullable ? SortedUnion(a.last, b.last) : b.last;
    return out;
  }

  Info Build(const RegexNode& n) {
    using Kind = RegexNode::Kind;
    switch (n.kind) {
      case Kind::kEmpty:
        return Info{true, {}, {}};
      case Kind::kChars: {
        const int p = NewPosition(n.chars);
        return Info{false, {p}, {p}};
      }
      case Kind::kConcat: {
        Info acc{true, {}, {}};
        for (const RegexNode& c : n.children) acc = Concat(std::move(acc), Build(c));
        return acc;
      }
      case Kind::kAlt: {
        Info acc{false, {}, {}};
        for (const RegexNode& c : n.children) {
          Info i = Build(c);
          acc.nullable = acc.nullable || i.nullable;
          acc.first = SortedUnion(acc.first, i.first);
          acc.last = SortedUnion(acc.last, i.last);
        }
        return acc;
      }
      case Kind::kStar:
      case Kind::kPlus: {
        Info i = Build(n.children.front());
        AddFollow(i.last, i.first);
        if (n.kind == Kind::kStar) i.nullable = true;
        return i;
      }
      case Kind::kOptional: {
        Info i = Build(n.children.front());
        i.nullable = true;
        return i;
      }
      case Kind::kRepeat:
        return Build(ExpandRepeat(n));
    }
    return Info{};
  }

  // x{m,n} -> x..x (x(x(x)?)?)? ; x{m,} -> x..x x*
  static RegexNode ExpandRepeat(const RegexNode& n) {
    const RegexNode& child = n.children.front();
    RegexNode seq;
    seq.kind = RegexNode::Kind::kConcat;
    for (int i = 0; i < n.min; ++i) seq.children.push_back(child);
    if (n.max == -1) {
      RegexNode star;
      star.kind = RegexNode::Kind::kStar;
      star.children.push_back(child);
      seq.children.push_back(std::move(star));
    } else if (n.max > n.min) {
      RegexNode tail;  // innermost optional
      for (int i = n.min; i < n.max; ++i) {
        RegexNode body;
        if (i == n.min) {
          body = child;
        } else {
          body.kind = RegexNode::Kind::kConcat;
          body.children.push_back(child);
          body.children.push_back(std::move(tail));
        }
        tail = RegexNode{};
        tail.kind = RegexNode::Kind::kOptional;
        tail.children.push_back(std::move(body));
      }
      seq.children.push_back(std::move(tail));
    }
    return seq;
  }

  std::vector<std::vector<CharRange>> labels_;
  std::vector<std::vector<int>> follow_;
  std::vector<int> final_tag_;
  std::vector<int> start_tags_;
};

// Deterministic automaton before canonical numbering.
struct RawDfa {
  int num_states = 0;
  int num_classes = 0;
  std::vector<StateId> table;  // num_states x num_classes
  std::vector<std::vector<int>> tags;
  // Intervals of the code point space and their (pre-)class, -1 if none.
  std::vector<char32_t> interval_starts;
  std::vector<int> interval_class;

  StateId& At(int s, int c) { return table[s * num_classes + c]; }
  StateId At(int s, int c) const { return table[s * num_classes + c]; }
};

RawDfa SubsetConstruction(const PositionAutomaton& pa) {
  // Elementary intervals induced by every label boundary.
  std::vector<char32_t> bounds = {0};
  for (std::size_t p = 1; p < pa.num_positions(); ++p) {
    for (const CharRange& r : pa.label(static_cast<int>(p))) {
      bounds.push_back(r.lo);
      if (r.hi < kMaxCodePoint) bounds.push_back(r.hi + 1);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  // Positions covering each interval.
  std::vector<std::vector<int>> covering(bounds.size());
  for (std::size_t p = 1; p < pa.num_positions(); ++p) {
    for (const CharRange& r : pa.label(static_cast<int>(p))) {
      auto it = std::lower_bound(bounds.begin(), bounds.end(), r.lo);
      for (; it != bounds.end() && *it <= r.hi; ++it) {
        covering[it - bounds.begin()].push_back(static_cast<int>(p));
      }
    }
  }

  // Intervals with identical covering sets form one pre-class.
  RawDfa dfa;
  dfa.interval_starts = bounds;
  dfa.interval_class.assign(bounds.size(), -1);
  std::map<std::vector<int>, int> class_ids;
  std::vector<const std::vector<int>*> class_positions;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (covering[i].empty()) continue;
    auto [it, inserted] =
        class_ids.emplace(covering[i], static_cast<int>(class_ids.size()));
    if (inserted) class_positions.push_back(&it->first);
    dfa.interval_class[i] = it->second;
  }
  dfa.num_classes = static_cast<int>(class_ids.size());

  std::map<std::vector<int>, StateId> ids;
  std::vector<std::vector<int>> sets;
  auto intern = [&](std::vector<int> set) {
    auto [it, inserted] = ids.emplace(set, static_cast<StateId>(sets.size()));
    if (inserted) {
      if (sets.size() >= kMaxDfaStates) {
        throw RegexError(RegexError::Kind::kUnsupported, 0,
                         "unsupported regex construct at position 0: "
                         "automaton exceeds state limit");
      }
      sets.push_back(std::move(set));
    }
    return it->second;
  };
  intern({0});
  for (std::size_t s = 0; s < sets.size(); ++s) {
    std::vector<int> follow;
    for (int p : sets[s]) follow = SortedUnion(follow, pa.follow(p));
    std::vector<int> tags;
    for (int p : sets[s]) {
      if (pa.final_tag(p) >= 0) tags.push_back(pa.final_tag(p));
    }
    if (s == 0) tags.insert(tags.end(), pa.start_tags().begin(), pa.start_tags().end());
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    dfa.tags.push_back(std::move(tags));
    for (int c = 0; c < dfa.num_classes; ++c) {
      std::vector<int> next;
      std::set_intersection(follow.begin(), follow.end(),
                            class_positions[c]->begin(),
                            class_positions[c]->end(), std::back_inserter(next));
      dfa.table.push_back(next.empty() ? kNoState : intern(std::move(next)));
    }
  }
  dfa.num_states = static_cast<int>(sets.size());
  return dfa;
}

std::vector<bool> LiveMask(const RawDfa& dfa) {
  std::vector<std::vector<int>> reverse(dfa.num_states);
  std::deque<int> queue;
  std::vector<bool> live(dfa.num_states, false);
  for (int s = 0; s < dfa.num_states; ++s) {
    for (int c = 0; c < dfa.num_classes; ++c) {
      if (dfa.At(s, c) != kNoState) reverse[dfa.At(s, c)].push_back(s);
    }
    if (!dfa.tags[s].empty()) {
      live[s] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int r : reverse[s]) {
      if (!live[r]) {
        live[r] = true;
        queue.push_back(r);
      }
    }
  }
  return live;
}

// Removes transitions into dead states. Unreachable leftovers are dropped by
// Canonicalize.
void PruneDead(RawDfa& dfa) {
  const std::vector<bool> live = LiveMask(dfa);
  for (int s = 0; s < dfa.num_states; ++s) {
    for (int c = 0; c < dfa.num_classes; ++c) {
      StateId& t = dfa.At(s, c);
      if (t != kNoState && !live[t]) t = kNoState;
    }
  }
}

// Moore partition refinement. Undefined transitions act as a distinct
// target, which yields the minimal partial automaton.
void Minimize(RawDfa& dfa) {
  std::vector<int> block(dfa.num_states);
  {
    std::map<std::vector<int>, int> by_tags;
    for (int s = 0; s < dfa.num_states; ++s) {
      block[s] = by_tags.emplace(dfa.tags[s], static_cast<int>(by_tags.size()))
                     .first->second;
    }
  }
  int num_blocks = 0;
  for (;;) {
    std::map<std::vector<int>, int> sigs;
    std::vector<int> next(dfa.num_states);
    for (int s = 0; s < dfa.num_states; ++s) {
      std::vector<int> sig;
      sig.reserve(dfa.num_classes + 1);
      sig.push_back(block[s]);
      for (int c = 0; c < dfa.num_classes; ++c) {
        const StateId t = dfa.At(s, c);
        sig.push_back(t == kNoState ? -1 : block[t]);
      }
      next[s] = sigs.emplace(std::move(sig), static_cast<int>(sigs.size()))
                    .first->second;
    }
    const int count = static_cast<int>(sigs.size());
    block = std::move(next);
    if (count == num_blocks) break;
    num_blocks = count;
  }
  RawDfa out;
  out.num_states = num_blocks;
  out.num_classes = dfa.num_classes;
  out.table.assign(static_cast<std::size_t>(num_blocks) * dfa.num_classes,
                   kNoState);
  out.tags.resize(num_blocks);
  out.interval_starts = std::move(dfa.interval_starts);
  out.interval_class = std::move(dfa.interval_class);
  for (int s = 0; s < dfa.num_states; ++s) {
    const int b = block[s];
    out.tags[b] = dfa.tags[s];
    for (int c = 0; c < dfa.num_classes; ++c) {
      const StateId t = dfa.At(s, c);
      out.At(b, c) = t == kNoState ? kNoState : block[t];
    }
  }
  // Keep the start state's block first.
  if (block[0] != 0) {
    const int b0 = block[0];
    auto swap_id = [&](StateId x) -> StateId {
      if (x == b0) return 0;
      if (x == 0) return b0;
      return x;
    };
    for (StateId& t : out.table) {
      if (t != kNoState) t = swap_id(t);
    }
    for (int c = 0; c < out.num_classes; ++c) std::swap(out.At(0, c), out.At(b0, c));
    std::swap(out.tags[0], out.tags[b0]);
  }
  dfa = std::move(out);
}

// Merges classes with identical columns, drops classes with no transition,
// orders classes by their lowest code point and renumbers states in BFS
// order from the start state.
Fsm Canonicalize(const RawDfa& dfa, int num_tags) {
  // Merge classes by column.
  std::map<std::vector<StateId>, int> by_column;
  std::vector<int> merged(dfa.num_classes, -1);
  for (int c = 0; c < dfa.num_classes; ++c) {
    std::vector<StateId> column(dfa.num_states);
    bool any = false;
    for (int s = 0; s < dfa.num_states; ++s) {
      column[s] = dfa.At(s, c);
      any = any || column[s] != kNoState;
    }
    if (!any) continue;
    merged[c] = by_column.emplace(std::move(column),
                                  static_cast<int>(by_column.size()))
                    .first->second;
  }
  // Order merged classes by first appearance along the code point axis.
  std::vector<int> order(by_column.size(), -1);
  int next_class = 0;
  std::vector<int> interval_class(dfa.interval_class.size(), -1);
  for (std::size_t i = 0; i < dfa.interval_class.size(); ++i) {
    const int pre = dfa.interval_class[i];
    if (pre < 0 || merged[pre] < 0) continue;
    int& o = order[merged[pre]];
    if (o < 0) o = next_class++;
    interval_class[i] = o;
  }
  const int num_classes = next_class;
  // Representative pre-class per final class.
  std::vector<int> rep(num_classes, -1);
  for (int c = 0; c < dfa.num_classes; ++c) {
    if (merged[c] >= 0 && rep[order[merged[c]]] < 0) rep[order[merged[c]]] = c;
  }

  // BFS renumbering.
  std::vector<StateId> number(dfa.num_states, kNoState);
  std::vector<int> old_of;
  number[0] = 0;
  old_of.push_back(0);
  for (std::size_t i = 0; i < old_of.size(); ++i) {
    const int s = old_of[i];
    for (int c = 0; c < num_classes; ++c) {
      const StateId t = dfa.At(s, rep[c]);
      if (t != kNoState && number[t] == kNoState) {
        number[t] = static_cast<StateId>(old_of.size());
        old_of.push_back(t);
      }
    }
  }
  const int num_states = static_cast<int>(old_of.size());
  std::vector<StateId> table(static_cast<std::size_t>(num_states) * num_classes);
  std::vector<std::vector<int>> tags(num_states);
  for (int n = 0; n < num_states; ++n) {
    tags[n] = dfa.tags[old_of[n]];
    for (int c = 0; c < num_classes; ++c) {
      const StateId t = dfa.At(old_of[n], rep[c]);
      table[n * num_classes + c] = t == kNoState ? kNoState : number[t];
    }
  }

  // Coalesce adjacent intervals of the same class.
  std::vector<char32_t> starts;
  std::vector<int> classes;
  for (std::size_t i = 0; i < interval_class.size(); ++i) {
    if (!classes.empty() && classes.back() == interval_class[i]) continue;
    starts.push_back(dfa.interval_starts[i]);
    classes.push_back(interval_class[i]);
  }
  return Fsm::FromParts(num_states, num_classes, num_tags, std::move(starts),
                        std::move(classes), std::move(table), std::move(tags));
}

Fsm CompilePositions(const PositionAutomaton& pa, int num_tags,
                     const CompileOptions& options) {
  RawDfa dfa = SubsetConstruction(pa);
  if (options.prune_dead_states) PruneDead(dfa);
  if (options.minimize) Minimize(dfa);
  return Canonicalize(dfa, num_tags);
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

Fsm Fsm::FromParts(int num_states, int num_classes, int num_tags,
                   std::vector<char32_t> interval_starts,
                   std::vector<int> interval_class, std::vector<StateId> table,
                   std::vector<std::vector<int>> tags) {
  Fsm fsm;
  fsm.num_states_ = num_states;
  fsm.num_classes_ = num_classes;
  fsm.num_tags_ = num_tags;
  fsm.interval_starts_ = std::move(interval_starts);
  fsm.interval_class_ = std::move(interval_class);
  fsm.table_ = std::move(table);
  fsm.tags_ = std::move(tags);
  fsm.BuildLookups();
  return fsm;
}

void Fsm::BuildLookups() {
  for (char32_t ch = 0; ch < 128; ++ch) {
    auto it = std::upper_bound(interval_starts_.begin(), interval_starts_.end(), ch);
    ascii_class_[ch] =
        static_cast<std::int16_t>(interval_class_[it - interval_starts_.begin() - 1]);
  }
  readers_.assign(num_classes_, {});
  for (int s = 0; s < num_states_; ++s) {
    for (int c = 0; c < num_classes_; ++c) {
      if (table_[s * num_classes_ + c] != kNoState) readers_[c].push_back(s);
    }
  }
}

int Fsm::ClassOf(char32_t ch) const {
  if (ch < 128) return ascii_class_[ch];
  if (interval_starts_.empty()) return -1;
  auto it = std::upper_bound(interval_starts_.begin(), interval_starts_.end(), ch);
  return interval_class_[it - interval_starts_.begin() - 1];
}

std::vector<StateId> Fsm::Finals() const {
  std::vector<StateId> out;
  for (StateId s = 0; s < num_states_; ++s) {
    if (IsFinal(s)) out.push_back(s);
  }
  return out;
}

std::optional<StateId> Fsm::Step(StateId state, char32_t ch) const {
  if (state < 0 || state >= num_states_) {
    throw UsageError("state " + std::to_string(state) +
                     " out of range for automaton with " +
                     std::to_string(num_states_) + " states");
  }
  const StateId next = Next(state, ch);
  if (next == kNoState) return std::nullopt;
  return next;
}

std::span<const StateId> Fsm::StatesReading(char32_t ch) const {
  const int cls = ClassOf(ch);
  if (cls < 0) return {};
  return readers_[cls];
}

StateId Fsm::Walk(StateId from, std::u32string_view text) const {
  StateId s = from;
  for (char32_t ch : text) {
    s = Next(s, ch);
    if (s == kNoState) return kNoState;
  }
  return s;
}

bool Fsm::Accepts(std::u32string_view text) const {
  const StateId end = Walk(start(), text);
  return end != kNoState && IsFinal(end);
}

bool Fsm::Accepts(std::string_view utf8) const {
  return Accepts(DecodeUtf8(utf8));
}

std::vector<CharRange> Fsm::ClassRanges(int cls) const {
  std::vector<CharRange> out;
  for (std::size_t i = 0; i < interval_starts_.size(); ++i) {
    if (interval_class_[i] != cls) continue;
    const char32_t hi = i + 1 < interval_starts_.size()
                            ? interval_starts_[i + 1] - 1
                            : kMaxCodePoint;
    out.push_back({interval_starts_[i], hi});
  }
  return out;
}

std::uint64_t Fsm::TransitionCount() const {
  std::vector<std::uint64_t> width(num_classes_, 0);
  for (std::size_t i = 0; i < interval_starts_.size(); ++i) {
    if (interval_class_[i] < 0) continue;
    const char32_t hi = i + 1 < interval_starts_.size()
                            ? interval_starts_[i + 1] - 1
                            : kMaxCodePoint;
    width[interval_class_[i]] += hi - interval_starts_[i] + 1;
  }
  std::uint64_t total = 0;
  for (int c = 0; c < num_classes_; ++c) total += width[c] * readers_[c].size();
  return total;
}

std::vector<bool> Fsm::LiveStates() const {
  RawDfa view;
  view.num_states = num_states_;
  view.num_classes = num_classes_;
  view.table = table_;
  view.tags = tags_;
  return LiveMask(view);
}

std::vector<std::uint8_t> Fsm::CanonicalBytes() const {
  std::vector<std::uint8_t> out;
  PutU32(out, static_cast<std::uint32_t>(num_states_));
  PutU32(out, static_cast<std::uint32_t>(num_classes_));
  PutU32(out, static_cast<std::uint32_t>(num_tags_));
  PutU32(out, static_cast<std::uint32_t>(interval_starts_.size()));
  for (std::size_t i = 0; i < interval_starts_.size(); ++i) {
    PutU32(out, interval_starts_[i]);
    PutU32(out, static_cast<std::uint32_t>(interval_class_[i]));
  }
  for (StateId t : table_) PutU32(out, static_cast<std::uint32_t>(t));
  for (const auto& tags : tags_) {
    PutU32(out, static_cast<std::uint32_t>(tags.size()));
    for (int t : tags) PutU32(out, static_cast<std::uint32_t>(t));
  }
  return out;
}

bool Fsm::operator==(const Fsm& other) const {
  return num_states_ == other.num_states_ &&
         num_classes_ == other.num_classes_ && num_tags_ == other.num_tags_ &&
         interval_starts_ == other.interval_starts_ &&
         interval_class_ == other.interval_class_ && table_ == other.table_ &&
         tags_ == other.tags_;
}

Fsm CompileRegex(std::string_view pattern, const CompileOptions& options) {
  const std::u32string decoded = DecodeUtf8(pattern);
  PositionAutomaton pa;
  pa.AddPattern(ParseRegex(decoded), 0);
  return CompilePositions(pa, 1, options);
}

Fsm CompileUnion(std::span<const std::string> patterns,
                 const CompileOptions& options) {
  PositionAutomaton pa;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    pa.AddPattern(ParseRegex(DecodeUtf8(patterns[i])), static_cast<int>(i));
  }
  return CompilePositions(pa, static_cast<int>(patterns.size()), options);
}

}  // namespace guidegen
