#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "taskdfa/alphabet.hpp"
#include "taskdfa/error.hpp"

namespace taskdfa {

using StateId = std::uint32_t;

/// Complete deterministic finite automaton. Immutable once built; every
/// (state, symbol) pair has a successor.
class Dfa {
 public:
  /// `transitions` is row-major: transitions[state * |alphabet| + symbol].
  Dfa(Alphabet alphabet, std::size_t num_states, StateId initial, std::vector<bool> accepting,
      std::vector<StateId> transitions)
      : alphabet_(std::move(alphabet)),
        num_states_(num_states),
        initial_(initial),
        accepting_(std::move(accepting)),
        table_(std::move(transitions)) {
    if (num_states_ == 0) throw InputError("a DFA needs at least one state");
    if (initial_ >= num_states_) throw InputError("initial state out of range");
    if (accepting_.size() != num_states_) throw InputError("accepting bitmap size mismatch");
    if (table_.size() != num_states_ * alphabet_.size())
      throw InputError("transition table is not total");
    for (StateId t : table_)
      if (t >= num_states_) throw InputError("transition target out of range");
  }

  /// Single-state DFA accepting everything (or nothing).
  static Dfa constant(const Alphabet& alphabet, bool accept_all) {
    return Dfa(alphabet, 1, 0, {accept_all}, std::vector<StateId>(alphabet.size(), 0));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return num_states_; }
  StateId initial() const { return initial_; }
  bool is_accepting(StateId q) const { return accepting_.at(q); }
  const std::vector<bool>& accepting() const { return accepting_; }
  const std::vector<StateId>& table() const { return table_; }

  StateId next(StateId q, Symbol a) const {
    if (a >= alphabet_.size()) throw InputError("symbol outside alphabet");
    return table_[q * alphabet_.size() + a];
  }

  /// δ*(q0, word).
  StateId run(const Word& word) const { return run_from(initial_, word); }

  StateId run_from(StateId q, const Word& word) const {
    for (Symbol a : word) q = next(q, a);
    return q;
  }

  bool accepts(const Word& word) const { return accepting_[run(word)]; }

  bool operator==(const Dfa& o) const {
    return alphabet_ == o.alphabet_ && num_states_ == o.num_states_ && initial_ == o.initial_ &&
           accepting_ == o.accepting_ && table_ == o.table_;
  }

 private:
  Alphabet alphabet_;
  std::size_t num_states_;
  StateId initial_;
  std::vector<bool> accepting_;
  std::vector<StateId> table_;
};

inline bool accepts(const Dfa& dfa, const Word& word) { return dfa.accepts(word); }
inline StateId run(const Dfa& dfa, const Word& word) { return dfa.run(word); }

inline Dfa complement(const Dfa& d) {
  std::vector<bool> acc(d.num_states());
  for (StateId q = 0; q < d.num_states(); ++q) acc[q] = !d.is_accepting(q);
  return Dfa(d.alphabet(), d.num_states(), d.initial(), std::move(acc), d.table());
}

/// Product automaton restricted to reachable pairs, numbered in BFS order.
inline Dfa product(const Dfa& d1, const Dfa& d2, const std::function<bool(bool, bool)>& combine) {
  if (!(d1.alphabet() == d2.alphabet())) throw AlphabetMismatch();
  const std::size_t k = d1.alphabet().size();
  std::map<std::pair<StateId, StateId>, StateId> index;
  std::vector<std::pair<StateId, StateId>> states;
  std::vector<StateId> table;
  auto intern = [&](std::pair<StateId, StateId> p) {
    auto [it, fresh] = index.emplace(p, static_cast<StateId>(states.size()));
    if (fresh) states.push_back(p);
    return it->second;
  };
  intern({d1.initial(), d2.initial()});
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [p, q] = states[i];
    for (Symbol a = 0; a < k; ++a) table.push_back(intern({d1.next(p, a), d2.next(q, a)}));
  }
  std::vector<bool> acc(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    acc[i] = combine(d1.is_accepting(states[i].first), d2.is_accepting(states[i].second));
  return Dfa(d1.alphabet(), states.size(), 0, std::move(acc), std::move(table));
}

inline Dfa symmetric_difference(const Dfa& d1, const Dfa& d2) {
  return product(d1, d2, [](bool a, bool b) { return a != b; });
}

/// Shortlex-least accepted word: BFS over states expanding symbols in
/// canonical order, so the first discovery of each state is its shortlex
/// access word.
inline std::optional<Word> shortest_accepted(const Dfa& d) {
  const std::size_t k = d.alphabet().size();
  std::vector<std::int64_t> parent(d.num_states(), -2);
  std::vector<Symbol> via(d.num_states(), 0);
  std::deque<StateId> queue{d.initial()};
  parent[d.initial()] = -1;
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    if (d.is_accepting(q)) {
      Word w;
      for (StateId s = q; parent[s] >= 0; s = static_cast<StateId>(parent[s])) w.push_back(via[s]);
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (Symbol a = 0; a < k; ++a) {
      StateId r = d.next(q, a);
      if (parent[r] == -2) {
        parent[r] = q;
        via[r] = a;
        queue.push_back(r);
      }
    }
  }
  return std::nullopt;
}

/// counts[len][q] = number of words of length `len` leading from q to an
/// accepting state. Saturates at 2^62 so sampling stays well defined.
inline std::vector<std::vector<std::uint64_t>> completion_counts(const Dfa& d, std::size_t max_len) {
  constexpr std::uint64_t cap = std::uint64_t{1} << 62;
  const std::size_t k = d.alphabet().size();
  std::vector<std::vector<std::uint64_t>> counts(max_len + 1, std::vector<std::uint64_t>(d.num_states()));
  for (StateId q = 0; q < d.num_states(); ++q) counts[0][q] = d.is_accepting(q) ? 1 : 0;
  for (std::size_t len = 1; len <= max_len; ++len)
    for (StateId q = 0; q < d.num_states(); ++q) {
      std::uint64_t total = 0;
      for (Symbol a = 0; a < k; ++a) total = std::min(cap, total + counts[len - 1][d.next(q, a)]);
      counts[len][q] = total;
    }
  return counts;
}

/// Enumerates accepted words in shortlex order, up to `limit` words of length
/// at most `max_len`, skipping those for which `skip` returns true.
inline std::vector<Word> accepted_words(const Dfa& d, std::size_t limit, std::size_t max_len,
                                        const std::function<bool(const Word&)>& skip = {}) {
  std::vector<Word> out;
  if (limit == 0) return out;
  const std::size_t k = d.alphabet().size();
  auto counts = completion_counts(d, max_len);
  Word prefix;
  // Depth-first in symbol order, pruned to prefixes that can still complete.
  std::function<bool(StateId, std::size_t)> walk = [&](StateId q, std::size_t remaining) {
    if (remaining == 0) {
      if (d.is_accepting(q) && !(skip && skip(prefix))) out.push_back(prefix);
      return out.size() >= limit;
    }
    for (Symbol a = 0; a < k; ++a) {
      StateId r = d.next(q, a);
      if (counts[remaining - 1][r] == 0) continue;
      prefix.push_back(a);
      bool done = walk(r, remaining - 1);
      prefix.pop_back();
      if (done) return true;
    }
    return false;
  };
  for (std::size_t len = 0; len <= max_len; ++len) {
    if (counts[len][d.initial()] == 0) continue;
    if (walk(d.initial(), len)) break;
  }
  return out;
}

/// Shortlex-least word in L[d1] ⊖ L[d2]; absent iff the languages agree.
inline std::optional<Word> distinguishing_word(const Dfa& d1, const Dfa& d2) {
  return shortest_accepted(symmetric_difference(d1, d2));
}

/// Seeded variant: uniform sample among the symmetric-difference words of
/// minimal length.
template <class Rng>
std::optional<Word> distinguishing_word(const Dfa& d1, const Dfa& d2, Rng& rng) {
  Dfa diff = symmetric_difference(d1, d2);
  auto shortest = shortest_accepted(diff);
  if (!shortest) return std::nullopt;
  const std::size_t len = shortest->size();
  auto counts = completion_counts(diff, len);
  Word w;
  StateId q = diff.initial();
  for (std::size_t remaining = len; remaining > 0; --remaining) {
    std::uniform_int_distribution<std::uint64_t> pick(0, counts[remaining][q] - 1);
    std::uint64_t r = pick(rng);
    for (Symbol a = 0; a < diff.alphabet().size(); ++a) {
      std::uint64_t c = counts[remaining - 1][diff.next(q, a)];
      if (r < c) {
        w.push_back(a);
        q = diff.next(q, a);
        break;
      }
      r -= c;
    }
  }
  return w;
}

inline bool equivalent(const Dfa& d1, const Dfa& d2) { return !distinguishing_word(d1, d2).has_value(); }

/// Restricts to reachable states and renumbers them in BFS order from the
/// initial state, visiting symbols in canonical order.
inline Dfa canonical(const Dfa& d) {
  const std::size_t k = d.alphabet().size();
  std::vector<std::int64_t> id(d.num_states(), -1);
  std::vector<StateId> order{d.initial()};
  id[d.initial()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Symbol a = 0; a < k; ++a) {
      StateId r = d.next(order[i], a);
      if (id[r] < 0) {
        id[r] = static_cast<std::int64_t>(order.size());
        order.push_back(r);
      }
    }
  std::vector<bool> acc(order.size());
  std::vector<StateId> table(order.size() * k);
  for (std::size_t i = 0; i < order.size(); ++i) {
    acc[i] = d.is_accepting(order[i]);
    for (Symbol a = 0; a < k; ++a) table[i * k + a] = static_cast<StateId>(id[d.next(order[i], a)]);
  }
  return Dfa(d.alphabet(), order.size(), 0, std::move(acc), std::move(table));
}

/// Minimal language-equivalent DFA in canonical numbering (Moore partition
/// refinement on the reachable part).
inline Dfa minimize(const Dfa& d) {
  Dfa r = canonical(d);
  const std::size_t n = r.num_states(), k = r.alphabet().size();
  std::vector<std::uint32_t> block(n);
  for (StateId q = 0; q < n; ++q) block[q] = r.is_accepting(q) ? 1 : 0;
  std::size_t num_blocks = 0;
  while (true) {
    std::map<std::vector<std::uint32_t>, std::uint32_t> signature_ids;
    std::vector<std::uint32_t> next(n);
    for (StateId q = 0; q < n; ++q) {
      std::vector<std::uint32_t> sig{block[q]};
      for (Symbol a = 0; a < k; ++a) sig.push_back(block[r.next(q, a)]);
      auto [it, fresh] = signature_ids.emplace(std::move(sig), static_cast<std::uint32_t>(signature_ids.size()));
      next[q] = it->second;
    }
    std::size_t count = signature_ids.size();
    block.swap(next);
    if (count == num_blocks) break;
    num_blocks = count;
  }
  std::vector<bool> acc(num_blocks);
  std::vector<StateId> table(num_blocks * k);
  for (StateId q = 0; q < n; ++q) {
    acc[block[q]] = r.is_accepting(q);
    for (Symbol a = 0; a < k; ++a) table[block[q] * k + a] = block[r.next(q, a)];
  }
  return canonical(Dfa(r.alphabet(), num_blocks, block[r.initial()], std::move(acc), std::move(table)));
}

/// Structural identity of canonical minimal forms.
inline bool isomorphic_minimal(const Dfa& d1, const Dfa& d2) { return minimize(d1) == minimize(d2); }

enum class SizeKind { StateCount, EncodingBits };

struct SizeMeasure {
  SizeKind kind = SizeKind::StateCount;
  double value = 0.0;
};

/// Size of the minimal equivalent DFA. EncodingBits counts the transition
/// table (n·|Σ|·⌈log2 n⌉) plus the accepting bitmap (n).
inline SizeMeasure size(const Dfa& d, SizeKind kind = SizeKind::StateCount) {
  Dfa m = minimize(d);
  const double n = static_cast<double>(m.num_states());
  if (kind == SizeKind::StateCount) return {kind, n};
  std::size_t bits_per_state = 0;
  while ((std::size_t{1} << bits_per_state) < m.num_states()) ++bits_per_state;
  return {kind, n * static_cast<double>(m.alphabet().size() * bits_per_state) + n};
}

}  // namespace taskdfa
