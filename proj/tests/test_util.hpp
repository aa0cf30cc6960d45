#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "taskdfa/dfa.hpp"
#include "taskdfa/dfa_io.hpp"
#include "taskdfa/world.hpp"

namespace testutil {

using taskdfa::Alphabet;
using taskdfa::Dfa;
using taskdfa::StateId;
using taskdfa::Symbol;
using taskdfa::Word;

/// Visits every word of length <= max_len in shortlex order.
inline void for_each_word(const Alphabet& sigma, std::size_t max_len, const std::function<void(const Word&)>& fn) {
  const auto k = static_cast<Symbol>(sigma.size());
  for (std::size_t len = 0; len <= max_len; ++len) {
    Word w(len, 0);
    while (true) {
      fn(w);
      std::size_t i = len;
      while (i > 0 && w[i - 1] + 1 == k) w[--i] = 0;
      if (i == 0) break;
      ++w[i - 1];
    }
  }
}

inline std::optional<Word> brute_first_word(const Alphabet& sigma, std::size_t max_len,
                                            const std::function<bool(const Word&)>& pred) {
  std::optional<Word> found;
  for_each_word(sigma, max_len, [&](const Word& w) {
    if (!found && pred(w)) found = w;
  });
  return found;
}

/// The task rules stated directly on a color word: contains yellow, no red,
/// and (with rule 3) every blue before the first yellow has a green after it
/// and before that yellow.
inline bool rules_predicate(const Word& w, bool with_rule3) {
  using namespace taskdfa;
  auto first_yellow = std::find(w.begin(), w.end(), kYellow);
  if (first_yellow == w.end()) return false;
  if (std::find(w.begin(), w.end(), kRed) != w.end()) return false;
  if (!with_rule3) return true;
  for (auto it = w.begin(); it != first_yellow; ++it)
    if (*it == kBlue && std::find(it, first_yellow, kGreen) == first_yellow) return false;
  return true;
}

inline Word random_word(std::mt19937_64& rng, std::size_t k, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<Symbol> sym(0, static_cast<Symbol>(k - 1));
  Word w(len(rng));
  for (auto& s : w) s = sym(rng);
  return w;
}

inline Dfa random_dfa(std::mt19937_64& rng, const Alphabet& sigma, std::size_t n) {
  std::uniform_int_distribution<StateId> st(0, static_cast<StateId>(n - 1));
  std::bernoulli_distribution coin(0.5);
  std::vector<StateId> table(n * sigma.size());
  for (auto& t : table) t = st(rng);
  std::vector<bool> acc(n);
  for (std::size_t i = 0; i < n; ++i) acc[i] = coin(rng);
  return Dfa(sigma, n, st(rng), acc, table);
}

/// Smallest n <= max_n admitting a complete n-state DFA (initial state 0)
/// consistent with the examples, by enumerating every transition table.
inline std::optional<std::size_t> brute_min_states(const std::vector<Word>& positive,
                                                   const std::vector<Word>& negative, std::size_t k,
                                                   std::size_t max_n) {
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::vector<StateId> table(n * k, 0);
    while (true) {
      std::uint64_t pos = 0, neg = 0;
      auto end = [&](const Word& w) {
        StateId q = 0;
        for (Symbol a : w) q = table[q * k + a];
        return std::uint64_t{1} << q;
      };
      for (const auto& w : positive) pos |= end(w);
      for (const auto& w : negative) neg |= end(w);
      if ((pos & neg) == 0) return n;
      std::size_t i = 0;
      while (i < table.size() && table[i] + 1 == n) table[i++] = 0;
      if (i == table.size()) break;
      ++table[i];
    }
  }
  return std::nullopt;
}

/// The nine labeled words listed with the gridworld task prompt.
inline std::vector<Word> appendix_positive() {
  const auto& c = taskdfa::color_alphabet();
  return {c.parse_word("blue, green, yellow"), c.parse_word("yellow")};
}

inline std::vector<Word> appendix_negative() {
  const auto& c = taskdfa::color_alphabet();
  return {c.parse_word("blue, red, yellow"),        c.parse_word("red, yellow, green"),
          c.parse_word("blue, red, blue, red"),     c.parse_word("blue"),
          c.parse_word("blue, red, green, yellow"), c.parse_word("blue, green"),
          c.parse_word("blue, yellow")};
}

inline std::string data_path(const std::string& name) { return std::string(TASKDFA_DATA_DIR) + "/" + name; }

}  // namespace testutil
