#pragma once

#include <array>
#include <string>
#include <vector>

#include "taskdfa/dfa.hpp"

namespace taskdfa::tomita {

inline const Alphabet& binary_alphabet() {
  static const Alphabet a{"0", "1"};
  return a;
}

namespace detail {

inline Dfa make(std::size_t n, std::vector<bool> acc, std::vector<StateId> table) {
  return Dfa(binary_alphabet(), n, 0, std::move(acc), std::move(table));
}

}  // namespace detail

/// Hand-built minimal DFA of grammar `index` (1..7); columns are (0, 1).
///   1: 1*                       2: (10)*
///   3: no odd run of 1s is ever followed later by an odd run of 0s
///   4: no factor 000            5: even #0 and even #1
///   6: #0 - #1 ≡ 0 (mod 3)      7: 1*0*1*0*
inline Dfa dfa(int index) {
  switch (index) {
    case 1: return detail::make(2, {true, false}, {1, 0, 1, 1});
    case 2: return detail::make(3, {true, false, false}, {2, 1, 0, 2, 2, 2});
    case 3:
      // 0 clean, 1 odd run of 1s, 2 odd run of 0s after an odd 1-run,
      // 3 after an odd 1-run but not inside an odd 0-run, 4 dead
      return detail::make(5, {true, true, false, true, false}, {0, 1, 2, 0, 3, 4, 2, 3, 4, 4});
    case 4: return detail::make(4, {true, true, true, false}, {1, 0, 2, 0, 3, 0, 3, 3});
    case 5:
      // state = (#0 odd) + 2 (#1 odd)
      return detail::make(4, {true, false, false, false}, {1, 2, 0, 3, 3, 0, 2, 1});
    case 6: return detail::make(3, {true, false, false}, {1, 2, 2, 0, 0, 1});
    case 7: return detail::make(5, {true, true, true, true, false}, {1, 0, 1, 2, 3, 2, 3, 4, 4, 4});
    default: throw InputError("Tomita grammar index must be in 1..7");
  }
}

/// Natural-language rule for each grammar, with its good/bad example lists.
inline const std::string& rule_text(int index) {
  static const std::array<std::string, 7> rules{
      "The sequence should only contain the token '1'.\n\n"
      "Seeing any other token should result in rejecting the sequence.\n\n"
      "Good examples:\n- 1\n- 1,1\n- 1,1,1\n- 1,1,1,1\n\n"
      "Bad examples:\n- 0\n- 1,0\n- 0,1\n- 1,1,0",

      "Only accept sequences that are repetitions of 1,0.\n\n"
      "Good examples:\n- 1,0\n- 1,0,1,0\n- 1,0,1,0,1,0\n- 1,0,1,0,1,0,1,0\n\n"
      "Bad examples\n- 1\n- 1,0,1\n- 0,1,0\n- 1,0,1,0,0",

      "An odd consecutive sequence of 1 should NEVER be later \n"
      "followed by an odd consecutive sequence of zeros.\n\n"
      "Good examples:\n- 1,0,0\n- 0,1,1,0,1,0,0\n- 1,1,0,0,0\n- 0,0,0,1,1,0,0,0\n\n"
      "Bad examples\n- 1,0\n- 0,1,0\n- 1,1,1,0,0,0\n- 0,0,0,1,1,1,0,0,0",

      "The subsequence 0,0,0 never appears, i.e., no three zeros in a \nrow.\n\n"
      "Good examples:\n- 1\n- 1,0,0\n- 0,0,1\n- 1,1,0,0\n\n"
      "Bad Examples:\n- 0,0,0\n- 1,0,0,0\n- 0,0,0,1\n- 1,1,0,0,0,1,0",

      "There should be an even number of zeros AND an even number of \nones.\n\n"
      "Good examples:\n- 1,1\n- 0,0,1,1\n- 0,0,1,1,0,0\n- 1,1,1,1,0,0\n\n"
      "Bad Examples:\n- 0,0,0\n- 1,0,0,0\n- 1,0,0,1\n- 0,1,0,1,1",

      "The difference between the number of zeros and the number of \nones is a multiple for 4.\n\n"
      "Good examples:\n- 1,0\n- 0,1\n- 0,1,1,1,1\n- 0,1,0,1,1,1,1\n\n"
      "Bad Examples:\n- 1\n- 0\n- 0,1,1\n- 0,1,0,1,1",

      "The sequence 0,1 may appear at most once in the sequence.\n\n"
      "Good examples:\n- 1\n- 0,1\n- 0,0,1,0\n- 1,0,0\n\n"
      "Bad examples:\n- 0,1,0,1\n- 1,0,1,0,1\n- 0,1,1,0,1\n- 0,1,0,0,1",
  };
  if (index < 1 || index > 7) throw InputError("Tomita grammar index must be in 1..7");
  return rules[static_cast<std::size_t>(index - 1)];
}

/// The good and bad example words listed in a grammar's rule text.
struct ListedExamples {
  std::vector<Word> good;
  std::vector<Word> bad;
};

inline ListedExamples listed_examples(int index) {
  ListedExamples out;
  bool good = true, in_lists = false;
  for (auto raw : taskdfa::detail::split(rule_text(index), '\n')) {
    auto line = taskdfa::detail::trim(raw);
    if (line.rfind("Good", 0) == 0) {
      good = true;
      in_lists = true;
    } else if (line.rfind("Bad", 0) == 0) {
      good = false;
      in_lists = true;
    } else if (in_lists && line.rfind("- ", 0) == 0) {
      (good ? out.good : out.bad).push_back(binary_alphabet().parse_word(line.substr(2)));
    }
  }
  return out;
}

/// Meta-prompt wrapping a rule; `allow_unsure` keeps the sentence offering
/// the "unsure" response.
inline std::string meta_prompt(int index, bool allow_unsure) {
  std::string p =
      "The following is a description of a rule for labeling a \n"
      "sequence of ones and zeros as good (accepted) or \n"
      "bad (rejected).\n\n\n" +
      rule_text(index) +
      "\n\n\n"
      "According to the description, respond \"true\" if the sequence \n"
      "is good and \"false\" if the sequence is bad. ";
  if (allow_unsure) p += "If you are unsure \nor do not know the answer, respond \"unsure\". \n";
  p += "Do not respond with anything else.";
  return p;
}

}  // namespace taskdfa::tomita
