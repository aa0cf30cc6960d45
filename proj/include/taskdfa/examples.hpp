#pragma once

#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "taskdfa/dfa.hpp"

namespace taskdfa {

using WordSet = std::set<Word, ShortLex>;

/// Disjoint positive/negative word sets over one alphabet.
struct LabeledExamples {
  Alphabet alphabet;
  WordSet positive;
  WordSet negative;

  LabeledExamples() = default;
  explicit LabeledExamples(Alphabet a) : alphabet(std::move(a)) {}

  /// Inserts a labeled word; throws ContradictionError if it already carries
  /// the opposite label.
  void add(const Word& w, bool label) {
    alphabet.check_word(w);
    auto& mine = label ? positive : negative;
    const auto& other = label ? negative : positive;
    if (other.count(w))
      throw ContradictionError("word " + alphabet.format_word(w) + " labeled both positive and negative");
    mine.insert(w);
  }

  /// Like add(), but returns false instead of throwing.
  bool try_add(const Word& w, bool label) {
    if ((label ? negative : positive).count(w)) return false;
    (label ? positive : negative).insert(w);
    return true;
  }

  std::optional<bool> label_of(const Word& w) const {
    if (positive.count(w)) return true;
    if (negative.count(w)) return false;
    return std::nullopt;
  }

  std::size_t size() const { return positive.size() + negative.size(); }

  bool disjoint() const {
    for (const auto& w : positive)
      if (negative.count(w)) return false;
    return true;
  }

  /// Union; throws ContradictionError on conflicting labels.
  void merge(const LabeledExamples& other) {
    for (const auto& w : other.positive) add(w, true);
    for (const auto& w : other.negative) add(w, false);
  }
};

/// Accepts every positive and rejects every negative example.
inline bool consistent(const Dfa& d, const LabeledExamples& x) {
  for (const auto& w : x.positive)
    if (!d.accepts(w)) return false;
  for (const auto& w : x.negative)
    if (d.accepts(w)) return false;
  return true;
}

// JSON examples file:
//   {"alphabet": ["red", "yellow"], "positive": ["yellow", ""], "negative": ["red,yellow"]}
// Words are comma-separated symbol names; "" is the empty word.

inline nlohmann::json examples_to_json(const LabeledExamples& x) {
  nlohmann::json j;
  j["alphabet"] = x.alphabet.names();
  j["positive"] = nlohmann::json::array();
  j["negative"] = nlohmann::json::array();
  for (const auto& w : x.positive) j["positive"].push_back(x.alphabet.join_word(w));
  for (const auto& w : x.negative) j["negative"].push_back(x.alphabet.join_word(w));
  return j;
}

inline LabeledExamples examples_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("alphabet")) throw InputError("examples file needs an 'alphabet' list");
  LabeledExamples x{Alphabet(j.at("alphabet").get<std::vector<std::string>>())};
  for (const char* key : {"positive", "negative"}) {
    if (!j.contains(key)) continue;
    for (const auto& w : j.at(key)) {
      if (!w.is_string()) throw InputError(std::string("'") + key + "' entries must be strings");
      x.add(x.alphabet.parse_word(w.get<std::string>()), std::string(key) == "positive");
    }
  }
  return x;
}

inline LabeledExamples parse_examples(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("examples file: ") + e.what());
  }
  return examples_from_json(j);
}

}  // namespace taskdfa
