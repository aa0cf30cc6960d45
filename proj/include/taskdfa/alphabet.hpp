#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "taskdfa/error.hpp"

namespace taskdfa {

using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Ordered, duplicate-free list of symbol names. The order is canonical: it
/// fixes symbol ids, tie-breaking in searches, and serialization.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw InputError("alphabet must not be empty");
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& n = names_[i];
      if (n.empty() || n.find_first_of(",[] \t\n") != std::string::npos)
        throw InputError("invalid symbol name '" + n + "'");
      if (!index_.emplace(n, static_cast<Symbol>(i)).second)
        throw InputError("duplicate symbol name '" + n + "'");
    }
  }

  Alphabet(std::initializer_list<const char*> names)
      : Alphabet(std::vector<std::string>(names.begin(), names.end())) {}

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  const std::string& name(Symbol s) const {
    if (s >= names_.size()) throw InputError("symbol id " + std::to_string(s) + " outside alphabet");
    return names_[s];
  }

  Symbol symbol(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw InputError("unknown symbol '" + std::string(name) + "'");
    return it->second;
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  bool operator==(const Alphabet& other) const { return names_ == other.names_; }

  /// Parses "a,b,c" (spaces and surrounding brackets tolerated). An empty
  /// string or "[]" is the empty word.
  Word parse_word(std::string_view text) const {
    auto t = detail::trim(text);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = detail::trim(t.substr(1, t.size() - 2));
    Word w;
    if (t.empty()) return w;
    for (auto part : detail::split(t, ',')) w.push_back(symbol(detail::trim(part)));
    return w;
  }

  /// Bracketed rendering used in prompts and transcripts: "[red, red, blue]".
  std::string format_word(const Word& w) const {
    std::string out = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out += ", ";
      out += name(w[i]);
    }
    return out + "]";
  }

  /// Compact rendering used in files: "red,red,blue".
  std::string join_word(const Word& w) const {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out += ',';
      out += name(w[i]);
    }
    return out;
  }

  void check_word(const Word& w) const {
    for (Symbol s : w)
      if (s >= names_.size()) throw InputError("symbol id " + std::to_string(s) + " outside alphabet");
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Symbol> index_;
};

/// Replaces every maximal run of equal adjacent symbols with one symbol.
inline Word stutter_collapse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Symbol s : w)
    if (out.empty() || out.back() != s) out.push_back(s);
  return out;
}

/// Shortlex order: shorter first, then lexicographic by symbol id.
struct ShortLex {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

}  // namespace taskdfa
