#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "taskdfa/dfa.hpp"

namespace taskdfa {

// Text format:
//   alphabet: red,yellow,blue,green
//   states: 4
//   initial: 0
//   accepting: 2
//   0 red -> 3
//   ...
// Lines starting with '#' are comments. Missing transitions are routed to an
// extra rejecting sink state appended after the declared ones.

inline std::string serialize(const Dfa& d) {
  std::ostringstream out;
  out << "alphabet: " << d.alphabet().join_word([&] {
    Word all;
    for (Symbol a = 0; a < d.alphabet().size(); ++a) all.push_back(a);
    return all;
  }()) << "\n";
  out << "states: " << d.num_states() << "\n";
  out << "initial: " << d.initial() << "\n";
  out << "accepting:";
  bool first = true;
  for (StateId q = 0; q < d.num_states(); ++q)
    if (d.is_accepting(q)) {
      out << (first ? " " : ",") << q;
      first = false;
    }
  out << "\n";
  for (StateId q = 0; q < d.num_states(); ++q)
    for (Symbol a = 0; a < d.alphabet().size(); ++a)
      out << q << ' ' << d.alphabet().name(a) << " -> " << d.next(q, a) << "\n";
  return out.str();
}

namespace detail {

inline std::size_t parse_index(std::string_view text, const char* what) {
  auto t = trim(text);
  if (t.empty()) throw InputError(std::string("missing ") + what);
  std::size_t value = 0;
  for (char c : t) {
    if (c < '0' || c > '9') throw InputError(std::string("bad ") + what + " '" + std::string(t) + "'");
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

}  // namespace detail

inline Dfa parse_dfa(std::string_view text) {
  std::optional<Alphabet> alphabet;
  std::optional<std::size_t> states;
  std::optional<std::size_t> initial;
  std::vector<std::size_t> accepting;
  struct Edge {
    std::size_t from;
    std::string symbol;
    std::size_t to;
  };
  std::vector<Edge> edges;

  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    auto arrow = line.find("->");
    if (arrow != std::string_view::npos) {
      auto lhs = detail::trim(line.substr(0, arrow));
      auto space = lhs.find_first_of(" \t");
      if (space == std::string_view::npos)
        throw InputError("line " + std::to_string(line_no) + ": expected 'from symbol -> to'");
      edges.push_back({detail::parse_index(lhs.substr(0, space), "source state"),
                       std::string(detail::trim(lhs.substr(space))),
                       detail::parse_index(line.substr(arrow + 2), "target state")});
      continue;
    }
    if (colon == std::string_view::npos)
      throw InputError("line " + std::to_string(line_no) + ": unrecognized '" + std::string(line) + "'");
    auto key = detail::trim(line.substr(0, colon));
    auto value = detail::trim(line.substr(colon + 1));
    if (key == "alphabet") {
      std::vector<std::string> names;
      for (auto part : detail::split(value, ',')) names.emplace_back(detail::trim(part));
      alphabet.emplace(std::move(names));
    } else if (key == "states") {
      states = detail::parse_index(value, "state count");
    } else if (key == "initial") {
      initial = detail::parse_index(value, "initial state");
    } else if (key == "accepting") {
      if (!value.empty())
        for (auto part : detail::split(value, ',')) accepting.push_back(detail::parse_index(part, "accepting state"));
    } else {
      throw InputError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!alphabet) throw InputError("missing 'alphabet:' line");
  if (!states || *states == 0) throw InputError("missing or zero 'states:' line");
  if (!initial) throw InputError("missing 'initial:' line");

  const std::size_t n = *states, k = alphabet->size();
  constexpr StateId unset = ~StateId{0};
  std::vector<StateId> table(n * k, unset);
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) throw InputError("transition references state beyond 'states:'");
    Symbol a = alphabet->symbol(e.symbol);
    auto& slot = table[e.from * k + a];
    if (slot != unset && slot != e.to) throw InputError("conflicting transitions out of state " + std::to_string(e.from));
    slot = static_cast<StateId>(e.to);
  }
  std::vector<bool> acc(n, false);
  for (auto q : accepting) {
    if (q >= n) throw InputError("accepting state out of range");
    acc[q] = true;
  }
  if (std::find(table.begin(), table.end(), unset) != table.end()) {
    const auto sink = static_cast<StateId>(n);
    for (auto& t : table)
      if (t == unset) t = sink;
    table.insert(table.end(), k, sink);
    acc.push_back(false);
    return Dfa(*alphabet, n + 1, static_cast<StateId>(*initial), std::move(acc), std::move(table));
  }
  return Dfa(*alphabet, n, static_cast<StateId>(*initial), std::move(acc), std::move(table));
}

/// Graphviz rendering: accepting states are double circles; an invisible
/// node points at the initial state with an edge labeled "start".
/// Parallel edges are merged into one comma-separated label.
inline std::string to_dot(const Dfa& d, std::string_view name = "dfa") {
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __start [shape=point, style=invis];\n";
  for (StateId q = 0; q < d.num_states(); ++q)
    out << "  q" << q << " [label=\"" << q << "\"" << (d.is_accepting(q) ? ", peripheries=2" : "") << "];\n";
  out << "  __start -> q" << d.initial() << " [label=\"start\"];\n";
  for (StateId q = 0; q < d.num_states(); ++q) {
    std::map<StateId, std::string> labels;
    for (Symbol a = 0; a < d.alphabet().size(); ++a) {
      auto& l = labels[d.next(q, a)];
      if (!l.empty()) l += ",";
      l += d.alphabet().name(a);
    }
    for (const auto& [to, label] : labels) out << "  q" << q << " -> q" << to << " [label=\"" << label << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

}  // namespace taskdfa
