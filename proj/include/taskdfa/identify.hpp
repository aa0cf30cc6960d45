#pragma once

#include <chrono>
#include <sstream>
#include <vector>

#include "taskdfa/dfa.hpp"
#include "taskdfa/examples.hpp"
#include "taskdfa/sat.hpp"

namespace taskdfa {

/// Augmented prefix-tree acceptor: one node per distinct prefix of the
/// example words. Node 0 is the empty word.
struct Apta {
  enum class Label : std::uint8_t { Unlabeled, Accept, Reject };
  static constexpr std::int64_t kNone = -1;

  struct Node {
    std::int64_t parent = kNone;
    Symbol symbol = 0;
    Label label = Label::Unlabeled;
    std::vector<std::int64_t> children;
  };

  Alphabet alphabet;
  std::vector<Node> nodes;

  std::size_t size() const { return nodes.size(); }
};

inline Apta build_apta(const LabeledExamples& x) {
  Apta apta;
  apta.alphabet = x.alphabet;
  const std::size_t k = x.alphabet.size();
  apta.nodes.push_back({Apta::kNone, 0, Apta::Label::Unlabeled, std::vector<std::int64_t>(k, Apta::kNone)});
  auto insert = [&](const Word& w, Apta::Label label) {
    x.alphabet.check_word(w);
    std::size_t v = 0;
    for (Symbol a : w) {
      auto child = apta.nodes[v].children[a];
      if (child == Apta::kNone) {
        child = static_cast<std::int64_t>(apta.nodes.size());
        apta.nodes[v].children[a] = child;
        apta.nodes.push_back({static_cast<std::int64_t>(v), a, Apta::Label::Unlabeled,
                              std::vector<std::int64_t>(k, Apta::kNone)});
      }
      v = static_cast<std::size_t>(child);
    }
    auto& node = apta.nodes[v];
    if (node.label != Apta::Label::Unlabeled && node.label != label)
      throw ContradictionError("word " + x.alphabet.format_word(w) + " labeled both positive and negative");
    node.label = label;
  };
  for (const auto& w : x.positive) insert(w, Apta::Label::Accept);
  for (const auto& w : x.negative) insert(w, Apta::Label::Reject);
  return apta;
}

/// Propositional formula in DIMACS convention.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  std::string to_dimacs() const {
    std::ostringstream out;
    out << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
    for (const auto& c : clauses) {
      for (int l : c) out << l << ' ';
      out << "0\n";
    }
    return out.str();
  }
};

/// APTA-coloring encoding of "an n-state complete DFA consistent with the
/// APTA": x[v,i] node v has color i, y[a,i,j] transition i -a-> j, z[i]
/// state i accepts. Breadth-first symmetry breaking (parent variables p,
/// edge variables t, minimal-symbol variables m) forces state numbers to
/// follow BFS order, so every reachable DFA has a single model.
class DfaEncoding {
 public:
  DfaEncoding(const Apta& apta, std::size_t n) : alphabet_(apta.alphabet), nodes_(apta.size()), n_(n) {
    if (n == 0) throw InputError("state count must be positive");
    const std::size_t k = alphabet_.size();
    int next = 1;
    x_base_ = next;
    next += static_cast<int>(nodes_ * n);
    y_base_ = next;
    next += static_cast<int>(k * n * n);
    z_base_ = next;
    next += static_cast<int>(n);
    t_base_ = next;
    next += static_cast<int>(n * n);
    p_base_ = next;
    next += static_cast<int>(n * n);
    m_base_ = next;
    next += static_cast<int>(k * n * n);
    cnf_.num_vars = next - 1;
    auto& cl = cnf_.clauses;

    for (std::size_t v = 0; v < nodes_; ++v) {
      std::vector<int> some;
      for (std::size_t i = 0; i < n; ++i) some.push_back(x(v, i));
      cl.push_back(some);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) cl.push_back({-x(v, i), -x(v, j)});
    }
    cl.push_back({x(0, 0)});
    for (std::size_t v = 0; v < nodes_; ++v) {
      const auto& node = apta.nodes[v];
      if (node.label != Apta::Label::Unlabeled)
        for (std::size_t i = 0; i < n; ++i)
          cl.push_back({-x(v, i), node.label == Apta::Label::Accept ? z(i) : -z(i)});
      if (node.parent != Apta::kNone) {
        auto p = static_cast<std::size_t>(node.parent);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            cl.push_back({-x(p, i), -x(v, j), y(node.symbol, i, j)});
            cl.push_back({-x(p, i), -y(node.symbol, i, j), x(v, j)});
          }
      }
    }
    for (Symbol a = 0; a < k; ++a)
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> some;
        for (std::size_t j = 0; j < n; ++j) some.push_back(y(a, i, j));
        cl.push_back(some);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t h = j + 1; h < n; ++h) cl.push_back({-y(a, i, j), -y(a, i, h)});
      }
    add_bfs_symmetry_breaking();
    add_distinct_rows();
  }

  const Cnf& cnf() const { return cnf_; }
  Cnf& cnf() { return cnf_; }
  std::size_t num_states() const { return n_; }
  const Alphabet& alphabet() const { return alphabet_; }

  int x(std::size_t v, std::size_t i) const { return x_base_ + static_cast<int>(v * n_ + i); }
  int y(Symbol a, std::size_t i, std::size_t j) const { return y_base_ + static_cast<int>((a * n_ + i) * n_ + j); }
  int z(std::size_t i) const { return z_base_ + static_cast<int>(i); }

  /// Reads the DFA out of a satisfying assignment.
  template <class Model>
  Dfa decode(const Model& value) const {
    const std::size_t k = alphabet_.size();
    std::vector<StateId> table(n_ * k, 0);
    std::vector<bool> acc(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      acc[i] = value(z(i));
      for (Symbol a = 0; a < k; ++a)
        for (std::size_t j = 0; j < n_; ++j)
          if (value(y(a, i, j))) table[i * k + a] = static_cast<StateId>(j);
    }
    return Dfa(alphabet_, n_, 0, std::move(acc), std::move(table));
  }

  /// Clause forbidding exactly this (y, z) assignment.
  std::vector<int> blocking_clause(const Dfa& d) const {
    if (d.num_states() != n_) throw InputError("blocking a DFA of the wrong size");
    std::vector<int> c;
    for (std::size_t i = 0; i < n_; ++i) {
      c.push_back(d.is_accepting(static_cast<StateId>(i)) ? -z(i) : z(i));
      for (Symbol a = 0; a < alphabet_.size(); ++a) c.push_back(-y(a, i, d.next(static_cast<StateId>(i), a)));
    }
    return c;
  }

 private:
  int t(std::size_t i, std::size_t j) const { return t_base_ + static_cast<int>(i * n_ + j); }
  int p(std::size_t j, std::size_t i) const { return p_base_ + static_cast<int>(j * n_ + i); }
  int m(Symbol a, std::size_t i, std::size_t j) const { return m_base_ + static_cast<int>((a * n_ + i) * n_ + j); }

  void add_bfs_symmetry_breaking() {
    const std::size_t n = n_, k = alphabet_.size();
    auto& cl = cnf_.clauses;
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        // t[i,j] <-> OR_a y[a,i,j]
        std::vector<int> some{-t(i, j)};
        for (Symbol a = 0; a < k; ++a) {
          some.push_back(y(a, i, j));
          cl.push_back({-y(a, i, j), t(i, j)});
        }
        cl.push_back(some);
        // p[j,i] <-> t[i,j] AND NOT t[h,j] for all h < i
        cl.push_back({-p(j, i), t(i, j)});
        std::vector<int> back{p(j, i), -t(i, j)};
        for (std::size_t h = 0; h < i; ++h) {
          cl.push_back({-p(j, i), -t(h, j)});
          back.push_back(t(h, j));
        }
        cl.push_back(back);
      }
    for (std::size_t j = 1; j < n; ++j) {
      std::vector<int> some;
      for (std::size_t i = 0; i < j; ++i) some.push_back(p(j, i));
      cl.push_back(some);
    }
    // Parents are non-decreasing in state order.
    for (std::size_t j = 1; j + 1 < n; ++j)
      for (std::size_t i = 0; i < j; ++i)
        for (std::size_t h = 0; h < i; ++h) cl.push_back({-p(j, i), -p(j + 1, h)});
    if (k < 2) return;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (Symbol a = 0; a < k; ++a) {
          // m[a,i,j] <-> y[a,i,j] AND NOT y[b,i,j] for all b < a
          cl.push_back({-m(a, i, j), y(a, i, j)});
          std::vector<int> back{m(a, i, j), -y(a, i, j)};
          for (Symbol b = 0; b < a; ++b) {
            cl.push_back({-m(a, i, j), -y(b, i, j)});
            back.push_back(y(b, i, j));
          }
          cl.push_back(back);
        }
    // Siblings with the same parent are ordered by their minimal symbol.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j + 1 < n; ++j)
        for (Symbol a = 0; a < k; ++a)
          for (Symbol b = 0; b < a; ++b) cl.push_back({-p(j, i), -p(j + 1, i), -m(a, i, j), -m(b, i, j + 1)});
  }

  // No two states share acceptance and every successor.
  void add_distinct_rows() {
    const std::size_t n = n_, k = alphabet_.size();
    auto& cl = cnf_.clauses;
    auto fresh = [&] { return ++cnf_.num_vars; };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        int f1 = fresh(), f2 = fresh();
        cl.push_back({-f1, z(i)});
        cl.push_back({-f1, -z(j)});
        cl.push_back({-f2, -z(i)});
        cl.push_back({-f2, z(j)});
        std::vector<int> differ{f1, f2};
        for (Symbol a = 0; a < k; ++a)
          for (std::size_t h = 0; h < n; ++h) {
            int d = fresh();
            cl.push_back({-d, y(a, i, h)});
            cl.push_back({-d, -y(a, j, h)});
            differ.push_back(d);
          }
        cl.push_back(differ);
      }
  }

  Alphabet alphabet_;
  std::size_t nodes_;
  std::size_t n_;
  int x_base_ = 0, y_base_ = 0, z_base_ = 0, t_base_ = 0, p_base_ = 0, m_base_ = 0;
  Cnf cnf_;
};

inline DfaEncoding encode(const Apta& apta, std::size_t n) { return DfaEncoding(apta, n); }

/// Appends the blocking clause for `d` to the encoding's formula.
inline void block_solution(DfaEncoding& enc, const Dfa& d) { enc.cnf().clauses.push_back(enc.blocking_clause(d)); }

/// Solver bound to one encoding; clauses added later (blocking) are fed
/// incrementally.
class IdentifySession {
 public:
  explicit IdentifySession(DfaEncoding enc) : enc_(std::move(enc)) {
    for (int v = 0; v < enc_.cnf().num_vars; ++v) solver_.new_var();
    sync();
  }

  std::optional<Dfa> next() {
    sync();
    ++calls_;
    if (solver_.solve() != sat::Result::Sat) return std::nullopt;
    return enc_.decode([&](int v) { return solver_.model_value(v); });
  }

  void block(const Dfa& d) { block_solution(enc_, d); }

  std::size_t solver_calls() const { return calls_; }
  const DfaEncoding& encoding() const { return enc_; }

 private:
  void sync() {
    const auto& cl = enc_.cnf().clauses;
    for (; fed_ < cl.size(); ++fed_) solver_.add_clause(cl[fed_]);
  }

  DfaEncoding enc_;
  sat::Solver solver_;
  std::size_t fed_ = 0;
  std::size_t calls_ = 0;
};

/// Satisfiability of the n-state encoding.
inline std::optional<Dfa> solve_encoding(const DfaEncoding& enc) {
  IdentifySession s(enc);
  return s.next();
}

struct IdentifyStats {
  std::size_t solver_calls = 0;
  double solve_seconds = 0.0;
  bool bound_hit = false;  // fewer than k DFAs exist within max_states
};

struct IdentifyResult {
  std::vector<Dfa> dfas;
  std::vector<std::size_t> sizes;
  IdentifyStats stats;
};

struct IdentifyOptions {
  std::size_t max_states = 12;
  /// Sizes below this are skipped; only sound when no smaller DFA exists.
  std::size_t min_states = 1;
  std::size_t max_models_per_size = 4096;
};

/// Finds up to k pairwise non-equivalent DFAs consistent with `x`. The first
/// has the minimum state count; later ones come from the same size when
/// possible, then from successively larger sizes.
inline IdentifyResult find_minimal_dfas(const LabeledExamples& x, std::size_t k, IdentifyOptions opt = {}) {
  if (k == 0) throw InputError("k must be positive");
  const auto start = std::chrono::steady_clock::now();
  Apta apta = build_apta(x);
  IdentifyResult result;
  for (std::size_t n = std::max<std::size_t>(1, opt.min_states); n <= opt.max_states && result.dfas.size() < k; ++n) {
    IdentifySession session(encode(apta, n));
    for (std::size_t models = 0; models < opt.max_models_per_size && result.dfas.size() < k; ++models) {
      auto d = session.next();
      if (!d) break;
      session.block(*d);
      bool fresh = true;
      for (const auto& prev : result.dfas)
        if (equivalent(prev, *d)) {
          fresh = false;
          break;
        }
      if (!fresh) continue;
      result.dfas.push_back(*d);
      result.sizes.push_back(n);
    }
    result.stats.solver_calls += session.solver_calls();
  }
  result.stats.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.dfas.empty())
    throw BoundExceeded("no consistent DFA with at most " + std::to_string(opt.max_states) + " states");
  result.stats.bound_hit = result.dfas.size() < k;
  return result;
}

inline IdentifyResult find_minimal_dfas(const LabeledExamples& x, std::size_t k, std::size_t max_states) {
  IdentifyOptions opt;
  opt.max_states = max_states;
  return find_minimal_dfas(x, k, opt);
}

}  // namespace taskdfa
