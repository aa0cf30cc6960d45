#pragma once

// Small incremental CDCL solver: two watched literals, first-UIP learning with
// local clause minimization, VSIDS, phase saving, Luby restarts and
// activity-based learnt clause reduction. Fully deterministic.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "taskdfa/error.hpp"

namespace taskdfa::sat {

enum class Result { Sat, Unsat };

class Solver {
 public:
  /// Allocates a variable; returns its 1-based DIMACS index.
  int new_var() {
    assign_.push_back(0);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    activity_.push_back(0.0);
    phase_.push_back(0);
    seen_.push_back(0);
    heap_index_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(static_cast<std::uint32_t>(assign_.size() - 1));
    return static_cast<int>(assign_.size());
  }

  int num_vars() const { return static_cast<int>(assign_.size()); }
  std::size_t num_clauses() const { return clauses_.size(); }
  std::uint64_t conflicts() const { return conflicts_; }

  /// Adds a DIMACS clause. Returns false once the formula is known unsat.
  bool add_clause(std::vector<int> dimacs) {
    if (!ok_) return false;
    cancel_until(0);
    std::vector<Lit> lits;
    lits.reserve(dimacs.size());
    for (int d : dimacs) {
      if (d == 0 || std::abs(d) > num_vars()) throw InputError("clause literal out of range");
      lits.push_back(to_lit(d));
    }
    std::sort(lits.begin(), lits.end());
    std::vector<Lit> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      Lit l = lits[i];
      if (i && l == lits[i - 1]) continue;
      if (i && l == (lits[i - 1] ^ 1u)) return true;  // tautology
      int v = value(l);
      if (v > 0) return true;
      if (v < 0) continue;
      kept.push_back(l);
    }
    if (kept.empty()) return ok_ = false;
    if (kept.size() == 1) {
      enqueue(kept[0], kNoReason);
      if (propagate() != kNoReason) ok_ = false;
      return ok_;
    }
    attach(new_clause(std::move(kept), false));
    return true;
  }

  Result solve() {
    model_.clear();
    if (!ok_) return Result::Unsat;
    cancel_until(0);
    if (propagate() != kNoReason) {
      ok_ = false;
      return Result::Unsat;
    }
    for (std::uint64_t restart = 0;; ++restart) {
      std::uint64_t budget = 100 * luby(restart);
      int status = search(budget);
      if (status != 0) {
        if (status > 0) {
          model_.assign(assign_.begin(), assign_.end());
          cancel_until(0);
          return Result::Sat;
        }
        ok_ = false;
        return Result::Unsat;
      }
      cancel_until(0);
      if (learnt_count_ > max_learnts_) reduce_db();
    }
  }

  /// Value of a variable in the last satisfying assignment.
  bool model_value(int var) const {
    if (var < 1 || static_cast<std::size_t>(var) > model_.size()) throw InputError("no model for variable");
    return model_[static_cast<std::size_t>(var - 1)] > 0;
  }

 private:
  using Lit = std::uint32_t;  // 2*var + sign (sign=1 means negated)
  static constexpr std::uint32_t kNoReason = ~std::uint32_t{0};

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool removed = false;
    double activity = 0.0;
  };

  static Lit to_lit(int d) { return static_cast<Lit>(2 * (std::abs(d) - 1) + (d < 0 ? 1 : 0)); }
  static std::uint32_t var(Lit l) { return l >> 1; }

  int value(Lit l) const {
    int a = assign_[var(l)];
    return (l & 1u) ? -a : a;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  std::uint32_t new_clause(std::vector<Lit> lits, bool learnt) {
    clauses_.push_back({std::move(lits), learnt, false, 0.0});
    if (learnt) ++learnt_count_;
    return static_cast<std::uint32_t>(clauses_.size() - 1);
  }

  void attach(std::uint32_t cref) {
    const auto& c = clauses_[cref].lits;
    watches_[c[0] ^ 1u].push_back(cref);
    watches_[c[1] ^ 1u].push_back(cref);
  }

  void enqueue(Lit l, std::uint32_t reason) {
    auto v = var(l);
    assign_[v] = (l & 1u) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  std::uint32_t propagate() {
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];
      Lit false_lit = p ^ 1u;
      auto& ws = watches_[p];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        std::uint32_t cref = ws[i++];
        auto& c = clauses_[cref].lits;
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (value(c[0]) > 0) {
          ws[j++] = cref;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k)
          if (value(c[k]) >= 0) {
            std::swap(c[1], c[k]);
            watches_[c[1] ^ 1u].push_back(cref);
            moved = true;
            break;
          }
        if (moved) continue;
        ws[j++] = cref;
        if (value(c[0]) < 0) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          return cref;
        }
        enqueue(c[0], cref);
      }
      ws.resize(j);
    }
    return kNoReason;
  }

  void bump_var(std::uint32_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_index_[v] >= 0) heap_up(static_cast<std::size_t>(heap_index_[v]));
  }

  void bump_clause(Clause& c) {
    if ((c.activity += clause_inc_) > 1e20) {
      for (auto& cl : clauses_)
        if (cl.learnt) cl.activity *= 1e-20;
      clause_inc_ *= 1e-20;
    }
  }

  bool redundant(Lit l) const {
    auto r = reason_[var(l)];
    if (r == kNoReason) return false;
    for (Lit q : clauses_[r].lits) {
      if (var(q) == var(l)) continue;
      if (!seen_[var(q)] && level_[var(q)] > 0) return false;
    }
    return true;
  }

  void analyze(std::uint32_t confl, std::vector<Lit>& learnt, int& back_level) {
    learnt.assign(1, 0);
    int path = 0;
    Lit p = 0;
    bool have_p = false;
    std::size_t index = trail_.size();
    do {
      auto& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (std::size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
        Lit q = c.lits[k];
        auto v = var(q);
        if (!seen_[v] && level_[v] > 0) {
          bump_var(v);
          seen_[v] = 1;
          if (level_[v] >= decision_level())
            ++path;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[var(trail_[--index])]) {
      }
      p = trail_[index];
      have_p = true;
      confl = reason_[var(p)];
      seen_[var(p)] = 0;
      --path;
    } while (path > 0);
    learnt[0] = p ^ 1u;

    std::vector<Lit> all(learnt.begin(), learnt.end());
    std::size_t j = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i)
      if (!redundant(learnt[i])) learnt[j++] = learnt[i];
    learnt.resize(j);
    for (Lit l : all) seen_[var(l)] = 0;

    back_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[var(learnt[i])] > level_[var(learnt[max_i])]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      back_level = level_[var(learnt[1])];
    }
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail_.size(); i-- > trail_lim_[static_cast<std::size_t>(lvl)];) {
      auto v = var(trail_[i]);
      phase_[v] = (trail_[i] & 1u) ? 0 : 1;
      assign_[v] = 0;
      reason_[v] = kNoReason;
      if (heap_index_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[static_cast<std::size_t>(lvl)]);
    trail_lim_.resize(static_cast<std::size_t>(lvl));
    qhead_ = trail_.size();
  }

  // 1 = sat, -1 = unsat, 0 = restart
  int search(std::uint64_t conflict_budget) {
    std::uint64_t local = 0;
    std::vector<Lit> learnt;
    while (true) {
      std::uint32_t confl = propagate();
      if (confl != kNoReason) {
        ++conflicts_;
        ++local;
        if (decision_level() == 0) return -1;
        int back = 0;
        analyze(confl, learnt, back);
        cancel_until(back);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          auto cref = new_clause(learnt, true);
          attach(cref);
          bump_clause(clauses_[cref]);
          enqueue(learnt[0], cref);
        }
        var_inc_ /= 0.95;
        clause_inc_ /= 0.999;
        continue;
      }
      if (local >= conflict_budget) return 0;
      std::int64_t next = -1;
      while (!heap_.empty()) {
        auto v = heap_pop();
        if (assign_[v] == 0) {
          next = v;
          break;
        }
      }
      if (next < 0) return 1;
      trail_lim_.push_back(trail_.size());
      auto v = static_cast<std::uint32_t>(next);
      enqueue(2 * v + (phase_[v] ? 0u : 1u), kNoReason);
    }
  }

  void reduce_db() {
    std::vector<std::uint32_t> learnts;
    for (std::uint32_t i = 0; i < clauses_.size(); ++i)
      if (clauses_[i].learnt && clauses_[i].lits.size() > 2) learnts.push_back(i);
    std::stable_sort(learnts.begin(), learnts.end(),
                     [&](auto a, auto b) { return clauses_[a].activity < clauses_[b].activity; });
    for (std::size_t i = 0; i < learnts.size() / 2; ++i) {
      clauses_[learnts[i]].removed = true;
      --learnt_count_;
    }
    // Level 0: no clause is a reason for a non-unit implication that matters
    // beyond this point, so reasons can be dropped during compaction.
    std::vector<std::uint32_t> remap(clauses_.size(), kNoReason);
    std::vector<Clause> kept;
    for (std::uint32_t i = 0; i < clauses_.size(); ++i)
      if (!clauses_[i].removed) {
        remap[i] = static_cast<std::uint32_t>(kept.size());
        kept.push_back(std::move(clauses_[i]));
      }
    clauses_ = std::move(kept);
    for (auto& r : reason_)
      if (r != kNoReason) r = remap[r];
    for (auto& w : watches_) w.clear();
    for (std::uint32_t i = 0; i < clauses_.size(); ++i) attach(i);
    max_learnts_ = max_learnts_ + max_learnts_ / 10;
  }

  static std::uint64_t luby(std::uint64_t i) {
    std::uint64_t size = 1, seq = 0;
    while (size < i + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != i) {
      size = (size - 1) >> 1;
      --seq;
      i = i % size;
    }
    return std::uint64_t{1} << seq;
  }

  // Max-heap on activity; ties broken by lower variable index.
  bool heap_less(std::uint32_t a, std::uint32_t b) const {
    return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
  }
  void heap_insert(std::uint32_t v) {
    heap_index_[v] = static_cast<std::int64_t>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
  }
  void heap_up(std::size_t i) {
    auto v = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_index_[heap_[i]] = static_cast<std::int64_t>(i);
      i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = static_cast<std::int64_t>(i);
  }
  std::uint32_t heap_pop() {
    auto top = heap_.front();
    heap_index_[top] = -1;
    auto last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      std::size_t i = 0;
      while (true) {
        std::size_t l = 2 * i + 1, r = l + 1, best = i;
        auto best_v = last;
        if (l < heap_.size() && heap_less(heap_[l], best_v)) best = l, best_v = heap_[l];
        if (r < heap_.size() && heap_less(heap_[r], best_v)) best = r, best_v = heap_[r];
        if (best == i) break;
        heap_[i] = heap_[best];
        heap_index_[heap_[i]] = static_cast<std::int64_t>(i);
        i = best;
      }
      heap_[i] = last;
      heap_index_[last] = static_cast<std::int64_t>(i);
    }
    return top;
  }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<int> assign_;
  std::vector<int> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<double> activity_;
  std::vector<std::uint8_t> phase_;
  std::vector<std::uint8_t> seen_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint32_t> heap_;
  std::vector<std::int64_t> heap_index_;
  std::vector<int> model_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  std::uint64_t conflicts_ = 0;
  std::size_t learnt_count_ = 0;
  std::size_t max_learnts_ = 2000;
};

}  // namespace taskdfa::sat
