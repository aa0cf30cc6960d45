#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "taskdfa/dfa.hpp"
#include "taskdfa/world.hpp"

namespace taskdfa {

/// Agent position plus the DFA state reached by the registered colors.
/// `last` is 0 before any color registers, otherwise symbol + 1.
struct ProductState {
  Cell cell;
  StateId q = 0;
  std::uint8_t last = 0;
  bool operator==(const ProductState&) const = default;
};

struct PlannerConfig {
  double lambda = 0.7;
  double accept_reward = 10.0;
  /// Fixed horizon for every demonstration; 0 gives each demonstration its
  /// own length plus `horizon_slack`.
  std::size_t horizon = 0;
  std::size_t horizon_slack = 8;
};

inline double logsumexp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

/// Finite-horizon maximum-entropy policy on world × DFA. Time is counted as
/// steps remaining: V(0, s) is the terminal reward.
class SoftPolicy {
 public:
  SoftPolicy(const GridWorld& world, const Dfa& dfa, std::size_t horizon, double accept_reward)
      : world_(world), dfa_(minimize(dfa)), horizon_(horizon), reward_(accept_reward) {
    if (horizon_ < 1) throw InputError("planning horizon must be at least 1");
    if (!(accept_reward > 0.0)) throw InputError("accept_reward must be positive");
    if (dfa_.alphabet() != color_alphabet()) throw AlphabetMismatch();
    n_ = world_.num_cells() * dfa_.num_states() * kLast;
    v_.assign((horizon_ + 1) * n_, 0.0);
    qv_.assign(horizon_ * n_ * kActions.size(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) v_[i] = dfa_.is_accepting(unpack(i).q) ? reward_ : 0.0;

    // Successors do not depend on t; cache them.
    std::vector<std::vector<std::pair<std::size_t, double>>> succ(n_ * kActions.size());
    for (std::size_t i = 0; i < n_; ++i) {
      ProductState s = unpack(i);
      for (std::size_t a = 0; a < kActions.size(); ++a)
        for (const auto& o : world_.step_distribution(s.cell, kActions[a]))
          succ[i * kActions.size() + a].emplace_back(pack(advance(s, o.cell)), o.probability);
    }
    for (std::size_t t = 1; t <= horizon_; ++t) {
      const double* prev = &v_[(t - 1) * n_];
      for (std::size_t i = 0; i < n_; ++i) {
        double* q = &qv_[((t - 1) * n_ + i) * kActions.size()];
        for (std::size_t a = 0; a < kActions.size(); ++a) {
          double acc = 0.0;
          for (const auto& [j, p] : succ[i * kActions.size() + a]) acc += p * prev[j];
          q[a] = acc;
        }
        v_[t * n_ + i] = logsumexp(q, kActions.size());
      }
    }
  }

  const GridWorld& world() const { return world_; }
  const Dfa& dfa() const { return dfa_; }
  std::size_t horizon() const { return horizon_; }
  double accept_reward() const { return reward_; }
  std::size_t num_states() const { return n_; }

  /// Product state on standing at `start`; its color registers.
  ProductState initial(Cell start) const {
    return advance(ProductState{start, dfa_.initial(), 0}, start);
  }

  /// Moves to `next` and registers its color unless it is uncolored or
  /// repeats the last registered color.
  ProductState advance(ProductState s, Cell next) const {
    s.cell = next;
    Color c = world_.color(next);
    if (c == Color::None) return s;
    Symbol sym = color_symbol(c);
    if (s.last == sym + 1) return s;
    s.q = dfa_.next(s.q, sym);
    s.last = static_cast<std::uint8_t>(sym + 1);
    return s;
  }

  double value(std::size_t t, const ProductState& s) const { return v_.at(check(t) * n_ + pack(s)); }

  double q_value(std::size_t t, const ProductState& s, Action a) const {
    if (t == 0) throw InputError("no action is taken with zero steps remaining");
    return qv_.at(((check(t) - 1) * n_ + pack(s)) * kActions.size() + static_cast<std::size_t>(a));
  }

  double log_prob(std::size_t t, const ProductState& s, Action a) const { return q_value(t, s, a) - value(t, s); }
  double prob(std::size_t t, const ProductState& s, Action a) const { return std::exp(log_prob(t, s, a)); }

  std::size_t pack(const ProductState& s) const {
    return (world_.index(s.cell) * dfa_.num_states() + s.q) * kLast + s.last;
  }

  ProductState unpack(std::size_t i) const {
    ProductState s;
    s.last = static_cast<std::uint8_t>(i % kLast);
    i /= kLast;
    s.q = static_cast<StateId>(i % dfa_.num_states());
    s.cell = world_.cell(i / dfa_.num_states());
    return s;
  }

 private:
  static constexpr std::size_t kLast = 5;

  std::size_t check(std::size_t t) const {
    if (t > horizon_) throw InputError("time step beyond the planning horizon");
    return t;
  }

  GridWorld world_;
  Dfa dfa_;
  std::size_t horizon_;
  double reward_;
  std::size_t n_ = 0;
  std::vector<double> v_;
  std::vector<double> qv_;
};

inline SoftPolicy soft_value_iteration(const GridWorld& world, const Dfa& dfa, std::size_t horizon,
                                       double accept_reward = 10.0) {
  return SoftPolicy(world, dfa, horizon, accept_reward);
}

/// −Σ log π(a_t | s_t) along the demonstration, started with `steps_left`
/// steps remaining (default: the policy horizon). Dynamics terms are left out.
inline double demo_nll(const SoftPolicy& policy, const Demonstration& demo, std::size_t steps_left = 0) {
  std::size_t t = steps_left ? steps_left : policy.horizon();
  if (demo.steps.size() > t) throw InputError("demonstration is longer than the planning horizon");
  ProductState s = policy.initial(demo.start);
  double nll = 0.0;
  for (const auto& step : demo.steps) {
    double lp = policy.log_prob(t, s, step.action);
    if (!std::isfinite(lp)) throw NumericError("demonstrated action has probability zero");
    nll -= lp;
    s = policy.advance(s, step.result);
    --t;
  }
  return nll;
}

/// Full path log-probability: policy terms plus dynamics terms.
inline double demo_log_prob(const SoftPolicy& policy, const Demonstration& demo, std::size_t steps_left = 0) {
  double lp = -demo_nll(policy, demo, steps_left);
  Cell at = demo.start;
  for (const auto& step : demo.steps) {
    double p = 0.0;
    for (const auto& o : policy.world().step_distribution(at, step.action))
      if (o.cell == step.result) p += o.probability;
    lp += std::log(p);
    at = step.result;
  }
  return lp;
}

struct EnergyReport {
  double nll = 0.0;
  double size_term = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

inline std::size_t demo_horizon(const Demonstration& d, const PlannerConfig& cfg) {
  return cfg.horizon ? cfg.horizon : d.steps.size() + cfg.horizon_slack;
}

/// U(D, ξ) = Σ demo_nll + λ · size(D), planned on the minimized DFA.
inline EnergyReport energy(const Dfa& dfa, const GridWorld& world, const std::vector<Demonstration>& demos,
                           const PlannerConfig& cfg = {}) {
  if (cfg.lambda < 0.0) throw InputError("lambda must be non-negative");
  std::size_t h = 1;
  for (const auto& d : demos) h = std::max(h, demo_horizon(d, cfg));
  SoftPolicy policy(world, dfa, h, cfg.accept_reward);
  EnergyReport r;
  r.lambda = cfg.lambda;
  for (const auto& d : demos) r.nll += demo_nll(policy, d, demo_horizon(d, cfg));
  r.size_term = cfg.lambda * static_cast<double>(policy.dfa().num_states());
  r.total = r.nll + r.size_term;
  return r;
}

}  // namespace taskdfa
