#include <gtest/gtest.h>

#include <cmath>

#include "taskdfa/planner.hpp"
#include "taskdfa/tomita.hpp"
#include "test_util.hpp"

using namespace taskdfa;

namespace {

std::string data(const char* name) { return read_file(std::string(TASKDFA_DATA_DIR) + "/" + name); }

// Exhaustive soft values over full histories: the DFA only ever sees the
// featurized word of the whole path.
struct BruteForce {
  const GridWorld& world;
  const Dfa& dfa;
  double reward;

  double value(std::size_t t, Cell at, const std::vector<Cell>& path) const {
    if (t == 0) return dfa.accepts(featurize_path(world, path)) ? reward : 0.0;
    double q[4];
    for (std::size_t a = 0; a < 4; ++a) q[a] = q_value(t, at, path, kActions[a]);
    return logsumexp(q, 4);
  }

  double q_value(std::size_t t, Cell at, const std::vector<Cell>& path, Action a) const {
    double acc = 0.0;
    for (const auto& o : world.step_distribution(at, a)) {
      auto next = path;
      next.push_back(o.cell);
      acc += o.probability * value(t - 1, o.cell, next);
    }
    return acc;
  }

  /// Log-probability of the demonstration, dynamics included.
  double log_prob(const Demonstration& d, std::size_t horizon) const {
    std::vector<Cell> path{d.start};
    double lp = 0.0;
    std::size_t t = horizon;
    for (const auto& s : d.steps) {
      Cell at = path.back();
      lp += q_value(t, at, path, s.action) - value(t, at, path);
      for (const auto& o : world.step_distribution(at, s.action))
        if (o.cell == s.result) lp += std::log(o.probability);
      path.push_back(s.result);
      --t;
    }
    return lp;
  }
};

double policy_row_sum(const SoftPolicy& p, std::size_t t, const ProductState& s) {
  double sum = 0.0;
  for (Action a : kActions) sum += p.prob(t, s, a);
  return sum;
}

}  // namespace

TEST(BruteForce, ThreeByThreeDemoHorizonEight) {
  GridWorld w = load_world(data("world3x3.map"));
  Demonstration d = load_demo(data("demo3x3.demo"), w);
  Dfa gt = ground_truth_dfa();
  BruteForce bf{w, gt, 10.0};
  SoftPolicy p(w, gt, 8, 10.0);
  EXPECT_NEAR(demo_log_prob(p, d), bf.log_prob(d, 8), 1e-9);
  EXPECT_NEAR(std::exp(demo_log_prob(p, d)), std::exp(bf.log_prob(d, 8)), 1e-9);
}

TEST(BruteForce, SlipStepsAndOtherDfas) {
  GridWorld w = load_world(data("world3x3.map"));
  Demonstration d = load_demo("0,0\nright 0,1\nright\nright\n", w);
  for (const Dfa& dfa : {ground_truth_dfa(), avoid_lava_reach_yellow_dfa(), reach_yellow_dfa()}) {
    for (double reward : {1.0, 10.0}) {
      BruteForce bf{w, dfa, reward};
      SoftPolicy p(w, dfa, 6, reward);
      EXPECT_NEAR(demo_log_prob(p, d), bf.log_prob(d, 6), 1e-9);
      EXPECT_NEAR(p.value(6, p.initial(d.start)), bf.value(6, d.start, {d.start}), 1e-9);
    }
  }
}

TEST(Policy, RowsSumToOneAndBellman) {
  GridWorld w = load_world(data("world8x8.map"));
  SoftPolicy p(w, ground_truth_dfa(), 12, 10.0);
  for (std::size_t t = 1; t <= p.horizon(); ++t)
    for (std::size_t i = 0; i < p.num_states(); ++i) {
      ProductState s = p.unpack(i);
      ASSERT_NEAR(policy_row_sum(p, t, s), 1.0, 1e-9);
      double q[4];
      for (std::size_t a = 0; a < 4; ++a) q[a] = p.q_value(t, s, kActions[a]);
      ASSERT_NEAR(p.value(t, s) - logsumexp(q, 4), 0.0, 1e-9);
    }
}

TEST(Policy, SingleCellIsUniform) {
  GridWorld w = load_world("y");
  Dfa universal = Dfa::constant(color_alphabet(), true);
  SoftPolicy p(w, universal, 5, 10.0);
  for (std::size_t t = 1; t <= 5; ++t)
    for (Action a : kActions) EXPECT_NEAR(p.prob(t, p.initial({0, 0}), a), 0.25, 1e-12);
}

TEST(Policy, EmptyLanguageGrowsByLogFour) {
  GridWorld w = load_world("..");
  SoftPolicy p(w, Dfa::constant(color_alphabet(), false), 6, 10.0);
  for (std::size_t t = 0; t <= 6; ++t) {
    EXPECT_NEAR(p.value(t, p.initial({0, 0})), static_cast<double>(t) * std::log(4.0), 1e-12);
    if (t) EXPECT_NEAR(p.prob(t, p.initial({1, 0}), Action::Left), 0.25, 1e-12);
  }
  Demonstration d = load_demo("0,0\nright\nleft\nright", w);
  EXPECT_NEAR(demo_nll(p, d), 3.0 * std::log(4.0), 1e-12);
}

TEST(Policy, StutteringRegistration) {
  GridWorld w = load_world("bby");
  SoftPolicy p(w, ground_truth_dfa(), 3, 10.0);
  ProductState s = p.initial({0, 0});
  ProductState wet = p.advance(s, {1, 0});
  EXPECT_EQ(wet.q, s.q);
  ProductState back = p.advance(wet, {0, 0});
  EXPECT_EQ(back.q, wet.q);
  EXPECT_FALSE(p.dfa().is_accepting(p.advance(back, {2, 0}).q));
}

TEST(Nll, OneSafePathGoesToZero) {
  GridWorld w = load_world("..y");
  Demonstration d = load_demo("0,0\nright\nright", w);
  SoftPolicy p(w, ground_truth_dfa(), 2, 50.0);
  EXPECT_LT(demo_nll(p, d), 0.1);
}

TEST(Nll, Errors) {
  GridWorld w = load_world("..y");
  Demonstration d = load_demo("0,0\nright\nright", w);
  EXPECT_THROW(SoftPolicy(w, ground_truth_dfa(), 0, 10.0), InputError);
  EXPECT_THROW(SoftPolicy(w, ground_truth_dfa(), 3, 0.0), InputError);
  SoftPolicy p(w, ground_truth_dfa(), 1, 10.0);
  EXPECT_THROW(demo_nll(p, d), InputError);
  EXPECT_THROW(SoftPolicy(w, tomita::dfa(1), 3, 10.0), AlphabetMismatch);
}

TEST(Energy, LambdaZeroAndSizeTerm) {
  GridWorld w = load_world(data("world8x8.map"));
  std::vector<Demonstration> demos{load_demo(data("demo_wet_detour.demo"), w)};
  PlannerConfig cfg;
  cfg.lambda = 0.0;
  EnergyReport e0 = energy(ground_truth_dfa(), w, demos, cfg);
  EXPECT_EQ(e0.total, e0.nll);
  EXPECT_GE(e0.nll, 0.0);
  cfg.lambda = 0.7;
  EnergyReport e = energy(ground_truth_dfa(), w, demos, cfg);
  EXPECT_EQ(e.nll, e0.nll);
  EXPECT_DOUBLE_EQ(e.size_term, 0.7 * 4);
  EXPECT_EQ(e.total, e.nll + e.size_term);
  cfg.lambda = -1.0;
  EXPECT_THROW(energy(ground_truth_dfa(), w, demos, cfg), InputError);
}

TEST(Energy, LanguageInvariance) {
  GridWorld w = load_world(data("world8x8.map"));
  std::vector<Demonstration> demos{load_demo(data("demo_wet_detour.demo"), w),
                                   load_demo(data("demo_direct.demo"), w)};
  Dfa gt = ground_truth_dfa();
  // Duplicate every state: same language, twice the states.
  const std::size_t n = gt.num_states(), k = gt.alphabet().size();
  std::vector<StateId> t(2 * n * k);
  std::vector<bool> acc(2 * n);
  for (StateId q = 0; q < 2 * n; ++q) {
    acc[q] = gt.is_accepting(q % n);
    for (Symbol a = 0; a < k; ++a)
      t[q * k + a] = static_cast<StateId>(gt.next(q % n, a) + (q < n ? n : 0));
  }
  Dfa doubled(gt.alphabet(), 2 * n, gt.initial(), acc, t);
  EXPECT_EQ(energy(doubled, w, demos).total, energy(gt, w, demos).total);
}

TEST(Energy, WetDetourPrefersGroundTruth) {
  GridWorld w = load_world(data("world8x8.map"));
  std::vector<Demonstration> demos{load_demo(data("demo_wet_detour.demo"), w)};
  PlannerConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_LT(energy(ground_truth_dfa(), w, demos, cfg).nll, energy(avoid_lava_reach_yellow_dfa(), w, demos, cfg).nll);
}

TEST(Energy, MonotoneRationality) {
  GridWorld w = load_world(data("world8x8.map"));
  Dfa gt = ground_truth_dfa();
  // The most likely slip-free path of the ground-truth policy.
  const std::size_t horizon = 16;
  SoftPolicy ref(w, gt, horizon, 10.0);
  Demonstration d{{0, 7}, {}};
  ProductState s = ref.initial(d.start);
  for (std::size_t t = horizon; t > 0 && !ref.dfa().is_accepting(s.q); --t) {
    Action best = kActions[0];
    for (Action a : kActions)
      if (ref.q_value(t, s, a) > ref.q_value(t, s, best)) best = a;
    Cell next = w.move(s.cell, best);
    d.steps.push_back({best, next});
    s = ref.advance(s, next);
  }
  ASSERT_TRUE(gt.accepts(featurize(w, d)));
  double prev = std::numeric_limits<double>::infinity();
  for (double reward : {5.0, 10.0, 20.0}) {
    double nll = demo_nll(SoftPolicy(w, gt, horizon, reward), d);
    EXPECT_LE(nll, prev) << reward;
    prev = nll;
  }
}
