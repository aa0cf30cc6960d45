#include <gtest/gtest.h>

#include <random>

#include "taskdfa/sat.hpp"

using taskdfa::sat::Result;
using taskdfa::sat::Solver;

namespace {

using Clauses = std::vector<std::vector<int>>;

bool satisfied(const Clauses& cs, const std::function<bool(int)>& value) {
  for (const auto& c : cs) {
    bool any = false;
    for (int l : c) any |= (value(std::abs(l)) == (l > 0));
    if (!any) return false;
  }
  return true;
}

bool brute_sat(const Clauses& cs, int vars) {
  for (std::uint32_t m = 0; m < (1u << vars); ++m)
    if (satisfied(cs, [&](int v) { return ((m >> (v - 1)) & 1u) != 0; })) return true;
  return false;
}

Clauses pigeonhole(int holes, Solver& s) {
  int pigeons = holes + 1;
  auto var = [&](int p, int h) { return p * holes + h + 1; };
  for (int i = 0; i < pigeons * holes; ++i) s.new_var();
  Clauses cs;
  for (int p = 0; p < pigeons; ++p) {
    std::vector<int> c;
    for (int h = 0; h < holes; ++h) c.push_back(var(p, h));
    cs.push_back(c);
  }
  for (int h = 0; h < holes; ++h)
    for (int p = 0; p < pigeons; ++p)
      for (int q = p + 1; q < pigeons; ++q) cs.push_back({-var(p, h), -var(q, h)});
  return cs;
}

}  // namespace

TEST(Sat, EmptyFormulaIsSat) {
  Solver s;
  s.new_var();
  EXPECT_EQ(s.solve(), Result::Sat);
}

TEST(Sat, EmptyClauseIsUnsat) {
  Solver s;
  s.new_var();
  s.add_clause({1});
  s.add_clause({-1});
  EXPECT_EQ(s.solve(), Result::Unsat);
}

TEST(Sat, PigeonholeUnsat) {
  for (int holes = 2; holes <= 6; ++holes) {
    Solver s;
    for (const auto& c : pigeonhole(holes, s)) s.add_clause(c);
    EXPECT_EQ(s.solve(), Result::Unsat) << holes;
  }
}

TEST(Sat, RandomThreeSatAgreesWithBruteForce) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    int vars = 4 + trial % 9;
    int clauses = static_cast<int>(vars * (3.0 + (trial % 5) * 0.5));
    std::uniform_int_distribution<int> v(1, vars);
    std::bernoulli_distribution sign(0.5);
    Clauses cs;
    for (int i = 0; i < clauses; ++i) {
      std::vector<int> c;
      for (int j = 0; j < 3; ++j) c.push_back(sign(rng) ? v(rng) : -v(rng));
      cs.push_back(c);
    }
    Solver s;
    for (int i = 0; i < vars; ++i) s.new_var();
    for (const auto& c : cs) s.add_clause(c);
    Result r = s.solve();
    ASSERT_EQ(r == Result::Sat, brute_sat(cs, vars)) << "trial " << trial;
    if (r == Result::Sat) EXPECT_TRUE(satisfied(cs, [&](int x) { return s.model_value(x); }));
  }
}

TEST(Sat, IncrementalModelEnumeration) {
  // x1 v x2 v x3 has exactly 7 models.
  Solver s;
  for (int i = 0; i < 3; ++i) s.new_var();
  s.add_clause({1, 2, 3});
  int models = 0;
  while (s.solve() == Result::Sat) {
    ++models;
    std::vector<int> block;
    for (int v = 1; v <= 3; ++v) block.push_back(s.model_value(v) ? -v : v);
    s.add_clause(block);
    ASSERT_LE(models, 8);
  }
  EXPECT_EQ(models, 7);
}

TEST(Sat, Deterministic) {
  auto run = [] {
    Solver s;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> v(1, 40);
    for (int i = 0; i < 40; ++i) s.new_var();
    for (int i = 0; i < 150; ++i) s.add_clause({v(rng), -v(rng), v(rng)});
    std::vector<bool> m;
    if (s.solve() == Result::Sat)
      for (int i = 1; i <= 40; ++i) m.push_back(s.model_value(i));
    return m;
  };
  EXPECT_EQ(run(), run());
}
