#include <gtest/gtest.h>

#include <random>

#include "taskdfa/identify.hpp"
#include "taskdfa/tomita.hpp"
#include "taskdfa/world.hpp"
#include "test_util.hpp"

using namespace taskdfa;

namespace {

LabeledExamples appendix_examples() {
  LabeledExamples x(color_alphabet());
  for (const auto& w : testutil::appendix_positive()) x.add(w, true);
  for (const auto& w : testutil::appendix_negative()) x.add(w, false);
  return x;
}

LabeledExamples binary(std::initializer_list<const char*> pos, std::initializer_list<const char*> neg) {
  LabeledExamples x(tomita::binary_alphabet());
  auto word = [](std::string_view s) {
    Word w;
    for (char c : s) w.push_back(static_cast<Symbol>(c - '0'));
    return w;
  };
  for (auto w : pos) x.add(word(w), true);
  for (auto w : neg) x.add(word(w), false);
  return x;
}

}  // namespace

TEST(Apta, SingleAcceptingRoot) {
  Apta a = build_apta(binary({""}, {}));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.nodes[0].label, Apta::Label::Accept);
}

TEST(Apta, TwoChildren) {
  LabeledExamples x(color_alphabet());
  x.add({kYellow}, true);
  x.add({kBlue}, false);
  Apta a = build_apta(x);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.nodes[static_cast<std::size_t>(a.nodes[0].children[kYellow])].label, Apta::Label::Accept);
  EXPECT_EQ(a.nodes[static_cast<std::size_t>(a.nodes[0].children[kBlue])].label, Apta::Label::Reject);
}

TEST(Apta, AppendixExamplesNodeCount) {
  // Oracle: distinct prefixes of the nine words.
  std::set<Word> prefixes;
  auto words = testutil::appendix_positive();
  for (const auto& w : testutil::appendix_negative()) words.push_back(w);
  for (const auto& w : words)
    for (std::size_t i = 0; i <= w.size(); ++i) prefixes.insert(Word(w.begin(), w.begin() + static_cast<long>(i)));
  EXPECT_EQ(prefixes.size(), 15u);
  EXPECT_EQ(build_apta(appendix_examples()).size(), prefixes.size());
}

TEST(Apta, Contradiction) {
  LabeledExamples x(tomita::binary_alphabet());
  x.positive.insert({0});
  x.negative.insert({0});
  EXPECT_THROW(build_apta(x), ContradictionError);
  EXPECT_THROW(binary({"0"}, {"0"}), ContradictionError);
}

TEST(Encode, OneStateCases) {
  EXPECT_FALSE(solve_encoding(encode(build_apta(binary({""}, {"0"})), 1)));
  auto d = solve_encoding(encode(build_apta(binary({"", "0"}, {})), 1));
  ASSERT_TRUE(d);
  EXPECT_TRUE(equivalent(*d, Dfa::constant(tomita::binary_alphabet(), true)));
}

TEST(Encode, AppendixExamplesMinimumIsThreeStates) {
  // Exhaustive search over all complete DFAs with <= 3 states finds a
  // consistent 3-state DFA and no 2-state one.
  auto brute = testutil::brute_min_states(testutil::appendix_positive(), testutil::appendix_negative(), 4, 4);
  ASSERT_TRUE(brute.has_value());
  EXPECT_EQ(*brute, 3u);
  Apta a = build_apta(appendix_examples());
  for (std::size_t n = 1; n < *brute; ++n) EXPECT_FALSE(solve_encoding(encode(a, n))) << n;
  for (std::size_t n = *brute; n <= 4; ++n) {
    auto d = solve_encoding(encode(a, n));
    ASSERT_TRUE(d) << n;
    EXPECT_TRUE(consistent(*d, appendix_examples()));
  }
}

TEST(Encode, DimacsHeader) {
  auto enc = encode(build_apta(binary({"1"}, {"0"})), 2);
  std::string dimacs = enc.cnf().to_dimacs();
  EXPECT_EQ(dimacs.rfind("p cnf " + std::to_string(enc.cnf().num_vars) + " ", 0), 0u);
}

TEST(Block, UniqueOneStateSolution) {
  auto enc = encode(build_apta(binary({""}, {})), 1);
  enc.cnf().clauses.push_back({enc.z(0)});
  auto d = solve_encoding(enc);
  ASSERT_TRUE(d);
  block_solution(enc, *d);
  EXPECT_FALSE(solve_encoding(enc));
}

TEST(Block, SuccessiveModelsDiffer) {
  IdentifySession s(encode(build_apta(binary({"1"}, {"0"})), 3));
  std::vector<Dfa> seen;
  for (int i = 0; i < 20; ++i) {
    auto d = s.next();
    if (!d) break;
    for (const auto& prev : seen) EXPECT_FALSE(prev == *d);
    seen.push_back(*d);
    s.block(*d);
  }
  EXPECT_GE(seen.size(), 2u);
}

TEST(Block, AppendixExamplesAdmitSeveralLanguages) {
  auto r = find_minimal_dfas(appendix_examples(), 2, 4);
  ASSERT_EQ(r.dfas.size(), 2u);
  EXPECT_EQ(r.sizes[0], 3u);
  EXPECT_TRUE(distinguishing_word(r.dfas[0], r.dfas[1]).has_value());
  for (const auto& d : r.dfas) {
    EXPECT_TRUE(consistent(d, appendix_examples()));
    EXPECT_EQ(minimize(d).num_states(), d.num_states());
  }
  // The ground truth is itself a consistent 4-state DFA.
  EXPECT_TRUE(consistent(ground_truth_dfa(), appendix_examples()));
}

TEST(FindMinimal, OneVersusZero) {
  auto x = binary({"1"}, {"0"});
  auto r = find_minimal_dfas(x, 1);
  ASSERT_EQ(r.dfas.size(), 1u);
  EXPECT_EQ(r.sizes[0], 2u);
  EXPECT_TRUE(consistent(r.dfas[0], x));
  EXPECT_EQ(testutil::brute_min_states({{1}}, {{0}}, 2, 4), 2u);
}

TEST(FindMinimal, NoExamples) {
  auto r = find_minimal_dfas(LabeledExamples(color_alphabet()), 1);
  EXPECT_EQ(r.sizes[0], 1u);
  EXPECT_EQ(r.dfas[0].num_states(), 1u);
}

TEST(FindMinimal, AppendixExamples) {
  auto r = find_minimal_dfas(appendix_examples(), 1);
  EXPECT_EQ(r.sizes[0], 3u);
  EXPECT_TRUE(consistent(r.dfas[0], appendix_examples()));
}

TEST(FindMinimal, SizesNonDecreasingAndDistinct) {
  auto x = binary({"1", "11"}, {"0", "10"});
  auto r = find_minimal_dfas(x, 6, 4);
  for (std::size_t i = 0; i < r.dfas.size(); ++i) {
    EXPECT_TRUE(consistent(r.dfas[i], x));
    if (i) EXPECT_LE(r.sizes[i - 1], r.sizes[i]);
    for (std::size_t j = 0; j < i; ++j) EXPECT_TRUE(distinguishing_word(r.dfas[i], r.dfas[j]).has_value());
  }
}

TEST(FindMinimal, BoundExceeded) {
  auto x = binary({"", "00", "1", "100", "001", "1100"}, {"000", "1000", "0001", "1100010"});
  EXPECT_THROW(find_minimal_dfas(x, 1, 1), BoundExceeded);
}

TEST(FindMinimal, BoundHitFlag) {
  auto r = find_minimal_dfas(binary({""}, {}), 1000, 1);
  EXPECT_TRUE(r.stats.bound_hit);
  EXPECT_EQ(r.dfas.size(), 1u);
}

TEST(FindMinimal, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t k = 1 + trial % 2;
    Alphabet sigma = k == 1 ? Alphabet{"a"} : tomita::binary_alphabet();
    LabeledExamples x(sigma);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 8; ++i) x.try_add(testutil::random_word(rng, k, 5), coin(rng));
    std::vector<Word> pos(x.positive.begin(), x.positive.end()), neg(x.negative.begin(), x.negative.end());
    auto brute = testutil::brute_min_states(pos, neg, k, 4);
    auto r = find_minimal_dfas(x, 1, 6);
    EXPECT_TRUE(consistent(r.dfas[0], x));
    if (brute) EXPECT_EQ(r.sizes[0], *brute) << "trial " << trial;
    else EXPECT_GT(r.sizes[0], 4u);
  }
}

TEST(FindMinimal, Deterministic) {
  auto a = find_minimal_dfas(appendix_examples(), 3, 5);
  auto b = find_minimal_dfas(appendix_examples(), 3, 5);
  ASSERT_EQ(a.dfas.size(), b.dfas.size());
  for (std::size_t i = 0; i < a.dfas.size(); ++i) EXPECT_EQ(a.dfas[i], b.dfas[i]);
}
