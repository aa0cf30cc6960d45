#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "taskdfa/identify.hpp"
#include "taskdfa/oracle.hpp"

namespace taskdfa {

enum class LearnerBackend : std::uint8_t { VersionSpace, Lstar };

inline const char* to_string(LearnerBackend b) { return b == LearnerBackend::Lstar ? "lstar" : "vl"; }

inline LearnerBackend parse_backend(std::string_view s) {
  if (s == "vl" || s == "versionspace") return LearnerBackend::VersionSpace;
  if (s == "lstar") return LearnerBackend::Lstar;
  throw InputError("unknown learner backend '" + std::string(s) + "'");
}

struct LearnerReport {
  Dfa dfa;
  std::vector<QueryRecord> transcript;
  std::vector<std::size_t> candidate_sizes;
  bool converged = false;
  /// Charged oracle queries spent by this run.
  std::size_t queries = 0;
  /// Seed examples plus every Yes/No answer received.
  LabeledExamples knowledge;
};

namespace detail {

/// Per-run view of an oracle: tracks what this run spent against its own
/// budget and records every answer.
class QuerySession {
 public:
  QuerySession(Oracle& oracle, std::size_t budget) : oracle_(oracle), start_(oracle.queries_used()), budget_(budget) {}

  std::size_t spent() const { return oracle_.queries_used() - start_; }
  bool can_ask() const { return spent() < budget_ && !oracle_.exhausted(); }
  std::size_t remaining() const { return budget_ > spent() ? budget_ - spent() : 0; }

  MembershipAnswer ask(const Word& w) {
    MembershipAnswer a = oracle_.query(w);
    log.push_back({w, a, Provenance::Oracle, 0.0});
    return a;
  }

  std::vector<QueryRecord> log;

 private:
  Oracle& oracle_;
  std::size_t start_;
  std::size_t budget_;
};

inline Word sample_geometric_word(std::mt19937_64& rng, std::size_t k, double p) {
  std::geometric_distribution<std::size_t> len(p);
  std::uniform_int_distribution<Symbol> sym(0, static_cast<Symbol>(k - 1));
  Word w(std::min<std::size_t>(len(rng), 64));
  for (auto& s : w) s = sym(rng);
  return w;
}

inline void assert_consistent(const IdentifyResult& r, const LabeledExamples& x) {
  for (const auto& d : r.dfas)
    if (!consistent(d, x)) throw Error("internal: identified DFA is inconsistent with its examples");
}

}  // namespace detail

struct VlOptions {
  std::size_t max_states = 12;
  /// Alternative distinguishing words tried after an Unsure answer.
  std::size_t redraws = 3;
  std::size_t pool_size = 64;
  std::size_t max_word_length = 16;
  /// Share of the budget spent on candidate elimination; the rest labels
  /// randomly sampled words.
  double ce_fraction = 1.0;
  double length_p = 0.25;
  std::uint64_t seed = 0;
};

/// Version-space learner: repeatedly identifies two minimal consistent DFAs
/// and asks the oracle about a word they disagree on.
inline LearnerReport guess_dfa_vl(const LabeledExamples& examples, Oracle& oracle, std::size_t query_budget,
                                  const VlOptions& opt = {}) {
  LearnerReport report{Dfa::constant(examples.alphabet, false), {}, {}, false, 0, examples};
  auto& knowledge = report.knowledge;
  std::mt19937_64 rng(opt.seed);
  std::set<Word, ShortLex> unsure;
  const auto ce_budget = static_cast<std::size_t>(std::llround(opt.ce_fraction * static_cast<double>(query_budget)));
  detail::QuerySession session(oracle, query_budget);
  IdentifyOptions io;
  io.max_states = opt.max_states;
  std::size_t rounds = 0;
  auto learn = [&](const Word& w, MembershipAnswer a) {
    if (a == MembershipAnswer::Unsure) unsure.insert(w);
    else knowledge.add(w, a == MembershipAnswer::Yes);
  };

  try {
    for (std::size_t tries = 0; rounds < query_budget - ce_budget && session.can_ask() && tries < 4 * query_budget;
         ++tries) {
      Word w = detail::sample_geometric_word(rng, examples.alphabet.size(), opt.length_p);
      if (knowledge.label_of(w) || unsure.count(w)) continue;
      learn(w, session.ask(w));
      ++rounds;
    }
    while (rounds < query_budget && session.can_ask()) {
      auto r = find_minimal_dfas(knowledge, 2, io);
      io.min_states = r.sizes[0];
      detail::assert_consistent(r, knowledge);
      report.candidate_sizes.push_back(r.sizes[0]);
      if (r.dfas.size() < 2) {
        report.converged = true;
        break;
      }
      Dfa diff = symmetric_difference(r.dfas[0], r.dfas[1]);
      auto pool = accepted_words(diff, opt.pool_size, opt.max_word_length,
                                 [&](const Word& w) { return unsure.count(w) || knowledge.label_of(w); });
      if (pool.empty()) break;
      ++rounds;
      bool labeled = false;
      for (std::size_t attempt = 0; attempt <= opt.redraws && !labeled && session.can_ask(); ++attempt) {
        std::vector<Word> open;
        for (const auto& w : pool)
          if (!unsure.count(w)) open.push_back(w);
        if (open.empty()) break;
        Word w = open.front();
        if (attempt == 0) {
          if (auto d = distinguishing_word(r.dfas[0], r.dfas[1], rng); d && !unsure.count(*d)) w = *d;
        } else if (attempt > 1) {
          w = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        }
        MembershipAnswer a = session.ask(w);
        learn(w, a);
        labeled = a != MembershipAnswer::Unsure;
      }
    }
  } catch (const BudgetExhausted&) {
  }
  auto final = find_minimal_dfas(knowledge, 1, io);
  detail::assert_consistent(final, knowledge);
  report.dfa = final.dfas[0];
  report.transcript = std::move(session.log);
  report.queries = session.spent();
  return report;
}

enum class UnsureMapping : std::uint8_t { False, Skip };

struct EquivalenceResult {
  std::optional<Word> counterexample;
  /// False when the budget ran out before the check finished.
  bool verified = true;
};

struct CandidateEliminationOptions {
  /// Candidates may have up to this many states more than the hypothesis,
  std::size_t extra_states = 1;
  /// and never fewer than this many states in total.
  std::size_t min_bound = 5;
  std::size_t max_states = 12;
};

/// Approximate equivalence query: looks for DFAs consistent with everything
/// known that differ from the hypothesis and asks the oracle to settle each
/// difference. Answers are added to `knowledge`.
inline EquivalenceResult equivalence_by_candidate_elimination(const Dfa& hypothesis, LabeledExamples& knowledge,
                                                              Oracle& oracle, std::size_t remaining_budget,
                                                              std::vector<QueryRecord>* log = nullptr,
                                                              const CandidateEliminationOptions& opt = {}) {
  for (const auto& w : knowledge.positive)
    if (!hypothesis.accepts(w)) return {w, true};
  for (const auto& w : knowledge.negative)
    if (hypothesis.accepts(w)) return {w, true};
  detail::QuerySession session(oracle, remaining_budget);
  std::set<Word, ShortLex> unsure;
  const std::size_t bound =
      std::min(opt.max_states, std::max(opt.min_bound, minimize(hypothesis).num_states() + opt.extra_states));
  try {
    while (true) {
      auto r = find_minimal_dfas(knowledge, 2, bound);
      detail::assert_consistent(r, knowledge);
      std::optional<Word> query;
      for (const auto& c : r.dfas) {
        auto pool = accepted_words(symmetric_difference(c, hypothesis), 1, 2 * bound + 8,
                                   [&](const Word& w) { return unsure.count(w) != 0; });
        if (!pool.empty()) {
          query = pool.front();
          break;
        }
      }
      if (!query) return {std::nullopt, true};
      if (!session.can_ask()) return {std::nullopt, false};
      MembershipAnswer a = session.ask(*query);
      if (log) log->push_back(session.log.back());
      if (a == MembershipAnswer::Unsure) {
        unsure.insert(*query);
        continue;
      }
      bool yes = a == MembershipAnswer::Yes;
      knowledge.add(*query, yes);
      if (yes != hypothesis.accepts(*query)) return {*query, true};
    }
  } catch (const BoundExceeded&) {
    return {std::nullopt, true};
  } catch (const BudgetExhausted&) {
    return {std::nullopt, false};
  }
}

struct RandomSamplingOptions {
  double length_p = 0.25;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

/// PAC-style equivalence query: labels words whose length is geometric and
/// whose symbols are uniform; the first Yes/No disagreement is returned.
inline EquivalenceResult equivalence_by_random_sampling(const Dfa& hypothesis, Oracle& oracle,
                                                        const RandomSamplingOptions& opt,
                                                        LabeledExamples* knowledge = nullptr,
                                                        std::vector<QueryRecord>* log = nullptr) {
  std::mt19937_64 rng(opt.seed);
  detail::QuerySession session(oracle, opt.samples);
  try {
    for (std::size_t i = 0; i < opt.samples; ++i) {
      Word w = detail::sample_geometric_word(rng, hypothesis.alphabet().size(), opt.length_p);
      MembershipAnswer a = session.ask(w);
      if (log) log->push_back(session.log.back());
      if (a == MembershipAnswer::Unsure) continue;
      bool yes = a == MembershipAnswer::Yes;
      if (knowledge) knowledge->try_add(w, yes);
      if (yes != hypothesis.accepts(w)) return {w, true};
    }
  } catch (const BudgetExhausted&) {
    return {std::nullopt, false};
  }
  return {std::nullopt, true};
}

struct LstarOptions {
  std::size_t budget = 1000;
  UnsureMapping unsure_as = UnsureMapping::False;
  /// Share of each equivalence check's budget spent on candidate elimination.
  double ce_fraction = 1.0;
  CandidateEliminationOptions elimination;
  RandomSamplingOptions sampling{0.25, 100, 0};
  std::size_t max_rounds = 200;
};

/// Angluin's L* over an observation table; equivalence queries are
/// approximated by candidate elimination and random sampling.
class Lstar {
 public:
  Lstar(Alphabet alphabet, Oracle& oracle, LstarOptions opt)
      : alphabet_(std::move(alphabet)), oracle_(oracle), opt_(opt), knowledge_(alphabet_), session_(oracle, opt.budget) {
    add_row({});
    suffixes_.push_back({});
  }

  LearnerReport run() {
    bool converged = false;
    std::optional<Dfa> hyp;
    try {
      for (std::size_t round = 0; round < opt_.max_rounds; ++round) {
        make_closed_and_consistent();
        hyp = hypothesis();
        sizes_.push_back(hyp->num_states());
        auto ce = equivalence(*hyp);
        if (!ce.verified) break;
        if (!ce.counterexample) {
          converged = true;
          break;
        }
        for (std::size_t i = 0; i < ce.counterexample->size(); ++i)
          add_suffix(Word(ce.counterexample->begin() + static_cast<long>(i), ce.counterexample->end()));
      }
    } catch (const BudgetExhausted&) {
      hyp = hypothesis();
    }
    if (!hyp) hyp = hypothesis();
    LearnerReport r{*hyp, std::move(session_.log), sizes_, converged, session_.spent(), knowledge_};
    return r;
  }

 private:
  bool cell(const Word& w) {
    if (auto it = table_.find(w); it != table_.end()) return it->second;
    if (!session_.can_ask()) throw BudgetExhausted();
    MembershipAnswer a = session_.ask(w);
    if (a == MembershipAnswer::Unsure && opt_.unsure_as == UnsureMapping::Skip && session_.can_ask())
      a = session_.ask(w);
    if (a != MembershipAnswer::Unsure) knowledge_.try_add(w, a == MembershipAnswer::Yes);
    return table_[w] = (a == MembershipAnswer::Yes);
  }

  /// Missing cells read as false without asking.
  bool peek(const Word& w) const {
    auto it = table_.find(w);
    return it != table_.end() && it->second;
  }

  static Word concat(const Word& a, const Word& b) {
    Word w = a;
    w.insert(w.end(), b.begin(), b.end());
    return w;
  }

  std::vector<bool> row(const Word& s) {
    std::vector<bool> r;
    for (const auto& e : suffixes_) r.push_back(cell(concat(s, e)));
    return r;
  }

  std::vector<bool> peek_row(const Word& s) const {
    std::vector<bool> r;
    for (const auto& e : suffixes_) r.push_back(peek(concat(s, e)));
    return r;
  }

  void add_row(const Word& s) {
    if (std::find(prefixes_.begin(), prefixes_.end(), s) == prefixes_.end()) prefixes_.push_back(s);
  }

  void add_suffix(const Word& e) {
    if (std::find(suffixes_.begin(), suffixes_.end(), e) == suffixes_.end()) suffixes_.push_back(e);
  }

  void make_closed_and_consistent() {
    while (true) {
      bool changed = false;
      // Closedness.
      std::set<std::vector<bool>> rows;
      for (const auto& s : prefixes_) rows.insert(row(s));
      for (std::size_t i = 0; i < prefixes_.size() && !changed; ++i)
        for (Symbol a = 0; a < alphabet_.size() && !changed; ++a) {
          Word sa = concat(prefixes_[i], {a});
          if (!rows.count(row(sa))) {
            add_row(sa);
            changed = true;
          }
        }
      if (changed) continue;
      // Consistency.
      for (std::size_t i = 0; i < prefixes_.size() && !changed; ++i)
        for (std::size_t j = i + 1; j < prefixes_.size() && !changed; ++j) {
          if (row(prefixes_[i]) != row(prefixes_[j])) continue;
          for (Symbol a = 0; a < alphabet_.size() && !changed; ++a)
            for (std::size_t e = 0; e < suffixes_.size() && !changed; ++e) {
              Word ae = concat({a}, suffixes_[e]);
              if (cell(concat(prefixes_[i], ae)) != cell(concat(prefixes_[j], ae))) {
                suffixes_.push_back(ae);
                changed = true;
              }
            }
        }
      if (!changed) return;
    }
  }

  Dfa hypothesis() const {
    std::map<std::vector<bool>, StateId> ids;
    std::vector<Word> reps;
    for (const auto& s : prefixes_) {
      auto r = peek_row(s);
      if (!ids.count(r)) {
        ids.emplace(r, static_cast<StateId>(reps.size()));
        reps.push_back(s);
      }
    }
    const std::size_t n = reps.size(), k = alphabet_.size();
    std::vector<StateId> table(n * k, 0);
    std::vector<bool> acc(n);
    for (std::size_t q = 0; q < n; ++q) {
      acc[q] = peek(reps[q]);
      for (Symbol a = 0; a < k; ++a) {
        auto it = ids.find(peek_row(concat(reps[q], {a})));
        table[q * k + a] = it == ids.end() ? 0 : it->second;
      }
    }
    return minimize(Dfa(alphabet_, n, ids.at(peek_row({})), acc, table));
  }

  EquivalenceResult equivalence(const Dfa& hyp) {
    const std::size_t remaining = session_.remaining();
    const auto ce_share = static_cast<std::size_t>(std::llround(opt_.ce_fraction * static_cast<double>(remaining)));
    std::size_t before = session_.spent();
    EquivalenceResult r{std::nullopt, true};
    if (opt_.ce_fraction > 0.0) {
      r = equivalence_by_candidate_elimination(hyp, knowledge_, oracle_, ce_share, &session_.log, opt_.elimination);
      if (r.counterexample) return r;
    }
    if (opt_.ce_fraction < 1.0) {
      RandomSamplingOptions s = opt_.sampling;
      s.samples = std::min(s.samples, remaining - std::min(remaining, session_.spent() - before));
      s.seed = opt_.sampling.seed + sizes_.size();
      auto rs = equivalence_by_random_sampling(hyp, oracle_, s, &knowledge_, &session_.log);
      if (rs.counterexample || !rs.verified) return rs;
      if (opt_.ce_fraction == 0.0) return rs;
    }
    return r;
  }

  Alphabet alphabet_;
  Oracle& oracle_;
  LstarOptions opt_;
  LabeledExamples knowledge_;
  detail::QuerySession session_;
  std::vector<Word> prefixes_;
  std::vector<Word> suffixes_;
  std::map<Word, bool, ShortLex> table_;
  std::vector<std::size_t> sizes_;
};

inline LearnerReport lstar(const Alphabet& alphabet, Oracle& oracle, const LstarOptions& opt = {}) {
  return Lstar(alphabet, oracle, opt).run();
}

}  // namespace taskdfa
