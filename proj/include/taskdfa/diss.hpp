#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "taskdfa/identify.hpp"
#include "taskdfa/learner.hpp"
#include "taskdfa/planner.hpp"

namespace taskdfa {

struct ConjectureOptions {
  PlannerConfig planner;
  /// Flips re-scored by exact re-planning after the surrogate ranking.
  std::size_t top_k = 3;
  std::size_t max_states = 12;
  /// Surrogate score (nats) a flip needs unless it is an exploration flip.
  double min_gain = 0.1;
};

struct DissConfig {
  std::size_t max_iterations = 30;
  std::size_t query_budget = 0;
  double ce_fraction = 1.0;
  PlannerConfig planner;
  LearnerBackend backend = LearnerBackend::VersionSpace;
  bool allow_unsure = false;
  std::uint64_t seed = 0;
  double initial_temperature = 1.0;
  double temperature_decay = 0.9;
  std::size_t top_k = 3;
  std::size_t max_states = 12;
  double min_gain = 0.1;

  void validate() const {
    if (max_iterations == 0) throw InputError("max_iterations must be positive");
    if (ce_fraction < 0.0 || ce_fraction > 1.0) throw InputError("ce_fraction must lie in [0, 1]");
    if (planner.lambda < 0.0) throw InputError("lambda must be non-negative");
    if (!(planner.accept_reward > 0.0)) throw InputError("accept_reward must be positive");
    if (!(initial_temperature > 0.0) || !(temperature_decay > 0.0 && temperature_decay <= 1.0))
      throw InputError("bad annealing schedule");
  }
};

/// A relabeled word proposed by conjecture_examples.
struct Flip {
  Word word;
  bool label = false;
  double score = 0.0;
  bool explored = false;
};

struct Conjecture {
  LabeledExamples examples;
  std::optional<Flip> flip;
};

struct ExampleBuffer {
  LabeledExamples current;
  std::vector<std::pair<LabeledExamples, double>> history;
  double temperature = 1.0;
};

namespace detail {

struct FlipCandidate {
  bool label;
  double score;
};

/// The examples of `x` whose labels do not contradict `facts`.
inline LabeledExamples agreeing(const LabeledExamples& x, const LabeledExamples& facts) {
  LabeledExamples out(x.alphabet);
  for (const auto& w : x.positive)
    if (facts.label_of(w).value_or(true)) out.add(w, true);
  for (const auto& w : x.negative)
    if (!facts.label_of(w).value_or(false)) out.add(w, false);
  return out;
}

inline bool flip_order(const Flip& a, const Flip& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
  return a.word < b.word;
}

}  // namespace detail

/// Proposes the buffer hypothesis for the next iteration: `hypothesis` with one
/// word relabeled against `candidate`. Candidate words are demonstration words
/// and prefixes, plus one-step deviations from each demonstration prefix, both
/// alone and completed by the candidate policy's most likely slip-free path.
/// Deviations are ranked by the soft-Q gap to the demonstrated action; the best
/// `top_k` are re-scored by identifying and re-planning. With probability
/// `explore` a uniformly random flip is taken instead; otherwise the hypothesis
/// is kept unless some surrogate score exceeds `min_gain`. Words labeled in
/// `facts` and words in `tabu` are never flipped. `base` holds examples the
/// learner will see besides the hypothesis.
inline Conjecture conjecture_examples(const Dfa& candidate, const GridWorld& world,
                                      const std::vector<Demonstration>& demos, const LabeledExamples& hypothesis,
                                      const LabeledExamples& facts, std::mt19937_64& rng, double explore,
                                      const ConjectureOptions& opt = {},
                                      const std::set<Word, ShortLex>& tabu = {},
                                      const LabeledExamples* base = nullptr) {
  std::size_t h = 1;
  for (const auto& d : demos) h = std::max(h, demo_horizon(d, opt.planner));
  SoftPolicy policy(world, candidate, h, opt.planner.accept_reward);

  std::map<Word, detail::FlipCandidate, ShortLex> pool;
  auto offer = [&](const Word& w, double score) {
    if (facts.label_of(w) || tabu.count(w)) return;
    bool label = !policy.dfa().accepts(w);
    auto [it, fresh] = pool.try_emplace(w, detail::FlipCandidate{label, score});
    if (!fresh) it->second.score = std::max(it->second.score, score);
  };
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  for (const auto& demo : demos) {
    auto cells = demo.cells();
    const std::size_t horizon = demo_horizon(demo, opt.planner);
    Word word = featurize(world, demo);
    double nll = demo_nll(policy, demo, horizon);
    offer(word, policy.dfa().accepts(word) ? kNone : nll / static_cast<double>(demo.steps.size()));
    ProductState s = policy.initial(demo.start);
    for (std::size_t i = 0; i < demo.steps.size(); ++i) {
      std::vector<Cell> prefix(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      offer(featurize_path(world, prefix), 0.0);
      const std::size_t t = horizon - i;
      const Action taken = demo.steps[i].action;
      for (Action a : kActions) {
        Cell dev = world.move(cells[i], a);
        if (a == taken || dev == cells[i] || dev == cells[i + 1]) continue;
        double gap = policy.q_value(t, s, a) - policy.q_value(t, s, taken);
        auto path = prefix;
        path.push_back(dev);
        Word alone = featurize_path(world, path);
        ProductState r = policy.advance(s, dev);
        for (std::size_t k = t - 1; k > 0 && !policy.dfa().is_accepting(r.q); --k) {
          Action best = kActions[0];
          for (Action b : kActions)
            if (policy.q_value(k, r, b) > policy.q_value(k, r, best)) best = b;
          path.push_back(world.move(r.cell, best));
          r = policy.advance(r, path.back());
        }
        Word completed = featurize_path(world, path);
        for (const Word& w : {alone, completed}) offer(w, policy.dfa().accepts(w) ? gap : kNone);
      }
      s = policy.advance(s, demo.steps[i].result);
    }
  }

  std::vector<Flip> flips;
  for (const auto& [w, c] : pool) {
    // A flip must keep the hypothesis a valid labeling.
    if (hypothesis.label_of(w) == c.label) continue;
    flips.push_back({w, c.label, c.score, false});
  }
  Conjecture out{hypothesis, std::nullopt};
  if (flips.empty()) return out;
  std::sort(flips.begin(), flips.end(), detail::flip_order);

  auto apply = [&](const Flip& f) {
    LabeledExamples x = hypothesis;
    x.positive.erase(f.word);
    x.negative.erase(f.word);
    x.add(f.word, f.label);
    return x;
  };

  Flip chosen = flips.front();
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < explore) {
    chosen = flips[std::uniform_int_distribution<std::size_t>(0, flips.size() - 1)(rng)];
    chosen.explored = true;
  } else {
    if (!(chosen.score > opt.min_gain)) return out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(opt.top_k, flips.size()) && flips[i].score > opt.min_gain; ++i) {
      LabeledExamples x = detail::agreeing(apply(flips[i]), facts);
      if (base) x.merge(*base);
      double u;
      try {
        u = energy(find_minimal_dfas(x, 1, opt.max_states).dfas[0], world, demos, opt.planner).total;
      } catch (const BoundExceeded&) {
        continue;
      }
      if (u < best - 1e-9) {
        best = u;
        chosen = flips[i];
      }
    }
  }
  out.examples = apply(chosen);
  out.flip = chosen;
  return out;
}

struct IterationRecord {
  std::size_t iteration = 0;
  Dfa candidate = Dfa::constant(color_alphabet(), false);
  EnergyReport energy;
  LabeledExamples examples;
  std::size_t queries = 0;
  bool accepted = false;
  double temperature = 0.0;
  std::optional<Flip> flip;
};

struct DissReport {
  std::vector<IterationRecord> iterations;
  Dfa best_dfa = Dfa::constant(color_alphabet(), false);
  EnergyReport best_energy;
  std::size_t best_iteration = 0;
  std::optional<EnergyReport> ground_truth_energy;
  std::size_t queries = 0;
  std::vector<QueryRecord> transcript;
  std::vector<std::string> warnings;

  /// Lowest energy seen up to and including iteration i.
  std::vector<double> best_so_far() const {
    std::vector<double> out;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& it : iterations) out.push_back(best = std::min(best, it.energy.total));
    return out;
  }
};

namespace detail {

class NoOracle : public Oracle {
 public:
  MembershipAnswer query(const Word&) override { throw OracleUnavailable("no oracle configured"); }
};

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace detail

/// Demonstration-informed specification search. The learner is seeded with the
/// oracle's seed examples and the buffer's conjectured labels, minus those
/// contradicting what the oracle already knows. With query_budget = 0 the
/// oracle is never consulted.
inline DissReport run_diss(const DissConfig& cfg, const GridWorld& world, const std::vector<Demonstration>& demos,
                           CachingOracle* oracle = nullptr, const std::optional<Dfa>& ground_truth = std::nullopt,
                           const LabeledExamples* initial = nullptr) {
  cfg.validate();
  if (demos.empty()) throw InputError("DISS needs at least one demonstration");
  for (const auto& d : demos) validate_demo(world, d);
  const Alphabet& sigma = color_alphabet();
  DissReport report;
  if (ground_truth) report.ground_truth_energy = energy(*ground_truth, world, demos, cfg.planner);

  std::size_t budget = oracle ? cfg.query_budget : 0;
  ExampleBuffer buffer{initial ? *initial : LabeledExamples(sigma), {}, cfg.initial_temperature};
  std::mt19937_64 rng(cfg.seed);
  detail::NoOracle none;
  ConjectureOptions copt{cfg.planner, cfg.top_k, cfg.max_states, cfg.min_gain};

  std::optional<Dfa> current;
  std::set<Word, ShortLex> tabu;
  double current_energy = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.max_iterations; ++i) {
    IterationRecord rec;
    rec.iteration = i;
    rec.temperature = buffer.temperature;
    LabeledExamples facts(sigma);
    if (budget > 0) {
      facts.merge(oracle->seed());
      for (const auto& [w, a] : oracle->cache())
        if (a != MembershipAnswer::Unsure) facts.try_add(w, a == MembershipAnswer::Yes);
    }
    LabeledExamples proposal = buffer.current;
    if (current) {
      auto c = conjecture_examples(*current, world, demos, buffer.current, facts, rng, buffer.temperature, copt,
                                   tabu, budget > 0 ? &oracle->seed() : nullptr);
      proposal = std::move(c.examples);
      rec.flip = c.flip;
    }

    LabeledExamples seed = detail::agreeing(proposal, facts);
    if (budget > 0) seed.merge(oracle->seed());
    Oracle& o = budget > 0 ? static_cast<Oracle&>(*oracle) : none;
    LearnerReport learned{Dfa::constant(sigma, false), {}, {}, false, 0, seed};
    try {
      if (cfg.backend == LearnerBackend::VersionSpace) {
        VlOptions vo;
        vo.ce_fraction = cfg.ce_fraction;
        vo.max_states = cfg.max_states;
        vo.seed = cfg.seed * 1000003 + i;
        learned = guess_dfa_vl(seed, o, budget, vo);
      } else {
        CachingOracle overlay(seed, o);
        LstarOptions lo;
        lo.budget = budget;
        lo.ce_fraction = cfg.ce_fraction;
        lo.sampling.seed = cfg.seed * 1000003 + i;
        lo.unsure_as = UnsureMapping::Skip;
        learned = lstar(sigma, overlay, lo);
        learned.knowledge.merge(seed);
        if (!consistent(learned.dfa, learned.knowledge))
          learned.dfa = find_minimal_dfas(learned.knowledge, 1, cfg.max_states).dfas[0];
      }
    } catch (const OracleUnavailable& e) {
      report.warnings.push_back("iteration " + std::to_string(i) + ": " + e.what() + "; continuing without queries");
      budget = 0;
      learned.dfa = find_minimal_dfas(seed, 1, cfg.max_states).dfas[0];
      learned.knowledge = seed;
    }
    report.queries += learned.queries;
    report.transcript.insert(report.transcript.end(), learned.transcript.begin(), learned.transcript.end());
    if (!consistent(learned.dfa, seed)) throw Error("internal: learned DFA is inconsistent with its examples");

    rec.candidate = minimize(learned.dfa);
    rec.energy = energy(rec.candidate, world, demos, cfg.planner);
    rec.examples = seed;
    rec.queries = learned.queries;
    const double delta = rec.energy.total - current_energy;
    rec.accepted = !current || delta <= 0.0 ||
                   std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-delta / buffer.temperature);
    if (rec.accepted) {
      buffer.current = proposal;
      buffer.history.emplace_back(proposal, rec.energy.total);
      current = rec.candidate;
      current_energy = rec.energy.total;
      tabu.clear();
    } else if (rec.flip) {
      tabu.insert(rec.flip->word);
    }
    if (report.iterations.empty() || rec.energy.total < report.best_energy.total) {
      report.best_dfa = rec.candidate;
      report.best_energy = rec.energy;
      report.best_iteration = i;
    }
    buffer.temperature *= cfg.temperature_decay;
    report.iterations.push_back(std::move(rec));
  }
  return report;
}

/// iteration,candidate_energy,best_energy,ground_truth_energy
inline std::string energy_trace(const DissReport& r) {
  std::string out = "iteration,candidate_energy,best_energy,ground_truth_energy\n";
  auto best = r.best_so_far();
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    out += std::to_string(r.iterations[i].iteration) + "," + detail::fmt(r.iterations[i].energy.total) + "," +
           detail::fmt(best[i]) + "," + (r.ground_truth_energy ? detail::fmt(r.ground_truth_energy->total) : "") +
           "\n";
  }
  return out;
}

/// iteration,candidate_id,nll,size_term,total
inline std::string energy_report_csv(const DissReport& r) {
  std::string out = "iteration,candidate_id,nll,size_term,total\n";
  for (const auto& it : r.iterations)
    out += std::to_string(it.iteration) + "," + std::to_string(it.iteration) + "," + detail::fmt(it.energy.nll) + "," +
           detail::fmt(it.energy.size_term) + "," + detail::fmt(it.energy.total) + "\n";
  return out;
}

}  // namespace taskdfa
