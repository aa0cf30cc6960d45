#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskdfa/dfa.hpp"
#include "taskdfa/examples.hpp"

namespace taskdfa {

enum class MembershipAnswer : std::uint8_t { Yes, No, Unsure };

inline const char* to_string(MembershipAnswer a) {
  switch (a) {
    case MembershipAnswer::Yes: return "yes";
    case MembershipAnswer::No: return "no";
    case MembershipAnswer::Unsure: return "unsure";
  }
  return "?";
}

inline MembershipAnswer parse_answer(std::string_view s) {
  if (s == "yes") return MembershipAnswer::Yes;
  if (s == "no") return MembershipAnswer::No;
  if (s == "unsure") return MembershipAnswer::Unsure;
  throw InputError("unknown answer '" + std::string(s) + "'");
}

inline MembershipAnswer from_bool(bool b) { return b ? MembershipAnswer::Yes : MembershipAnswer::No; }

/// Extended membership oracle. queries_used() counts charged queries; a
/// query beyond queries_allowed() throws BudgetExhausted instead of answering.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual MembershipAnswer query(const Word& w) = 0;

  /// True when answers take real time worth logging (humans, remote models).
  virtual bool timed() const { return false; }

  std::size_t queries_used() const { return used_; }
  std::optional<std::size_t> queries_allowed() const { return allowed_; }
  void set_budget(std::optional<std::size_t> allowed) { allowed_ = allowed; }
  bool exhausted() const { return allowed_ && used_ >= *allowed_; }

 protected:
  void charge() {
    if (exhausted()) throw BudgetExhausted("query budget of " + std::to_string(*allowed_) + " exhausted");
    ++used_;
  }

 private:
  std::size_t used_ = 0;
  std::optional<std::size_t> allowed_;
};

using WordPredicate = std::function<bool(const Word&)>;

/// Test double answering from a ground-truth DFA. Words matching `unsure`
/// (tested on the stutter-collapsed word) get Unsure; other answers are
/// flipped with probability error_rate. With `guess` set and unsure answers
/// disallowed, those words are answered from `guess` instead, which models
/// an oracle that hallucinates where it would otherwise abstain.
class ScriptedOracle : public Oracle {
 public:
  struct Config {
    WordPredicate unsure;
    double error_rate = 0.0;
    std::uint64_t seed = 0;
    bool allow_unsure = true;
    std::optional<Dfa> guess;
  };

  explicit ScriptedOracle(Dfa truth) : ScriptedOracle(std::move(truth), Config{}) {}

  ScriptedOracle(Dfa truth, Config cfg) : truth_(std::move(truth)), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    if (!(cfg_.error_rate >= 0.0 && cfg_.error_rate <= 1.0)) throw InputError("error rate must lie in [0, 1]");
  }

  MembershipAnswer query(const Word& w) override {
    charge();
    truth_.alphabet().check_word(w);
    if (cfg_.unsure && cfg_.unsure(stutter_collapse(w))) {
      if (cfg_.allow_unsure) return MembershipAnswer::Unsure;
      if (cfg_.guess) return from_bool(cfg_.guess->accepts(w));
    }
    bool answer = truth_.accepts(w);
    if (cfg_.error_rate > 0.0 && std::bernoulli_distribution(cfg_.error_rate)(rng_)) answer = !answer;
    return from_bool(answer);
  }

  const Dfa& truth() const { return truth_; }

 private:
  Dfa truth_;
  Config cfg_;
  std::mt19937_64 rng_;
};

/// Terminal question-and-answer oracle.
class HumanOracle : public Oracle {
 public:
  HumanOracle(Alphabet alphabet, std::istream& in = std::cin, std::ostream& out = std::cout)
      : alphabet_(std::move(alphabet)), in_(in), out_(out) {}

  bool timed() const override { return true; }

  MembershipAnswer query(const Word& w) override {
    charge();
    while (true) {
      out_ << "Is " << alphabet_.format_word(w) << " a positive example? [y/n/u] " << std::flush;
      std::string line;
      if (!std::getline(in_, line)) throw OracleUnavailable("no answer on standard input");
      auto t = std::string(detail::trim(line));
      for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (t == "y" || t == "yes") return MembershipAnswer::Yes;
      if (t == "n" || t == "no") return MembershipAnswer::No;
      if (t == "u" || t == "unsure") return MembershipAnswer::Unsure;
      out_ << "Please answer y, n or u.\n";
    }
  }

 private:
  Alphabet alphabet_;
  std::istream& in_;
  std::ostream& out_;
};

enum class Provenance : std::uint8_t { SeedExample, Oracle, Conjectured };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::SeedExample: return "seed";
    case Provenance::Oracle: return "oracle";
    case Provenance::Conjectured: return "conjectured";
  }
  return "?";
}

struct QueryRecord {
  Word word;
  MembershipAnswer answer;
  Provenance provenance;
  double latency_ms = 0.0;
};

/// Answers seed examples and remembered answers itself and forwards the rest
/// to `inner`. Only forwarded queries are charged.
class CachingOracle : public Oracle {
 public:
  CachingOracle(LabeledExamples seed, Oracle& inner) : seed_(std::move(seed)), inner_(inner) {}

  MembershipAnswer query(const Word& w) override {
    seed_.alphabet.check_word(w);
    if (auto label = seed_.label_of(w)) return record(w, from_bool(*label), Provenance::SeedExample, 0.0);
    if (auto it = cache_.find(w); it != cache_.end() && !(reask_unsure_ && it->second == MembershipAnswer::Unsure))
      return record(w, it->second, Provenance::Oracle, 0.0);
    charge();
    const auto start = std::chrono::steady_clock::now();
    MembershipAnswer a = inner_.query(w);
    double ms = inner_.timed()
                    ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                    : 0.0;
    cache_[w] = a;
    inner_log_.push_back({w, a, Provenance::Oracle, ms});
    if (persist_) {
      *persist_ << nlohmann::json{{"word", seed_.alphabet.join_word(w)}, {"answer", to_string(a)}}.dump() << '\n';
      persist_->flush();
    }
    return record(w, a, Provenance::Oracle, ms);
  }

  bool timed() const override { return inner_.timed(); }

  /// Replaces the seed examples (they outrank cached answers).
  void set_seed(LabeledExamples seed) { seed_ = std::move(seed); }
  const LabeledExamples& seed() const { return seed_; }

  void set_reask_unsure(bool on) { reask_unsure_ = on; }

  /// Known Yes/No label without contacting the inner oracle.
  std::optional<bool> known(const Word& w) const {
    if (auto label = seed_.label_of(w)) return label;
    auto it = cache_.find(w);
    if (it == cache_.end() || it->second == MembershipAnswer::Unsure) return std::nullopt;
    return it->second == MembershipAnswer::Yes;
  }

  bool cached(const Word& w) const { return cache_.count(w) != 0; }
  const std::map<Word, MembershipAnswer, ShortLex>& cache() const { return cache_; }

  /// Every query, including seed and cache hits.
  const std::vector<QueryRecord>& transcript() const { return log_; }
  /// Only the queries that reached the inner oracle.
  const std::vector<QueryRecord>& inner_transcript() const { return inner_log_; }
  std::size_t inner_calls() const { return inner_log_.size(); }

  /// Loads records written by a previous run and appends new answers to the
  /// same file from now on.
  void attach_cache_file(const std::string& path) {
    if (std::ifstream in(path); in) {
      std::string line;
      std::size_t n = 0;
      while (std::getline(in, line)) {
        ++n;
        if (detail::trim(line).empty()) continue;
        try {
          auto j = nlohmann::json::parse(line);
          cache_[seed_.alphabet.parse_word(j.at("word").get<std::string>())] =
              parse_answer(j.at("answer").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
          throw InputError(path + ":" + std::to_string(n) + ": " + e.what());
        }
      }
    }
    persist_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*persist_) throw InputError("cannot open cache file " + path);
  }

 private:
  MembershipAnswer record(const Word& w, MembershipAnswer a, Provenance p, double ms) {
    log_.push_back({w, a, p, ms});
    return a;
  }

  LabeledExamples seed_;
  Oracle& inner_;
  std::map<Word, MembershipAnswer, ShortLex> cache_;
  std::vector<QueryRecord> log_;
  std::vector<QueryRecord> inner_log_;
  std::unique_ptr<std::ofstream> persist_;
  bool reask_unsure_ = false;
};

/// One JSON object per line: word, answer, provenance, latency_ms.
inline std::string transcript_jsonl(const std::vector<QueryRecord>& records, const Alphabet& alphabet) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["word"] = alphabet.join_word(r.word);
    j["answer"] = to_string(r.answer);
    j["provenance"] = to_string(r.provenance);
    j["latency_ms"] = r.latency_ms;
    out += j.dump() + "\n";
  }
  return out;
}

struct HallucinationStats {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t unsure = 0;

  double rate() const { return total ? static_cast<double>(incorrect) / static_cast<double>(total) : 0.0; }
};

inline HallucinationStats measure_hallucination(const std::vector<QueryRecord>& transcript, const Dfa& truth) {
  HallucinationStats s;
  for (const auto& r : transcript) {
    ++s.total;
    if (r.answer == MembershipAnswer::Unsure) ++s.unsure;
    else if ((r.answer == MembershipAnswer::Yes) == truth.accepts(r.word)) ++s.correct;
    else ++s.incorrect;
  }
  return s;
}

}  // namespace taskdfa
