#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "taskdfa/llm_http.hpp"
#include "taskdfa/taskdfa.hpp"

namespace fs = std::filesystem;
using namespace taskdfa;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::string backend = "vl";
  bool allow_unsure = false;
  std::string oracle = "scripted";
  std::string endpoint = LlmEndpointConfig{}.base_url;
  std::string model = LlmEndpointConfig{}.model;
  std::string out = "out";
  double error_rate = 0.0;
};

void add_oracle_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--backend", c.backend, "Learner: vl or lstar")
      ->check(CLI::IsMember({"vl", "lstar"}))
      ->capture_default_str();
  cmd->add_flag("--allow-unsure", c.allow_unsure, "Let the oracle answer unsure");
  cmd->add_option("--oracle", c.oracle, "Oracle: llm, scripted or human")
      ->check(CLI::IsMember({"llm", "scripted", "human"}))
      ->capture_default_str();
  cmd->add_option("--endpoint", c.endpoint, "Chat-completions base URL")->capture_default_str();
  cmd->add_option("--model", c.model, "Model name sent to the endpoint")->capture_default_str();
  cmd->add_option("--error-rate", c.error_rate, "Scripted oracle: chance of a flipped answer")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

fs::path output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir);
  return dir;
}

void write(const fs::path& dir, const std::string& name, std::string_view content) {
  write_file((dir / name).string(), content);
}

void write_dfa(const fs::path& dir, const std::string& stem, const Dfa& d) {
  write(dir, stem + ".dfa", serialize(d));
  write(dir, stem + ".dot", to_dot(d, stem));
}

LlmEndpointConfig endpoint_config(const Common& c) {
  LlmEndpointConfig e;
  e.base_url = c.endpoint;
  e.model = c.model;
  return e;
}

/// LlmOracle that owns its transport and mirrors its conversation into `sink`.
class OwnedLlmOracle : public Oracle {
 public:
  OwnedLlmOracle(TaskPrompt task, LlmEndpointConfig cfg, std::shared_ptr<Conversation> sink)
      : transport_(cfg), llm_(std::move(task), cfg, transport_), sink_(std::move(sink)) {}

  bool timed() const override { return true; }

  MembershipAnswer query(const Word& w) override {
    charge();
    MembershipAnswer a = llm_.query(w);
    if (sink_) *sink_ = llm_.conversation();
    return a;
  }

 private:
  HttpTransport transport_;
  LlmOracle llm_;
  std::shared_ptr<Conversation> sink_;
};

ScriptedOracle::Config scripted_config(const Common& c) {
  ScriptedOracle::Config cfg;
  cfg.allow_unsure = c.allow_unsure;
  cfg.error_rate = c.error_rate;
  cfg.seed = c.seed;
  return cfg;
}

/// Oracle over the color alphabet for `learn` and `diss`.
std::unique_ptr<Oracle> make_task_oracle(const Common& c, const Dfa& truth, ScriptedOracle::Config scripted,
                                         const std::string& prompt, const LabeledExamples& seed,
                                         std::shared_ptr<Conversation> sink) {
  if (c.oracle == "human") return std::make_unique<HumanOracle>(seed.alphabet);
  if (c.oracle == "llm") {
    TaskPrompt task;
    task.description = prompt;
    task.seed = seed;
    task.allow_unsure = c.allow_unsure;
    return std::make_unique<OwnedLlmOracle>(task, endpoint_config(c), std::move(sink));
  }
  return std::make_unique<ScriptedOracle>(truth, scripted);
}

LabeledExamples load_examples_or_empty(const std::string& path, const Alphabet& fallback) {
  if (path.empty()) return LabeledExamples(fallback);
  return parse_examples(read_file(path));
}

std::string word_json(const Alphabet& a, const Word& w) { return a.join_word(w); }

nlohmann::ordered_json examples_json(const LabeledExamples& x) {
  nlohmann::ordered_json j;
  j["positive"] = nlohmann::json::array();
  j["negative"] = nlohmann::json::array();
  for (const auto& w : x.positive) j["positive"].push_back(word_json(x.alphabet, w));
  for (const auto& w : x.negative) j["negative"].push_back(word_json(x.alphabet, w));
  return j;
}

// identify

struct IdentifyArgs {
  std::string examples;
  std::size_t k = 1;
  std::size_t max_states = 12;
  std::string out = "out";
};

int cmd_identify(const IdentifyArgs& a) {
  LabeledExamples x = parse_examples(read_file(a.examples));
  if (a.k == 0) throw InputError("k must be positive");
  auto r = find_minimal_dfas(x, a.k, a.max_states);
  fs::path dir = output_dir(a.out);
  for (std::size_t i = 0; i < r.dfas.size(); ++i) {
    const std::string stem = "dfa_" + std::to_string(i + 1);
    write_dfa(dir, stem, r.dfas[i]);
    std::cout << stem << ": " << r.sizes[i] << " states, "
              << (consistent(r.dfas[i], x) ? "consistent" : "INCONSISTENT") << "\n";
  }
  if (r.stats.bound_hit)
    std::cout << "only " << r.dfas.size() << " of " << a.k << " DFAs exist within " << a.max_states << " states\n";
  return 0;
}

// learn

struct LearnArgs {
  Common c;
  std::string prompt;
  std::string examples;
  std::string cache;
};

int cmd_learn(const LearnArgs& a) {
  const Common& c = a.c;
  LabeledExamples seed = load_examples_or_empty(a.examples, color_alphabet());
  std::string prompt = a.prompt.empty() ? "" : read_file(a.prompt);
  if (c.oracle == "llm" && prompt.empty()) throw InputError("--prompt is required with --oracle llm");
  const Dfa truth = ground_truth_dfa();
  if (c.oracle == "scripted" && !(truth.alphabet() == seed.alphabet))
    throw InputError("the scripted oracle answers over {red, yellow, blue, green}");
  auto conversation = std::make_shared<Conversation>();
  auto inner = make_task_oracle(c, truth, scripted_config(c), prompt, seed, conversation);
  CachingOracle oracle(seed, *inner);
  if (!a.cache.empty()) oracle.attach_cache_file(a.cache);
  fs::path dir = output_dir(c.out);

  auto save_transcript = [&] {
    write(dir, "transcript.jsonl", transcript_jsonl(oracle.transcript(), seed.alphabet));
    if (c.oracle == "llm") write(dir, "conversation.jsonl", conversation_jsonl(*conversation));
  };
  LearnerReport r{Dfa::constant(seed.alphabet, false), {}, {}, false, 0, seed};
  try {
    if (parse_backend(c.backend) == LearnerBackend::VersionSpace) {
      VlOptions opt;
      opt.seed = c.seed;
      r = guess_dfa_vl(seed, oracle, c.budget, opt);
    } else {
      LstarOptions opt;
      opt.budget = c.budget;
      opt.sampling.seed = c.seed;
      r = lstar(seed.alphabet, oracle, opt);
    }
  } catch (const OracleUnavailable&) {
    save_transcript();
    throw;
  }
  save_transcript();
  write_dfa(dir, "learned", r.dfa);
  nlohmann::ordered_json j;
  j["states"] = r.dfa.num_states();
  j["converged"] = r.converged;
  j["queries"] = r.queries;
  j["candidate_sizes"] = r.candidate_sizes;
  j["consistent"] = consistent(r.dfa, r.knowledge);
  j["knowledge"] = examples_json(r.knowledge);
  write(dir, "report.json", j.dump(2) + "\n");
  std::cout << "learned " << r.dfa.num_states() << " states with " << r.queries << " queries"
            << (c.oracle == "scripted" ? equivalent(r.dfa, truth) ? " (matches the rules)" : " (differs from the rules)"
                                       : "")
            << "\n";
  return 0;
}

// diss

struct DissArgs {
  Common c;
  std::string config;
  double lambda = PlannerConfig{}.lambda;
  std::size_t horizon = 0;
  std::size_t iterations = DissConfig{}.max_iterations;
  CLI::App* cmd = nullptr;
};

Dfa named_dfa(const std::string& name) {
  if (name == "ground_truth") return ground_truth_dfa();
  if (name == "rules12") return avoid_lava_reach_yellow_dfa();
  if (name == "reach_yellow") return reach_yellow_dfa();
  throw InputError("unknown DFA name '" + name + "' (ground_truth, rules12, reach_yellow)");
}

int cmd_diss(DissArgs& a) {
  const fs::path cfg_path = a.config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(a.config));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(a.config + ": " + e.what());
  }
  static const std::set<std::string> keys{"world",        "demos",     "examples",      "task_prompt",  "oracle",
                                          "scripted",     "endpoint",  "query_budget",  "max_iterations", "seed",
                                          "backend",      "allow_unsure", "ce_fraction", "lambda",       "accept_reward",
                                          "horizon",      "horizon_slack", "reference"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw InputError(a.config + ": unknown key '" + k + "'");
  auto rel = [&](const std::string& p) { return (cfg_path.parent_path() / p).string(); };

  Common c = a.c;
  DissConfig cfg;
  try {
    auto given = [&](const char* flag) { return a.cmd->count(flag) > 0; };
    if (!given("--seed")) c.seed = j.value("seed", c.seed);
    if (!given("--budget")) c.budget = j.value("query_budget", std::size_t{0});
    if (!given("--backend")) c.backend = j.value("backend", c.backend);
    if (!given("--allow-unsure")) c.allow_unsure = j.value("allow_unsure", false);
    if (!given("--oracle")) c.oracle = j.value("oracle", c.oracle);
    cfg.max_iterations = given("--iterations") ? a.iterations : j.value("max_iterations", cfg.max_iterations);
    cfg.planner.lambda = given("--lambda") ? a.lambda : j.value("lambda", cfg.planner.lambda);
    cfg.planner.horizon = given("--horizon") ? a.horizon : j.value("horizon", cfg.planner.horizon);
    cfg.planner.horizon_slack = j.value("horizon_slack", cfg.planner.horizon_slack);
    cfg.planner.accept_reward = j.value("accept_reward", cfg.planner.accept_reward);
    cfg.ce_fraction = j.value("ce_fraction", cfg.ce_fraction);
    if (j.contains("endpoint")) {
      const auto& e = j.at("endpoint");
      if (!given("--endpoint")) c.endpoint = e.value("base_url", c.endpoint);
      if (!given("--model")) c.model = e.value("model", c.model);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(a.config + ": " + e.what());
  }
  if (c.oracle != "llm" && c.oracle != "scripted" && c.oracle != "human")
    throw InputError("unknown oracle '" + c.oracle + "'");
  cfg.query_budget = c.budget;
  cfg.seed = c.seed;
  cfg.backend = parse_backend(c.backend);
  cfg.allow_unsure = c.allow_unsure;
  cfg.validate();

  if (!j.contains("world") || !j.contains("demos")) throw InputError(a.config + ": needs 'world' and 'demos'");
  GridWorld world = load_world(read_file(rel(j.at("world").get<std::string>())));
  std::vector<Demonstration> demos;
  for (const auto& d : j.at("demos")) demos.push_back(load_demo(read_file(rel(d.get<std::string>())), world));
  LabeledExamples seed = j.contains("examples") ? parse_examples(read_file(rel(j.at("examples").get<std::string>())))
                                                : LabeledExamples(color_alphabet());
  std::string prompt = j.contains("task_prompt") ? read_file(rel(j.at("task_prompt").get<std::string>())) : "";
  std::optional<Dfa> reference;
  if (auto name = j.value("reference", std::string("ground_truth")); name != "none") reference = named_dfa(name);

  ScriptedOracle::Config scripted = scripted_config(c);
  Dfa truth = ground_truth_dfa();
  if (j.contains("scripted")) {
    const auto& s = j.at("scripted");
    truth = named_dfa(s.value("truth", std::string("ground_truth")));
    if (!a.cmd->count("--error-rate")) scripted.error_rate = s.value("error_rate", 0.0);
    if (auto u = s.value("unsure", std::string("none")); u == "rule3") {
      // Unsure wherever the third rule decides the label; a guessing oracle
      // falls back on the first two rules.
      Dfa gt = ground_truth_dfa(), rules12 = avoid_lava_reach_yellow_dfa();
      scripted.unsure = [gt, rules12](const Word& w) { return gt.accepts(w) != rules12.accepts(w); };
      scripted.guess = rules12;
    } else if (u != "none") {
      throw InputError(a.config + ": scripted.unsure must be 'none' or 'rule3'");
    }
  }

  auto conversation = std::make_shared<Conversation>();
  auto inner = make_task_oracle(c, truth, scripted, prompt, seed, conversation);
  CachingOracle oracle(seed, *inner);
  DissReport r = run_diss(cfg, world, demos, &oracle, reference);

  fs::path dir = output_dir(c.out);
  write(dir, "energy_trace.csv", energy_trace(r));
  write(dir, "energy_report.csv", energy_report_csv(r));
  write(dir, "transcript.jsonl", transcript_jsonl(r.transcript, color_alphabet()));
  if (c.oracle == "llm") write(dir, "conversation.jsonl", conversation_jsonl(*conversation));
  write_dfa(dir, "best", r.best_dfa);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "best energy " << detail::fmt(r.best_energy.total) << " (" << r.best_dfa.num_states()
            << " states, iteration " << r.best_iteration << ")";
  if (r.ground_truth_energy) std::cout << ", reference " << detail::fmt(r.ground_truth_energy->total);
  std::cout << ", " << r.queries << " queries\n";
  return 0;
}

// tomita

int cmd_tomita(const Common& c) {
  tomita::BenchOptions opt;
  opt.backend = parse_backend(c.backend);
  opt.allow_unsure = c.allow_unsure;
  opt.queries = c.budget;
  opt.seed = c.seed;
  opt.parallel = c.oracle != "human";
  std::map<int, std::shared_ptr<Conversation>> conversations;
  for (int i = 1; i <= 7; ++i) conversations[i] = std::make_shared<Conversation>();
  tomita::OracleFactory factory;
  if (c.oracle == "scripted") {
    factory = tomita::scripted_factory(scripted_config(c));
  } else if (c.oracle == "llm") {
    factory = [&](int i, bool allow) -> std::unique_ptr<Oracle> {
      return std::make_unique<OwnedLlmOracle>(tomita::task_prompt(i, allow), endpoint_config(c), conversations.at(i));
    };
  } else {
    factory = [](int i, bool) -> std::unique_ptr<Oracle> {
      std::cout << "\nTomita " << i << ":\n" << tomita::rule_text(i) << "\n\n";
      return std::make_unique<HumanOracle>(tomita::binary_alphabet());
    };
  }
  auto results = tomita::run_tomita_bench(factory, opt);
  fs::path dir = output_dir(c.out);
  for (const auto& r : results) {
    const std::string stem = "tomita_" + std::to_string(r.grammar);
    write(dir, stem + ".csv", tomita::bench_csv(r));
    if (r.dfa) write_dfa(dir, stem, *r.dfa);
    if (c.oracle == "llm") write(dir, stem + "_conversation.jsonl", conversation_jsonl(*conversations.at(r.grammar)));
  }
  std::string summary = tomita::bench_summary(results);
  write(dir, "summary.csv", summary);
  std::cout << summary;
  bool failed = false;
  for (const auto& r : results)
    if (!r.error.empty()) {
      std::cerr << "tomita " << r.grammar << ": " << r.error << "\n";
      failed = true;
    }
  return failed ? 1 : 0;
}

// dfa

int cmd_dfa_inspect(const std::string& path) {
  Dfa d = parse_dfa(read_file(path));
  Dfa m = minimize(d);
  std::cout << "alphabet: " << d.alphabet().format_word([&] {
    Word all;
    for (Symbol a = 0; a < d.alphabet().size(); ++a) all.push_back(a);
    return all;
  }()) << "\n";
  std::cout << "states: " << d.num_states() << " (minimal " << m.num_states() << ")\n";
  std::size_t accepting = 0;
  for (StateId q = 0; q < d.num_states(); ++q) accepting += d.is_accepting(q);
  std::cout << "accepting states: " << accepting << "\n";
  if (auto w = shortest_accepted(d)) std::cout << "shortest accepted: " << d.alphabet().format_word(*w) << "\n";
  else std::cout << "language is empty\n";
  if (auto w = shortest_accepted(complement(d))) std::cout << "shortest rejected: " << d.alphabet().format_word(*w) << "\n";
  else std::cout << "language is universal\n";
  return 0;
}

int cmd_dfa_dot(const std::string& path, const std::string& out) {
  Dfa d = parse_dfa(read_file(path));
  std::string dot = to_dot(d, fs::path(path).stem().string());
  if (out.empty()) std::cout << dot;
  else write_file(out, dot);
  return 0;
}

int cmd_dfa_accepts(const std::string& path, const std::string& word) {
  Dfa d = parse_dfa(read_file(path));
  bool yes = d.accepts(d.alphabet().parse_word(word));
  std::cout << (yes ? "accept" : "reject") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn task automata from labeled examples, membership queries and demonstrations."};
  app.require_subcommand(1);

  IdentifyArgs ident;
  auto* identify = app.add_subcommand("identify", "Find the k smallest DFAs consistent with labeled examples");
  identify->add_option("--examples", ident.examples, "Labeled examples (JSON)")->required();
  identify->add_option("-k", ident.k, "Number of DFAs")->capture_default_str();
  identify->add_option("--max-states", ident.max_states, "Largest DFA size searched")->capture_default_str();
  identify->add_option("--out", ident.out, "Output directory")->capture_default_str();

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "Learn a gridworld task DFA from membership queries");
  add_oracle_flags(learn, learn_args.c);
  learn->add_option("--budget", learn_args.c.budget, "Membership-query budget")->capture_default_str();
  learn->add_option("--prompt", learn_args.prompt, "Task description shown to the language model");
  learn->add_option("--examples", learn_args.examples, "Seed examples (JSON)");
  learn->add_option("--cache", learn_args.cache, "Answer cache file, read and appended");

  DissArgs diss_args;
  auto* diss = app.add_subcommand("diss", "Search for the task DFA that best explains demonstrations");
  diss_args.cmd = diss;
  diss->add_option("config", diss_args.config, "Run configuration (JSON)")->required();
  add_oracle_flags(diss, diss_args.c);
  diss->add_option("--budget", diss_args.c.budget, "Queries per iteration (overrides the config)");
  diss->add_option("--lambda", diss_args.lambda, "Weight of the DFA size term");
  diss->add_option("--horizon", diss_args.horizon, "Planning horizon, 0 for demo length plus slack");
  diss->add_option("--iterations", diss_args.iterations, "Number of iterations");

  Common tom;
  tom.budget = 30;
  auto* tomita_cmd = app.add_subcommand("tomita", "Learn the seven Tomita grammars and measure hallucinations");
  add_oracle_flags(tomita_cmd, tom);
  tomita_cmd->add_option("--budget", tom.budget, "Membership queries per grammar")->capture_default_str();

  std::string dfa_path, dfa_out, dfa_word;
  auto* dfa = app.add_subcommand("dfa", "Inspect or export a DFA file");
  dfa->require_subcommand(1);
  auto* inspect = dfa->add_subcommand("inspect", "Print size and shortest accepted and rejected words");
  inspect->add_option("file", dfa_path, "DFA file")->required()->check(CLI::ExistingFile);
  auto* dot = dfa->add_subcommand("dot", "Write Graphviz DOT");
  dot->add_option("file", dfa_path, "DFA file")->required()->check(CLI::ExistingFile);
  dot->add_option("--out", dfa_out, "Output file (default: standard output)");
  auto* check = dfa->add_subcommand("accepts", "Run a word through the DFA");
  check->add_option("file", dfa_path, "DFA file")->required()->check(CLI::ExistingFile);
  check->add_option("word", dfa_word, "Comma-separated symbols")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (identify->parsed()) return cmd_identify(ident);
    if (learn->parsed()) return cmd_learn(learn_args);
    if (diss->parsed()) return cmd_diss(diss_args);
    if (tomita_cmd->parsed()) return cmd_tomita(tom);
    if (inspect->parsed()) return cmd_dfa_inspect(dfa_path);
    if (dot->parsed()) return cmd_dfa_dot(dfa_path, dfa_out);
    if (check->parsed()) return cmd_dfa_accepts(dfa_path, dfa_word);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
