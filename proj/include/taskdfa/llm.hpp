#pragma once

#include <cctype>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskdfa/oracle.hpp"

namespace taskdfa {

/// Natural-language task plus the seed examples shown to the model.
struct TaskPrompt {
  std::string description;
  LabeledExamples seed;
  std::string answer_instructions =
      "Please briefly answer the following questions using step-by-step reasoning to show your work. "
      "Do not answer any other question.";
  bool allow_unsure = false;

  std::string answer_set() const { return allow_unsure ? "<yes, no, unsure>" : "<yes, no>"; }

  std::string render() const {
    std::string out(detail::trim(description));
    if (seed.size() > 0) {
      out += "\n\nAdditionally, by examining demonstrations of the task, we conjecture the following labeled "
             "examples:\n\nPOSITIVE EXAMPLES\n";
      for (const auto& w : seed.positive) out += "  - " + seed.alphabet.format_word(w) + "\n";
      out += "\nNEGATIVE EXAMPLES\n";
      for (const auto& w : seed.negative) out += "  - " + seed.alphabet.format_word(w) + "\n";
    }
    out += "\n\n";
    if (!answer_instructions.empty()) out += answer_instructions + " ";
    out += "When you arrive at a conclusion, please state it as FINAL_ANSWER: " + answer_set() + ".";
    return out;
  }
};

struct Turn {
  std::string role;
  std::string content;
  bool operator==(const Turn&) const = default;
};

/// The task prompt as a system turn, then alternating user/assistant turns.
struct Conversation {
  std::vector<Turn> turns;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 512;
};

inline std::string membership_question(const Alphabet& alphabet, const Word& w) {
  return "Is " + alphabet.format_word(w) + " a positive example?";
}

inline Conversation render_membership_prompt(const TaskPrompt& task, const Conversation& history, const Word& w) {
  task.seed.alphabet.check_word(w);
  Conversation c = history;
  if (c.turns.empty()) c.turns.push_back({"system", task.render()});
  c.turns.push_back({"user", membership_question(task.seed.alphabet, w)});
  return c;
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::optional<MembershipAnswer> answer_token(std::string_view token) {
  if (token == "yes" || token == "true") return MembershipAnswer::Yes;
  if (token == "no" || token == "false") return MembershipAnswer::No;
  if (token == "unsure") return MembershipAnswer::Unsure;
  return std::nullopt;
}

}  // namespace detail

/// Reads the token after the last "FINAL_ANSWER:" (any case). A reply that
/// is nothing but a bare answer word is also accepted; "true"/"false" count
/// as yes/no.
inline MembershipAnswer parse_final_answer(std::string_view response, bool allow_unsure) {
  const std::string text = detail::lower(response);
  const std::string marker = "final_answer:";
  std::string token;
  if (auto at = text.rfind(marker); at != std::string::npos) {
    std::size_t i = at + marker.size();
    auto skip = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '*' || c == '"' || c == '\''; };
    while (i < text.size() && skip(text[i])) ++i;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) token += text[i++];
    if (token.empty()) throw MalformedResponse("nothing follows FINAL_ANSWER:");
  } else {
    std::string bare(detail::trim(text));
    while (!bare.empty() && (bare.back() == '.' || bare.back() == '"')) bare.pop_back();
    if (!bare.empty() && bare.front() == '"') bare.erase(0, 1);
    if (!detail::answer_token(bare)) throw MalformedResponse("no FINAL_ANSWER marker in response");
    token = bare;
  }
  auto a = detail::answer_token(token);
  if (!a) throw MalformedResponse("unexpected answer '" + token + "'");
  if (*a == MembershipAnswer::Unsure && !allow_unsure) throw MalformedResponse("unsure is not a permitted answer");
  return *a;
}

/// GBNF grammar for endpoints that support constrained decoding.
inline std::string answer_grammar(bool allow_unsure) {
  return std::string("root ::= work \"FINAL_ANSWER: \" answer\n"
                     "work ::= ([^F] | \"F\" [^I])*\n"
                     "answer ::= \"yes\" | \"no\"") +
         (allow_unsure ? " | \"unsure\"\n" : "\n");
}

struct ChatRequest {
  std::string model;
  std::vector<Turn> messages;
  double temperature = 0.0;
  int max_tokens = 512;
  std::vector<std::string> stop;
  std::optional<std::string> grammar;

  nlohmann::json to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["messages"] = nlohmann::json::array();
    for (const auto& t : messages) j["messages"].push_back({{"role", t.role}, {"content", t.content}});
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    if (!stop.empty()) j["stop"] = stop;
    if (grammar) j["grammar"] = *grammar;
    return j;
  }
};

/// Sends one chat-completion request and returns the first choice's text.
/// Throws TransportError on failure.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct LlmEndpointConfig {
  std::string base_url = "http://localhost:8080/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "gpt-4o";
  double timeout_seconds = 60.0;
  int retries = 3;
  double temperature = 0.0;
  int max_tokens = 512;
  bool use_grammar = false;
  /// Approximate token budget for a request (characters / 4); 0 = unlimited.
  std::size_t context_tokens = 0;
};

/// Membership oracle backed by a chat model. The stored conversation keeps
/// each question with the reply that settled it; corrective re-asks are sent
/// but not stored.
class LlmOracle : public Oracle {
 public:
  LlmOracle(TaskPrompt task, LlmEndpointConfig config, ChatTransport& transport)
      : task_(std::move(task)), config_(std::move(config)), transport_(transport) {
    if (config_.temperature < 0) throw InputError("temperature must be non-negative");
    conv_.model = config_.model;
    conv_.temperature = config_.temperature;
    conv_.max_tokens = config_.max_tokens;
  }

  bool timed() const override { return true; }

  MembershipAnswer query(const Word& w) override {
    charge();
    Conversation next = render_membership_prompt(task_, conv_, w);
    auto messages = fit(next.turns);
    std::string reply = send(messages);
    MembershipAnswer answer;
    try {
      answer = parse_final_answer(reply, task_.allow_unsure);
    } catch (const MalformedResponse& first) {
      messages.push_back({"assistant", reply});
      messages.push_back({"user", "Your answer did not follow the required format. Please answer again and end "
                                  "with FINAL_ANSWER: " + task_.answer_set() + "."});
      reply = send(messages);
      try {
        answer = parse_final_answer(reply, task_.allow_unsure);
      } catch (const MalformedResponse& second) {
        warnings_.push_back("query " + task_.seed.alphabet.format_word(w) + ": " + second.what() +
                            "; recorded as unsure");
        answer = MembershipAnswer::Unsure;
      }
    }
    if (!config_.use_grammar) ++unconstrained_;
    next.turns.push_back({"assistant", reply});
    conv_ = std::move(next);
    return answer;
  }

  const Conversation& conversation() const { return conv_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Queries answered without grammar-constrained decoding.
  std::size_t unconstrained_queries() const { return unconstrained_; }

 private:
  std::vector<Turn> fit(const std::vector<Turn>& turns) const {
    std::vector<Turn> out = turns;
    if (config_.context_tokens == 0) return out;
    auto tokens = [](const std::vector<Turn>& ts) {
      std::size_t chars = 0;
      for (const auto& t : ts) chars += t.content.size();
      return chars / 4;
    };
    while (out.size() > 2 && tokens(out) > config_.context_tokens) out.erase(out.begin() + 1, out.begin() + 3);
    return out;
  }

  std::string send(const std::vector<Turn>& messages) {
    ChatRequest req;
    req.model = config_.model;
    req.messages = messages;
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;
    if (config_.use_grammar) req.grammar = answer_grammar(task_.allow_unsure);
    std::string last;
    for (int attempt = 0; attempt < std::max(1, config_.retries); ++attempt) {
      try {
        return transport_.complete(req);
      } catch (const TransportError& e) {
        last = e.what();
      }
    }
    throw OracleUnavailable("chat endpoint unavailable after " + std::to_string(std::max(1, config_.retries)) +
                            " attempts: " + last);
  }

  TaskPrompt task_;
  LlmEndpointConfig config_;
  ChatTransport& transport_;
  Conversation conv_;
  std::vector<std::string> warnings_;
  std::size_t unconstrained_ = 0;
};

/// One JSON object per turn: role, content.
inline std::string conversation_jsonl(const Conversation& c) {
  std::string out;
  for (const auto& t : c.turns) {
    nlohmann::ordered_json j;
    j["role"] = t.role;
    j["content"] = t.content;
    out += j.dump() + "\n";
  }
  return out;
}

inline Conversation parse_conversation_jsonl(std::string_view text) {
  Conversation c;
  for (auto line : detail::split(text, '\n')) {
    if (detail::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      c.turns.push_back({j.at("role").get<std::string>(), j.at("content").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("conversation log: ") + e.what());
    }
  }
  return c;
}

/// Re-parses every assistant turn of a stored conversation.
inline std::vector<MembershipAnswer> replay_answers(const Conversation& c, bool allow_unsure) {
  std::vector<MembershipAnswer> out;
  for (const auto& t : c.turns) {
    if (t.role != "assistant") continue;
    try {
      out.push_back(parse_final_answer(t.content, allow_unsure));
    } catch (const MalformedResponse&) {
      out.push_back(MembershipAnswer::Unsure);
    }
  }
  return out;
}

/// Test transport replaying canned replies in order.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies, std::size_t failures = 0)
      : replies_(std::move(replies)), failures_(failures) {}

  std::string complete(const ChatRequest& request) override {
    requests.push_back(request);
    if (failures_ > 0) {
      --failures_;
      throw TransportError("timed out");
    }
    if (next_ >= replies_.size()) throw TransportError("no more scripted replies");
    return replies_[next_++];
  }

  std::vector<ChatRequest> requests;

 private:
  std::vector<std::string> replies_;
  std::size_t failures_;
  std::size_t next_ = 0;
};

}  // namespace taskdfa
