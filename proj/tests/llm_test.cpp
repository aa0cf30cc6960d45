#include <gtest/gtest.h>

#include <thread>

#include "taskdfa/llm_http.hpp"
#include "taskdfa/world.hpp"
#include "test_util.hpp"

using namespace taskdfa;

namespace {

Word cw(const char* s) { return color_alphabet().parse_word(s); }

TaskPrompt gridworld_task(bool allow_unsure = false) {
  TaskPrompt t;
  t.description = taskdfa::read_file(testutil::data_path("task_prompt.txt"));
  t.seed = LabeledExamples(color_alphabet());
  for (const auto& w : testutil::appendix_positive()) t.seed.add(w, true);
  for (const auto& w : testutil::appendix_negative()) t.seed.add(w, false);
  t.allow_unsure = allow_unsure;
  return t;
}

const char* kRedRedBlueReply =
    "To determine if [red, red, blue] is a positive example, we need to check if it conforms to all the rules.\n\n"
    "1) The sequence must contain at least one yellow tile - FINAL_ANSWER: no";

}  // namespace

TEST(Render, QuestionTurns) {
  auto task = gridworld_task();
  auto c = render_membership_prompt(task, {}, cw("red, red, blue"));
  ASSERT_EQ(c.turns.size(), 2u);
  EXPECT_EQ(c.turns[0].role, "system");
  EXPECT_EQ(c.turns[1].content, "Is [red, red, blue] a positive example?");
  EXPECT_EQ(render_membership_prompt(task, {}, cw("yellow")).turns[1].content, "Is [yellow] a positive example?");
  EXPECT_EQ(render_membership_prompt(task, {}, {}).turns[1].content, "Is [] a positive example?");
  EXPECT_EQ(render_membership_prompt(task, {}, cw("red")).turns[0].content,
            render_membership_prompt(task, {}, cw("red")).turns[0].content);
}

TEST(Render, PromptEndsWithMarkerInstruction) {
  auto text = gridworld_task().render();
  EXPECT_NE(text.find("POSITIVE EXAMPLES\n  - [yellow]"), std::string::npos);
  EXPECT_NE(text.find("  - [blue, yellow]"), std::string::npos);
  EXPECT_TRUE(text.ends_with("FINAL_ANSWER: <yes, no>."));
  EXPECT_TRUE(gridworld_task(true).render().ends_with("FINAL_ANSWER: <yes, no, unsure>."));
}

TEST(Parse, FinalAnswer) {
  EXPECT_EQ(parse_final_answer(kRedRedBlueReply, false), MembershipAnswer::No);
  EXPECT_EQ(parse_final_answer("FINAL_ANSWER: yes", false), MembershipAnswer::Yes);
  EXPECT_EQ(parse_final_answer("final_answer: **Yes**.", false), MembershipAnswer::Yes);
  EXPECT_EQ(parse_final_answer("FINAL_ANSWER: no ... so FINAL_ANSWER: yes", false), MembershipAnswer::Yes);
  EXPECT_EQ(parse_final_answer("true", false), MembershipAnswer::Yes);
  EXPECT_THROW(parse_final_answer("I think the answer is yes", false), MalformedResponse);
  EXPECT_THROW(parse_final_answer("FINAL_ANSWER: maybe", true), MalformedResponse);
  EXPECT_THROW(parse_final_answer("FINAL_ANSWER: unsure", false), MalformedResponse);
  EXPECT_EQ(parse_final_answer("FINAL_ANSWER: unsure", true), MembershipAnswer::Unsure);
  for (auto a : {MembershipAnswer::Yes, MembershipAnswer::No, MembershipAnswer::Unsure})
    EXPECT_EQ(parse_final_answer(std::string("FINAL_ANSWER: ") + to_string(a), true), a);
}

TEST(LlmOracle, AppendixTranscript) {
  ScriptedTransport t({kRedRedBlueReply});
  LlmOracle o(gridworld_task(), {}, t);
  EXPECT_EQ(o.query(cw("red, red, blue")), MembershipAnswer::No);
  ASSERT_EQ(t.requests.size(), 1u);
  EXPECT_EQ(t.requests[0].temperature, 0.0);
  EXPECT_EQ(t.requests[0].messages.back().content, "Is [red, red, blue] a positive example?");
}

TEST(LlmOracle, UnsureAllowed) {
  ScriptedTransport t({"FINAL_ANSWER: unsure"});
  LlmOracle o(gridworld_task(true), {}, t);
  EXPECT_EQ(o.query(cw("green")), MembershipAnswer::Unsure);
}

TEST(LlmOracle, TimeoutsBecomeUnavailable) {
  ScriptedTransport t({"FINAL_ANSWER: yes"}, 3);
  LlmOracle o(gridworld_task(), {}, t);
  EXPECT_THROW(o.query(cw("yellow")), OracleUnavailable);
  EXPECT_EQ(t.requests.size(), 3u);
  EXPECT_TRUE(o.conversation().turns.empty());
}

TEST(LlmOracle, RetryOnceThenSucceed) {
  ScriptedTransport t({"FINAL_ANSWER: yes"}, 2);
  LlmOracle o(gridworld_task(), {}, t);
  EXPECT_EQ(o.query(cw("yellow")), MembershipAnswer::Yes);
  EXPECT_EQ(t.requests.size(), 3u);
}

TEST(LlmOracle, MalformedGetsOneCorrectiveRetry) {
  ScriptedTransport t({"yes I think so", "FINAL_ANSWER: yes", "rambling", "still rambling"});
  LlmOracle o(gridworld_task(), {}, t);
  EXPECT_EQ(o.query(cw("yellow")), MembershipAnswer::Yes);
  EXPECT_EQ(t.requests[1].messages.size(), t.requests[0].messages.size() + 2);
  EXPECT_EQ(o.query(cw("blue")), MembershipAnswer::Unsure);
  EXPECT_EQ(o.warnings().size(), 1u);
  EXPECT_EQ(o.conversation().turns.size(), 5u);
}

TEST(LlmOracle, ConversationGrowthAndReplay) {
  std::vector<std::string> replies{"FINAL_ANSWER: yes", "so FINAL_ANSWER: no", "FINAL_ANSWER: no", "FINAL_ANSWER: yes"};
  ScriptedTransport t(replies);
  LlmOracle o(gridworld_task(), {}, t);
  std::vector<MembershipAnswer> answers;
  std::vector<Word> words{cw("yellow"), cw("red"), cw("blue, yellow"), cw("green, yellow")};
  for (std::size_t i = 0; i < words.size(); ++i) {
    answers.push_back(o.query(words[i]));
    EXPECT_EQ(o.conversation().turns.size(), 1 + 2 * (i + 1));
  }
  for (std::size_t i = 1; i < o.conversation().turns.size(); ++i)
    EXPECT_EQ(o.conversation().turns[i].role, i % 2 ? "user" : "assistant");
  auto stored = parse_conversation_jsonl(conversation_jsonl(o.conversation()));
  EXPECT_EQ(stored.turns, o.conversation().turns);
  EXPECT_EQ(replay_answers(stored, false), answers);
  // The second request carries the first exchange.
  EXPECT_EQ(t.requests[1].messages.size(), 4u);
}

TEST(LlmOracle, ContextTruncationDropsOldestPairs) {
  LlmEndpointConfig cfg;
  cfg.context_tokens = gridworld_task().render().size() / 4 + 30;
  std::vector<std::string> replies(6, std::string(60, 'x') + " FINAL_ANSWER: yes");
  ScriptedTransport t(replies);
  LlmOracle o(gridworld_task(), cfg, t);
  for (int i = 0; i < 6; ++i) o.query(Word(static_cast<std::size_t>(i), kYellow));
  const auto& last = t.requests.back().messages;
  EXPECT_EQ(last.front().role, "system");
  EXPECT_LT(last.size(), o.conversation().turns.size());
  EXPECT_EQ(last.back().content, "Is [yellow, yellow, yellow, yellow, yellow] a positive example?");
  EXPECT_EQ(o.conversation().turns.size(), 13u);
}

TEST(LlmOracle, GrammarParameter) {
  LlmEndpointConfig cfg;
  cfg.use_grammar = true;
  ScriptedTransport t({"FINAL_ANSWER: yes"});
  LlmOracle o(gridworld_task(), cfg, t);
  o.query(cw("yellow"));
  ASSERT_TRUE(t.requests[0].grammar);
  EXPECT_NE(t.requests[0].grammar->find("FINAL_ANSWER: "), std::string::npos);
  EXPECT_EQ(t.requests[0].to_json()["grammar"], *t.requests[0].grammar);
  EXPECT_EQ(o.unconstrained_queries(), 0u);
}

TEST(Http, LocalServerRoundTrip) {
  httplib::Server server;
  nlohmann::json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    nlohmann::json body{{"choices", {{{"message", {{"role", "assistant"}, {"content", kRedRedBlueReply}}}}}}};
    res.set_content(body.dump(), "application/json");
  });
  server.Post("/broken/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("TASKDFA_TEST_KEY", "sk-test", 1);
  LlmEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.api_key_env = "TASKDFA_TEST_KEY";
  cfg.model = "test-model";
  HttpTransport transport(cfg);
  LlmOracle o(gridworld_task(), cfg, transport);
  EXPECT_EQ(o.query(cw("red, red, blue")), MembershipAnswer::No);
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["messages"].size(), 2u);
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_TRUE(seen.contains("max_tokens"));
  EXPECT_EQ(auth, "Bearer sk-test");

  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  cfg.retries = 2;
  HttpTransport broken(cfg);
  LlmOracle b(gridworld_task(), cfg, broken);
  EXPECT_THROW(b.query(cw("yellow")), OracleUnavailable);

  server.stop();
  th.join();
}
