// Copyright 2026 The faithrefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "faithrefine/error.hpp"
#include "faithrefine/gateway.hpp"
#include "support/mock_server.hpp"
#include "support/parse_corpus.hpp"
#include "support/test_support.hpp"

namespace faithrefine {
namespace {

using testing::answering;
using testing::MockServer;
using testing::reply;
using testing::scripted;

// ---------------------------------------------------------------------------
// Parsing

class ParseCorpus : public ::testing::TestWithParam<testing::ParseCase> {};

TEST_P(ParseCorpus, MatchesExpectation) {
  const auto& c = GetParam();
  if (!c.answer) {
    EXPECT_THROW(parse_structured(c.raw, c.domain), ParseError);
    return;
  }
  const auto r = parse_structured(c.raw, c.domain);
  EXPECT_EQ(r.answer, *c.answer);
  EXPECT_EQ(r.parse_path, c.path);
  EXPECT_EQ(r.raw, c.raw);
  if (c.reasoning) {
    EXPECT_EQ(r.reasoning, *c.reasoning);
  }
}

INSTANTIATE_TEST_SUITE_P(Corpus, ParseCorpus, ::testing::ValuesIn(testing::parse_corpus()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(ParseCorpusShape, HasAtLeastThirtyCases) { EXPECT_GE(testing::parse_corpus().size(), 30u); }

TEST(ParseProperty, RoundTripRandomPairs) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const auto reasoning = testing::random_reasoning(rng);
    const auto answer = testing::random_answer(rng);
    const std::string raw = reply(answer, reasoning);
    const auto r = parse_structured(raw);
    ASSERT_EQ(r.reasoning, reasoning) << raw;
    ASSERT_EQ(r.answer, answer) << raw;
    ASSERT_EQ(r.parse_path, ParsePath::strict_json);
    const auto fenced = parse_structured("```json\n" + raw + "\n```", AnswerDomain{answer});
    ASSERT_EQ(fenced.reasoning, reasoning);
    ASSERT_EQ(fenced.parse_path, ParsePath::fenced_json);
  }
}

TEST(Normalize, StripsPunctuationAndCase) {
  EXPECT_EQ(normalize_answer("  Yes. "), "yes");
  EXPECT_EQ(normalize_answer("\"No\""), "no");
  EXPECT_EQ(normalize_answer("(2)"), "2");
  EXPECT_EQ(normalize_answer("New York"), "new york");
  EXPECT_EQ(normalize_answer("..."), "");
}

// ---------------------------------------------------------------------------
// Re-ask

TEST(AskStructured, FirstReplyParses) {
  Agent a(answering("a", {"yes"}));
  const auto t = ask_structured(a, "p", {"yes", "no"});
  EXPECT_EQ(t.answer, "yes");
  EXPECT_EQ(t.calls, 1);
  EXPECT_FALSE(t.abstained);
  EXPECT_EQ(a.calls(), 1u);
}

TEST(AskStructured, ReaskAppendsSuffixAndCountsTwoCalls) {
  struct Recorder : ChatBackend {
    std::vector<std::string> prompts;
    std::string complete(std::string_view p) override {
      prompts.emplace_back(p);
      return prompts.size() == 1 ? "hmm" : reply("no");
    }
  };
  auto backend = std::make_shared<Recorder>();
  Agent a(scripted("a", {}), backend);
  const auto t = ask_structured(a, "Question?", {"yes", "no"});
  EXPECT_EQ(t.answer, "no");
  EXPECT_EQ(t.calls, 2);
  EXPECT_EQ(t.parse_path, ParsePath::strict_json);
  ASSERT_EQ(backend->prompts.size(), 2u);
  EXPECT_EQ(backend->prompts[1], "Question?\nPlease strictly output in JSON format.");
}

TEST(AskStructured, KeywordFallbackOnSecondReplyFirst) {
  Agent a(scripted("a", {"I lean yes", "final: no"}));
  const auto t = ask_structured(a, "p", {"yes", "no"});
  EXPECT_EQ(t.answer, "no");
  EXPECT_EQ(t.parse_path, ParsePath::keyword_fallback);
}

TEST(AskStructured, KeywordFallbackOnFirstReplyWhenSecondHasNone) {
  Agent a(scripted("a", {"I lean yes", "???"}));
  const auto t = ask_structured(a, "p", {"yes", "no"});
  EXPECT_EQ(t.answer, "yes");
  EXPECT_EQ(t.calls, 2);
}

TEST(AskStructured, AbstainsWhenNothingParses) {
  Agent a(scripted("a", {"???", "!!!"}));
  const auto t = ask_structured(a, "p", {"yes", "no"});
  EXPECT_TRUE(t.abstained);
  EXPECT_EQ(t.calls, 2);
  EXPECT_FALSE(t.parse_path.has_value());
}

// ---------------------------------------------------------------------------
// Prompts

TEST(Prompts, RenderBindsPlaceholdersAndKeepsLiteralBraces) {
  const auto p = render_prompt(TemplateId::detect, {{"Document", "D"}, {"Sentence", "S"}});
  EXPECT_EQ(p.rfind("Document:\nD\nSentence:\nS\nDetermine", 0), 0u);
  EXPECT_NE(p.find(R"({"reasoning": "", "answer": ""})"), std::string::npos);
  EXPECT_EQ(p.find("{{"), std::string::npos);
}

TEST(Prompts, UnboundPlaceholderIsATemplateError) {
  EXPECT_THROW(render_prompt(TemplateId::detect, {{"Document", "D"}}), TemplateError);
}

TEST(Prompts, BoundValuesAreNotReinterpreted) {
  EXPECT_EQ(render_body("<{A}>", {{"A", "{B}"}}), "<{B}>");
  EXPECT_EQ(render_body("{{A}} {not closed", {}), "{A} {not closed");
}

TEST(Prompts, EveryTemplateRendersWithItsPlaceholders) {
  const Bindings all{{"Document", "d"},      {"Sentence", "s"},         {"Summary", "m"},
                     {"Topic", "t"},         {"SummaryList", "l"},      {"Feedback", "f"},
                     {"InitialPrompt", "i"}, {"AgentAnswers", "a"},     {"HumanCritique", "h"},
                     {"GeneratedCritique", "g"}, {"CritiqueList", "c"}};
  for (auto id : {TemplateId::direct_refine, TemplateId::detect, TemplateId::rerank,
                  TemplateId::critique, TemplateId::refine, TemplateId::debate_wrapper,
                  TemplateId::likert_judge, TemplateId::critique_judge,
                  TemplateId::critique_rerank}) {
    EXPECT_NO_THROW(render_prompt(id, all)) << to_string(id);
    EXPECT_EQ(prompt_template(id).template_id, id);
  }
}

TEST(Prompts, DebateWrapperListsPriorAnswers) {
  const auto p = render_debate_prompt("Q", {{"because \"x\"", "yes"}, {"r2", "no"}});
  EXPECT_EQ(p,
            "Q\nCarefully review the following solutions from other agents as additional "
            "information, and provide your own answer and step-by-step reasoning to the "
            "question.\n"
            "One agent's answer: {\"reasoning\": \"because \\\"x\\\"\", \"answer\": \"yes\"}\n"
            "One agent's answer: {\"reasoning\": \"r2\", \"answer\": \"no\"}");
}

TEST(Prompts, NumberedListIsOneBased) {
  EXPECT_EQ(numbered_list("Summary", {"a", "b"}), "### Summary 1: a\n### Summary 2: b");
}

// ---------------------------------------------------------------------------
// Backends

TEST(Scripted, ReplaysInOrderThenExhausts) {
  Agent a(scripted("a", {"one", "two"}));
  EXPECT_EQ(a.complete("p"), "one");
  EXPECT_EQ(a.complete("p"), "two");
  EXPECT_THROW(a.complete("p"), ScriptExhausted);
}

TEST(Scripted, EmptyPromptRejected) {
  Agent a(scripted("a", {"one"}));
  EXPECT_THROW(a.complete(""), InvalidArgument);
}

TEST(Pool, DuplicateIdsRejected) {
  EXPECT_THROW(make_pool({scripted("a", {}), scripted("a", {})}), ConfigError);
}

TEST(Pool, EachAgentOwnsItsScript) {
  auto pool = make_pool({scripted("a", {"x"}), scripted("b", {"x"})});
  EXPECT_EQ(pool[0]->complete("p"), "x");
  EXPECT_EQ(pool[1]->complete("p"), "x");
}

TEST(AgentSpecValidate, RejectsBadFields) {
  AgentSpec s = scripted("a", {});
  s.max_in_flight = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = scripted("a", {});
  s.retry.max_retries = -1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = scripted("a", {});
  s.backend = BackendKind::remote_chat;
  EXPECT_THROW(s.validate(), ConfigError);
  s.endpoint = "http://x/v1";
  s.model_name = "m";
  s.api_key_env = "K";
  EXPECT_NO_THROW(s.validate());
}

class RemoteBackend : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv(kKeyVar, "sk-test", 1); }
  void TearDown() override { ::unsetenv(kKeyVar); }

  AgentSpec remote(const std::string& base_url) const {
    AgentSpec s;
    s.agent_id = "remote";
    s.backend = BackendKind::remote_chat;
    s.model_name = "test-model";
    s.endpoint = base_url + "/v1/chat/completions";
    s.api_key_env = kKeyVar;
    s.decode_params = {{"temperature", 0}};
    s.retry = {2, std::chrono::milliseconds(5), 2.0};
    s.timeout = std::chrono::milliseconds(2000);
    return s;
  }

  static std::string completion(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
        .dump();
  }

  static constexpr const char* kKeyVar = "FAITHREFINE_TEST_API_KEY";
};

TEST_F(RemoteBackend, SendsModelMessagesAndBearerKey) {
  MockServer server;
  std::string auth;
  nlohmann::json body;
  server.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    body = nlohmann::json::parse(req.body);
    res.set_content(completion("hello"), "application/json");
  });
  server.start();
  Agent a(remote(server.base_url()));
  EXPECT_EQ(a.complete("prompt text"), "hello");
  EXPECT_EQ(auth, "Bearer sk-test");
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["messages"], nlohmann::json::parse(R"([{"role":"user","content":"prompt text"}])"));
}

TEST_F(RemoteBackend, RetriesServerErrors) {
  MockServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 500;
      return;
    }
    res.set_content(completion("ok"), "application/json");
  });
  server.start();
  Agent a(remote(server.base_url()));
  EXPECT_EQ(a.complete("p"), "ok");
  EXPECT_EQ(hits.load(), 3);
}

TEST_F(RemoteBackend, GivesUpAfterMaxRetries) {
  MockServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  server.start();
  Agent a(remote(server.base_url()));
  EXPECT_THROW(a.complete("p"), TransportError);
  EXPECT_EQ(hits.load(), 3);
}

TEST_F(RemoteBackend, ClientErrorsAreNotRetried) {
  MockServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  server.start();
  Agent a(remote(server.base_url()));
  EXPECT_THROW(a.complete("p"), TransportError);
  EXPECT_EQ(hits.load(), 1);
}

TEST_F(RemoteBackend, UnreachableEndpointIsATransportError) {
  Agent a(remote("http://127.0.0.1:" + std::to_string(testing::unused_port())));
  EXPECT_THROW(a.complete("p"), TransportError);
}

TEST_F(RemoteBackend, MissingCredentials) {
  ::unsetenv(kKeyVar);
  const auto spec = remote("http://127.0.0.1:1");
  EXPECT_THROW(check_credentials(spec), MissingCredentials);
  Agent a(spec);
  EXPECT_THROW(a.complete("p"), MissingCredentials);
  EXPECT_NO_THROW(check_credentials(scripted("s", {})));
}

TEST_F(RemoteBackend, MalformedEndpointIsAConfigError) {
  auto spec = remote("ftp://x");
  EXPECT_THROW(Agent{spec}, ConfigError);
}

TEST(ExtractReply, AcceptsMessageOrTextChoices) {
  EXPECT_EQ(RemoteChatBackend::extract_reply(
                nlohmann::json::parse(R"({"choices":[{"message":{"content":"a"}}]})")),
            "a");
  EXPECT_EQ(RemoteChatBackend::extract_reply(nlohmann::json::parse(R"({"choices":[{"text":"b"}]})")),
            "b");
  EXPECT_THROW(RemoteChatBackend::extract_reply(nlohmann::json::parse(R"({"choices":[]})")),
               TransportError);
}

}  // namespace
}  // namespace faithrefine
