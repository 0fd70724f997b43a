// Copyright 2026 The CtxBugGen Authors
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

#include "ctxbug/llm.hpp"

#include <gtest/gtest.h>
#include <stdlib.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "test_support.hpp"

namespace ctxbug::llm {
namespace {

const char kTemplate[] = "def add(self, status):\n    self.state = self.state <INFILL> status\n"
                         "    return self.state\n";

TEST(LlmPromptTest, InfillPromptHasNoContextAndNoRestriction) {
  Prompt p = BuildInfillPrompt(kTemplate, "Combine status into state.", 4, {"numpy"});
  EXPECT_EQ(p.kind, PromptKind::kInfill);
  EXPECT_NE(p.text.find(kTemplate), std::string::npos);
  EXPECT_NE(p.text.find("Combine status into state."), std::string::npos);
  EXPECT_EQ(p.text.find("not allowed"), std::string::npos);
  EXPECT_EQ(p.text.find("class "), std::string::npos);
  EXPECT_EQ(p.text.find("{{"), std::string::npos);
  EXPECT_EQ(p.Hash(), BuildInfillPrompt(kTemplate, "Combine status into state.", 4, {}).Hash());
}

TEST(LlmPromptTest, LibraryRuleAppendsRestriction) {
  Prompt p = BuildInfillPrompt(kTemplate, "r", 10, {"requests", "numpy"});
  std::string tail = p.text.substr(p.text.rfind("```"));
  EXPECT_NE(tail.find("not allowed to use the following libraries: requests, numpy"),
            std::string::npos);
  EXPECT_THROW(BuildInfillPrompt(kTemplate, "r", 10, {}), PromptError);
}

TEST(LlmPromptTest, IsoBugPromptRequiresBalancedMarkers) {
  EXPECT_EQ(CountMarkerPairs("a <START>+<END> b <START>c<END>"), 2u);
  EXPECT_THROW(BuildIsoBugPrompt("x = 1", "r"), PromptError);
  EXPECT_THROW(CountMarkerPairs("<START> a"), PromptError);
  EXPECT_THROW(CountMarkerPairs("<START> <START> a <END> <END>"), PromptError);
  EXPECT_THROW(CountMarkerPairs("a <END>"), PromptError);
  Prompt p = BuildIsoBugPrompt("x = a <START>|<END> b <START>c<END>\n", "r");
  EXPECT_EQ(p.kind, PromptKind::kIsoBug);
  EXPECT_NE(p.text.find("x = a <START>|<END> b <START>c<END>"), std::string::npos);
}

TEST(LlmPromptTest, AdaptationPromptKeepsPartOrder) {
  std::string context = "class Flags:\n    def has(self, s):\n        return True\n";
  Prompt p = BuildAdaptationPrompt("REQ", "def add(self, s):\n    return 1\n", context, "Flags",
                                   "add");
  std::size_t req = p.text.find("REQ");
  std::size_t code = p.text.find("def add(self, s)");
  std::size_t ctx = p.text.find("class Flags:");
  ASSERT_NE(req, std::string::npos);
  EXPECT_LT(req, code);
  EXPECT_LT(code, ctx);
  std::string leaked = context + "    def add(self, s):\n        return 2\n";
  EXPECT_THROW(BuildAdaptationPrompt("REQ", "def add(self):\n    pass\n", leaked, "Flags", "add"),
               PromptError);
}

TEST(LlmPromptTest, RenderTemplateRejectsMissingSlots) {
  EXPECT_EQ(RenderTemplate("a {{x}} b", {{"x", "1"}}), "a 1 b");
  EXPECT_THROW(RenderTemplate("a {{y}}", {{"x", "1"}}), PromptError);
  EXPECT_THROW(RenderTemplate("a {{y", {}), PromptError);
}

TEST(LlmStubTest, OutputIsAPureFunctionOfPromptModelAndSeed) {
  Prompt p = BuildInfillPrompt(kTemplate, "r", 4, {});
  ModelConfig config;
  StubBackend a(config), b(config);
  Generation first = a.Generate(p);
  Generation second = b.Generate(p);
  EXPECT_EQ(ToJson(first), ToJson(second));
  EXPECT_EQ(first.temperature, 0.0);
  EXPECT_EQ(first.prompt_hash, p.Hash());
  ExtractedCode code = ExtractCode(first.text);
  EXPECT_FALSE(code.empty);
  EXPECT_EQ(code.code.find("<INFILL>"), std::string::npos);
  EXPECT_FALSE(syntax::Parse(code.code).has_errors()) << code.code;

  int differing = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    ModelConfig other = config;
    other.seed = seed;
    if (StubBackend(other).Generate(p).text != first.text) ++differing;
  }
  EXPECT_GT(differing, 0);
}

TEST(LlmStubTest, TokenProbabilitiesCoverTheText) {
  Generation g = StubBackend(ModelConfig{}).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  ASSERT_TRUE(g.token_probs.has_value());
  std::string joined;
  for (const auto& t : *g.token_probs) {
    EXPECT_GT(t.prob, 0.0);
    EXPECT_LE(t.prob, 1.0);
    EXPECT_EQ(g.text.substr(t.offset, t.token.size()), t.token);
    joined += t.token;
  }
  EXPECT_EQ(joined, g.text);
}

TEST(LlmStubTest, IsoBugStubOnlyChangesMarkedSpans) {
  Prompt p = BuildIsoBugPrompt(
      "def add(self, status):\n    self.state = self.state <START>|<END> status\n"
      "    return self.state\n",
      "r");
  std::string code = ExtractCode(StubBackend(ModelConfig{}).Generate(p).text).code;
  EXPECT_TRUE(code.starts_with("def add(self, status):\n    self.state = self.state "));
  EXPECT_TRUE(code.ends_with(" status\n    return self.state"));
  EXPECT_EQ(code.find('|'), std::string::npos);
}

TEST(LlmStubTest, CannedTableTakesPrecedence) {
  Prompt p = BuildInfillPrompt(kTemplate, "r", 4, {});
  auto dir = testing::MakeTempDir("ctxbug-stub");
  ModelConfig config;
  config.stub_table = dir / "table.json";
  std::ofstream(config.stub_table) << nlohmann::json{{p.Hash(), "canned"}}.dump();
  EXPECT_EQ(StubBackend(config).Generate(p).text, "canned");
  std::filesystem::remove_all(dir);
}

TEST(LlmExtractTest, ExtractionPolicy) {
  EXPECT_EQ(ExtractCode("Here:\n```python\ndef f():\n    return 1\n```\n").code,
            "def f():\n    return 1");
  EXPECT_EQ(ExtractCode("```python\ndef a():\n    pass\n```\n```python\ndef b():\n    pass\n```")
                .code,
            "def a():\n    pass");
  EXPECT_TRUE(ExtractCode("I cannot help with that.").empty);
  EXPECT_TRUE(ExtractCode("").empty);
  ExtractedCode bare = ExtractCode("Sure.\ndef f(x):\n    return x\nThat is all.");
  EXPECT_FALSE(bare.empty);
  EXPECT_EQ(bare.code, "def f(x):\n    return x");
  EXPECT_EQ(ExtractCode("def g():\n    return 2\n").code, "def g():\n    return 2");
}

TEST(LlmGenerationTest, JsonRoundTrip) {
  Generation g;
  g.text = "x";
  g.token_probs = std::vector<TokenProb>{{"x", 0.75, 0}};
  g.model_id = "m";
  g.prompt_hash = "h";
  g.max_output_tokens = 10;
  g.truncated = true;
  Generation back = GenerationFromJson(ToJson(g));
  EXPECT_EQ(back.text, g.text);
  EXPECT_EQ(back.token_probs, g.token_probs);
  EXPECT_TRUE(back.truncated);
  g.token_probs.reset();
  EXPECT_FALSE(GenerationFromJson(ToJson(g)).token_probs.has_value());
}

// In-process chat-completions endpoint used to exercise the HTTP client.
class FakeProvider {
 public:
  FakeProvider() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      int current = ++active_;
      int seen = max_active_.load();
      while (current > seen && !max_active_.compare_exchange_weak(seen, current)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      int call = ++calls_;
      --active_;
      if (call <= failures_) {
        res.status = failure_status_;
        return;
      }
      nlohmann::json reply = {
          {"choices",
           {{{"message", {{"content", "def f():\n    return 1"}}},
             {"finish_reason", finish_reason_},
             {"logprobs",
              {{"content",
                {{{"token", "def"}, {"logprob", 0.0}},
                 {{"token", " f():\n    return 1"}, {"logprob", std::log(0.5)}}}}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }
  ModelConfig Config() const {
    ModelConfig c;
    c.stub = false;
    c.model_id = "fake-model";
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.retry = {4, 1, 4};
    return c;
  }

  int failures_ = 0;
  int failure_status_ = 503;
  std::string finish_reason_ = "stop";
  std::atomic<int> calls_{0};
  std::atomic<int> active_{0};
  std::atomic<int> max_active_{0};
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(LlmHttpTest, ParsesTextAndLogprobs) {
  FakeProvider provider;
  setenv("CTXBUG_API_KEY", "secret", 1);
  HttpBackend backend(provider.Config());
  unsetenv("CTXBUG_API_KEY");
  Generation g = backend.Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  ASSERT_FALSE(g.failed) << g.error;
  EXPECT_EQ(g.text, "def f():\n    return 1");
  ASSERT_TRUE(g.token_probs.has_value());
  ASSERT_EQ(g.token_probs->size(), 2u);
  EXPECT_DOUBLE_EQ((*g.token_probs)[0].prob, 1.0);
  EXPECT_NEAR((*g.token_probs)[1].prob, 0.5, 1e-12);
  EXPECT_EQ((*g.token_probs)[1].offset, 3u);
  EXPECT_EQ(provider.last_auth_, "Bearer secret");
  nlohmann::json body = nlohmann::json::parse(provider.last_body_);
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["model"], "fake-model");
}

TEST(LlmHttpTest, RetriesTransientFailures) {
  FakeProvider provider;
  provider.failures_ = 2;
  provider.failure_status_ = 429;
  Generation g = HttpBackend(provider.Config()).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  EXPECT_FALSE(g.failed) << g.error;
  EXPECT_EQ(provider.calls_, 3);
}

TEST(LlmHttpTest, GivesUpAfterBoundedAttempts) {
  FakeProvider provider;
  provider.failures_ = 100;
  Generation g = HttpBackend(provider.Config()).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  EXPECT_TRUE(g.failed);
  EXPECT_EQ(provider.calls_, 4);
}

TEST(LlmHttpTest, ClientErrorsAreNotRetried) {
  FakeProvider provider;
  provider.failures_ = 100;
  provider.failure_status_ = 400;
  Generation g = HttpBackend(provider.Config()).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  EXPECT_TRUE(g.failed);
  EXPECT_EQ(provider.calls_, 1);
}

TEST(LlmHttpTest, TruncationIsFlagged) {
  FakeProvider provider;
  provider.finish_reason_ = "length";
  Generation g = HttpBackend(provider.Config()).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  EXPECT_TRUE(g.truncated);
}

TEST(LlmHttpTest, InFlightCapIsHonoured) {
  FakeProvider provider;
  ModelConfig config = provider.Config();
  config.concurrency = 1;
  HttpBackend backend(config);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] { backend.Generate(BuildInfillPrompt(kTemplate, "r", 4, {})); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(provider.calls_, 4);
  EXPECT_EQ(provider.max_active_, 1);
}

TEST(LlmHttpTest, UnreachableEndpointFailsWithoutThrowing) {
  ModelConfig config;
  config.stub = false;
  config.endpoint = "http://127.0.0.1:1";
  config.retry = {2, 1, 1};
  Generation g = HttpBackend(config).Generate(BuildInfillPrompt(kTemplate, "r", 4, {}));
  EXPECT_TRUE(g.failed);
  EXPECT_FALSE(g.error.empty());
}

}  // namespace
}  // namespace ctxbug::llm
