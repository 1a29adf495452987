#include <gtest/gtest.h>

#include <cstdlib>

#include "fixture_server.hpp"
#include "sisynth/llm_gateway.hpp"

namespace sisynth {
namespace {

using testing::FixtureServer;

ProviderProfile http_profile(const std::string& url, const std::string& env = {}) {
  ProviderProfile p;
  p.name = "fixture";
  p.endpoint = url;
  p.model_id = "fixture-model";
  p.auth_env_var = env;
  p.timeout_s = 5;
  p.retry.base_backoff_s = 0.0;
  return p;
}

ChatClient no_sleep(ChatClient c, std::vector<std::chrono::milliseconds>* delays = nullptr) {
  c.set_sleeper([delays](std::chrono::milliseconds d) {
    if (delays) delays->push_back(d);
  });
  return c;
}

TEST(LlmGateway, BackoffDoublesAndCaps) {
  RetryPolicy p{6, 1.0, 5.0};
  EXPECT_EQ(backoff_delay(p, 1).count(), 1000);
  EXPECT_EQ(backoff_delay(p, 2).count(), 2000);
  EXPECT_EQ(backoff_delay(p, 3).count(), 4000);
  EXPECT_EQ(backoff_delay(p, 4).count(), 5000);
}

TEST(LlmGateway, RequestBodyShape) {
  auto p = mock_profile();
  p.temperature = 0.7;
  p.max_tokens = 99;
  const auto j = nlohmann::json::parse(build_chat_request(p, "hello", 42));
  EXPECT_EQ(j.at("model"), "mock-gpt");
  EXPECT_EQ(j.at("messages")[0].at("role"), "user");
  EXPECT_EQ(j.at("messages")[0].at("content"), "hello");
  EXPECT_EQ(j.at("temperature"), 0.7);
  EXPECT_EQ(j.at("max_tokens"), 99);
  EXPECT_EQ(j.at("seed"), 42);
  EXPECT_FALSE(nlohmann::json::parse(build_chat_request(p, "x", std::nullopt)).contains("seed"));
}

TEST(LlmGateway, ParseChatResponse) {
  const auto env = parse_chat_response(FixtureServer::envelope("content here"));
  EXPECT_EQ(env.content, "content here");
  ASSERT_TRUE(env.usage);
  EXPECT_EQ(env.usage->total_tokens, 8);
  for (const char* bad : {"not json", "{}", R"({"choices":[]})", R"({"choices":[{"message":{}}]})"}) {
    try {
      parse_chat_response(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocol);
    }
  }
}

TEST(LlmGateway, RetriesRateLimitThenSucceeds) {
  FixtureServer server([](const auto&, auto& res, int call) {
    if (call < 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
    } else {
      res.set_content(FixtureServer::envelope("[]"), "application/json");
    }
  });
  std::vector<std::chrono::milliseconds> delays;
  auto p = http_profile(server.url());
  p.retry.base_backoff_s = 0.5;
  const auto client = no_sleep(ChatClient(p), &delays);
  const auto c = client.complete("prompt");
  EXPECT_EQ(c.response_text, "[]");
  EXPECT_EQ(c.attempts, 3);
  EXPECT_EQ(c.http_status, 200);
  EXPECT_EQ(server.calls(), 3);
  EXPECT_EQ(delays, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500), std::chrono::milliseconds(1000)}));
  EXPECT_EQ(c.token_usage->prompt_tokens, 3);
  EXPECT_EQ(c.prompt_hash.size(), 64u);
}

TEST(LlmGateway, UnauthorizedIsFatal) {
  FixtureServer server([](const auto&, auto& res, int) { res.status = 401; });
  const auto client = no_sleep(ChatClient(http_profile(server.url())));
  try {
    client.complete("prompt");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuth);
    EXPECT_EQ(e.status(), 401);
  }
  EXPECT_EQ(server.calls(), 1);
}

TEST(LlmGateway, ServerErrorsExhaustRetries) {
  FixtureServer server([](const auto&, auto& res, int) { res.status = 503; });
  auto p = http_profile(server.url());
  p.retry.max_attempts = 3;
  const auto client = no_sleep(ChatClient(p));
  try {
    client.complete("prompt");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(server.calls(), 3);
}

TEST(LlmGateway, ClientErrorNotRetried) {
  FixtureServer server([](const auto&, auto& res, int) { res.status = 400; });
  const auto client = no_sleep(ChatClient(http_profile(server.url())));
  EXPECT_THROW(client.complete("prompt"), ProviderError);
  EXPECT_EQ(server.calls(), 1);
}

TEST(LlmGateway, ConnectionFailureIsTransport) {
  auto p = http_profile("http://127.0.0.1:1/v1/chat/completions");
  p.retry.max_attempts = 2;
  const auto client = no_sleep(ChatClient(p));
  try {
    client.complete("prompt");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_EQ(e.status(), 0);
  }
}

TEST(LlmGateway, SecretComesFromEnvironmentOnly) {
  FixtureServer server([](const auto&, auto& res, int) { res.set_content(FixtureServer::envelope("ok"), "application/json"); });
  ::setenv("SISYNTH_TEST_KEY", "sk-test-hunter2", 1);
  const auto client = no_sleep(ChatClient(http_profile(server.url(), "SISYNTH_TEST_KEY")));
  const auto c = client.complete("prompt");
  EXPECT_EQ(server.auth_headers().at(0), "Bearer sk-test-hunter2");
  EXPECT_EQ(nlohmann::json(c).dump().find("hunter2"), std::string::npos);
  nlohmann::json profile = client.profile();
  EXPECT_EQ(profile.dump().find("hunter2"), std::string::npos);
  EXPECT_EQ(profile.at("auth_env_var"), "SISYNTH_TEST_KEY");

  ::unsetenv("SISYNTH_TEST_KEY");
  try {
    client.complete("prompt");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuth);
  }
}

TEST(LlmGateway, InlineSecretsRejectedInProfiles) {
  for (const char* key : {"api_key", "token", "password"}) {
    nlohmann::json j = {{"name", "p"}, {"endpoint", "http://x/"}, {"model_id", "m"}, {key, "abc"}};
    try {
      j.get<ProviderProfile>();
      FAIL() << key;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  }
}

TEST(LlmGateway, ProfileJsonRoundTripAndValidation) {
  auto p = http_profile("https://api.example.com/v1/chat/completions", "OPENAI_API_KEY");
  p.retry.max_attempts = 7;
  nlohmann::json j = p;
  const auto q = j.get<ProviderProfile>();
  EXPECT_EQ(q.endpoint, p.endpoint);
  EXPECT_EQ(q.retry.max_attempts, 7);
  p.temperature = -1;
  EXPECT_THROW(p.validate(), Error);
  ProviderProfile empty;
  EXPECT_THROW(ChatClient{empty}, Error);
}

TEST(LlmGateway, CompletionJsonRoundTrip) {
  RawCompletion c;
  c.job_id = "j";
  c.request_index = 3;
  c.provider = "gpt";
  c.prompt_hash = "h";
  c.response_text = "[1]";
  c.http_status = 200;
  c.attempts = 2;
  c.token_usage = TokenUsage{1, 2, 3};
  const auto back = nlohmann::json(c).get<RawCompletion>();
  EXPECT_EQ(back.request_index, 3u);
  EXPECT_EQ(back.response_text, "[1]");
  EXPECT_EQ(back.token_usage->completion_tokens, 2);
}

TEST(LlmGateway, TimestampFormat) {
  const auto t = utc_timestamp();
  ASSERT_EQ(t.size(), 24u);
  EXPECT_EQ(t[10], 'T');
  EXPECT_EQ(t.back(), 'Z');
}

}  // namespace
}  // namespace sisynth
