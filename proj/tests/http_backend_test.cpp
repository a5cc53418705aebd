// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "fcagent/http_backend.hpp"

using namespace fcagent;

namespace {

// Local chat-completions stand-in. `fail_first` requests get a 503.
class FixtureServer {
 public:
  explicit FixtureServer(int fail_first, int status = 503) : fail_first_(fail_first), status_(status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      if (hits_++ < fail_first_) {
        res.status = status_;
        res.set_content(R"({"error": {"message": "busy"}})", "application/json");
        return;
      }
      res.set_content(R"({"id": "x", "choices": [{"index": 0, "finish_reason": "stop",
        "message": {"role": "assistant", "content": "canned answer"}}],
        "usage": {"prompt_tokens": 11, "completion_tokens": 2}})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int hits() const { return hits_; }
  const std::string& last_body() const { return last_body_; }
  const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int fail_first_;
  int status_;
  std::atomic<int> hits_{0};
  std::string last_body_;
  std::string last_auth_;
};

LLMRequest request() {
  LLMRequest r;
  r.messages = {{Role::system, "be brief"}, {Role::user, "hello"}};
  r.max_response = 77;
  return r;
}

HttpBackendConfig config_for(const FixtureServer& s) {
  HttpBackendConfig c;
  c.endpoint = s.endpoint();
  c.model = "test-model";
  c.api_key = "secret";
  c.timeout_seconds = 5;
  c.initial_backoff = std::chrono::milliseconds(5);
  return c;
}

}  // namespace

TEST(HttpBackend, ParsesCannedBody) {
  FixtureServer server(0);
  HttpBackend backend(config_for(server));
  const auto r = backend.complete(request());
  ASSERT_TRUE(r.ok()) << r.error_reason;
  EXPECT_EQ(r.content, "canned answer");
  EXPECT_EQ(r.usage.prompt_size, 11u);
  EXPECT_EQ(backend.last_attempts(), 1);

  const auto sent = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(sent.at("model"), "test-model");
  EXPECT_EQ(sent.at("max_tokens"), 77);
  EXPECT_EQ(sent.at("temperature"), 0.0);
  ASSERT_EQ(sent.at("messages").size(), 2u);
  EXPECT_EQ(sent.at("messages")[0].at("role"), "system");
  EXPECT_EQ(sent.at("messages")[1].at("content"), "hello");
  EXPECT_EQ(server.last_auth(), "Bearer secret");
}

TEST(HttpBackend, RetriesTransientFailures) {
  FixtureServer server(2);
  HttpBackend backend(config_for(server));
  const auto r = backend.complete(request());
  ASSERT_TRUE(r.ok()) << r.error_reason;
  EXPECT_EQ(backend.last_attempts(), 3);
  EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, ExhaustedRetriesBecomeAnError) {
  FixtureServer server(10);
  HttpBackend backend(config_for(server));
  const auto r = backend.complete(request());
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.finish_reason, FinishReason::error);
  EXPECT_NE(r.error_reason.find("retries exhausted"), std::string::npos);
  EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
  FixtureServer server(10, 400);
  HttpBackend backend(config_for(server));
  EXPECT_FALSE(backend.complete(request()).ok());
  EXPECT_EQ(server.hits(), 1);
}

TEST(HttpBackend, UnreachableEndpointFails) {
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.attempts = 2;
  c.timeout_seconds = 1;
  c.initial_backoff = std::chrono::milliseconds(1);
  HttpBackend backend(c);
  const auto r = backend.complete(request());
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(backend.last_attempts(), 2);
}

TEST(ChatBody, MalformedResponsesAreErrors) {
  EXPECT_FALSE(parse_chat_response(nlohmann::json::object()).ok());
  EXPECT_FALSE(parse_chat_response({{"choices", nlohmann::json::array()}}).ok());
  EXPECT_FALSE(parse_chat_response({{"error", {{"message", "nope"}}}}).ok());
  const auto truncated = parse_chat_response(
      {{"choices", {{{"finish_reason", "length"}, {"message", {{"content", "partial"}}}}}}});
  ASSERT_TRUE(truncated.ok());
  EXPECT_EQ(truncated.finish_reason, FinishReason::length);
}

TEST(HttpBackend, RejectsEndpointWithoutScheme) {
  HttpBackendConfig c;
  c.endpoint = "localhost:8000";
  EXPECT_THROW(HttpBackend{c}, std::invalid_argument);
}
