// SPDX-License-Identifier: Apache-2.0
#include "fcagent/http_backend.hpp"

#include <thread>

#include <spdlog/spdlog.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace fcagent {

nlohmann::json to_chat_body(const LLMRequest& request, const HttpBackendConfig& config) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {
      {"model", config.model},
      {"messages", std::move(messages)},
      {"max_tokens", request.max_response},
      {"temperature", config.temperature},
      {"stream", false},
  };
}

LLMResponse parse_chat_response(const nlohmann::json& body) {
  if (body.contains("error")) {
    const auto& err = body.at("error");
    return LLMResponse::failure(err.is_object() ? err.value("message", err.dump()) : err.dump());
  }
  if (!body.contains("choices") || !body.at("choices").is_array() || body.at("choices").empty()) {
    return LLMResponse::failure("response has no choices");
  }
  const auto& choice = body.at("choices").at(0);
  if (!choice.contains("message") || !choice.at("message").contains("content") ||
      !choice.at("message").at("content").is_string()) {
    return LLMResponse::failure("response choice has no message content");
  }
  LLMResponse r;
  r.content = choice.at("message").at("content").get<std::string>();
  const auto finish = choice.value("finish_reason", std::string("stop"));
  r.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;
  if (r.content.empty()) return LLMResponse::failure("empty completion");
  if (body.contains("usage") && body.at("usage").is_object()) {
    r.usage.prompt_size = body.at("usage").value("prompt_tokens", std::size_t{0});
    r.usage.completion_size = body.at("usage").value("completion_tokens", std::size_t{0});
  }
  return r;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw std::invalid_argument("endpoint must include a scheme: " + config_.endpoint);
  }
  const auto slash = config_.endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    base_ = config_.endpoint;
    path_ = "/v1/chat/completions";
  } else {
    base_ = config_.endpoint.substr(0, slash);
    path_ = config_.endpoint.substr(slash);
  }
  if (config_.attempts < 1) throw std::invalid_argument("attempts must be >= 1");
}

LLMResponse HttpBackend::complete(const LLMRequest& request) {
  validate_request(request);
  const std::string payload = to_chat_body(request, config_).dump();

  httplib::Client client(base_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto backoff = config_.initial_backoff;
  std::string last_error;
  last_attempts_ = 0;
  for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
    last_attempts_ = attempt;
    auto res = client.Post(path_, headers, payload, "application/json");
    bool transient = false;
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      transient = true;
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "http " + std::to_string(res->status);
      transient = true;
    } else if (res->status != 200) {
      return LLMResponse::failure("http " + std::to_string(res->status) + ": " + res->body);
    } else {
      try {
        return parse_chat_response(nlohmann::json::parse(res->body));
      } catch (const nlohmann::json::exception& e) {
        return LLMResponse::failure(std::string("malformed response body: ") + e.what());
      }
    }
    if (transient && attempt < config_.attempts) {
      spdlog::warn("chat completion attempt {}/{} failed ({}), retrying in {} ms", attempt,
                   config_.attempts, last_error, backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  return LLMResponse::failure("retries exhausted: " + last_error);
}

}  // namespace fcagent
