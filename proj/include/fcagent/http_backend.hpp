// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "fcagent/backend.hpp"

namespace fcagent {

struct HttpBackendConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string api_key;
  std::string model = "gpt-oss-20b";
  double timeout_seconds = 60.0;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double temperature = 0.0;
};

// OpenAI-compatible chat-completions request body.
nlohmann::json to_chat_body(const LLMRequest& request, const HttpBackendConfig& config);

// Maps a chat-completions response body; malformed bodies become errors.
LLMResponse parse_chat_response(const nlohmann::json& body);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  LLMResponse complete(const LLMRequest& request) override;
  std::string name() const override { return config_.model; }

  int last_attempts() const { return last_attempts_; }

 private:
  HttpBackendConfig config_;
  std::string base_;
  std::string path_;
  int last_attempts_ = 0;
};

}  // namespace fcagent
