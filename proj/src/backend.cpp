// SPDX-License-Identifier: Apache-2.0
#include "fcagent/backend.hpp"

namespace fcagent {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

LLMResponse LLMResponse::failure(std::string reason) {
  LLMResponse r;
  r.finish_reason = FinishReason::error;
  r.error_reason = std::move(reason);
  return r;
}

std::size_t estimate_size(std::string_view text) { return text.size(); }

std::size_t request_size(const LLMRequest& request, const SizeEstimator& estimator) {
  std::size_t total = 0;
  for (const auto& m : request.messages) total += estimator(m.content);
  return total;
}

void validate_request(const LLMRequest& request) {
  if (request.messages.empty()) throw InvalidRequest("request has no messages");
}

}  // namespace fcagent
