// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcagent {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct Message {
  Role role = Role::user;
  std::string content;
};

// Session tags separate the main reasoning loop from side conversations.
namespace session {
inline constexpr std::string_view kMain = "main";
inline constexpr std::string_view kReader = "reader";
inline constexpr std::string_view kConsolidation = "consolidation";
}  // namespace session

struct LLMRequest {
  std::vector<Message> messages;
  std::size_t max_response = 2048;
  std::string session_tag = std::string(session::kMain);
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);

struct Usage {
  std::size_t prompt_size = 0;
  std::size_t completion_size = 0;
};

struct LLMResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::stop;
  std::string error_reason;  // set iff finish_reason == error
  Usage usage;

  bool ok() const { return finish_reason != FinishReason::error; }

  static LLMResponse failure(std::string reason);
};

class InvalidRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Size accounting used for every budget in the runtime. Counts bytes, which
// equals characters for ASCII text and over-counts otherwise.
std::size_t estimate_size(std::string_view text);

// Hook for plugging in a token-based estimator.
using SizeEstimator = std::function<std::size_t(std::string_view)>;

// Total size of all message contents.
std::size_t request_size(const LLMRequest& request, const SizeEstimator& estimator = estimate_size);

// Throws InvalidRequest when the request has no messages.
void validate_request(const LLMRequest& request);

// A model endpoint. Calls are blocking; implementations must be safe to call
// from one thread at a time per task.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual LLMResponse complete(const LLMRequest& request) = 0;
  virtual std::string name() const = 0;
};

}  // namespace fcagent
