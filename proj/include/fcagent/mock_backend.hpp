// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fcagent/backend.hpp"

namespace fcagent {

enum class OverflowPolicy { error, truncate_head };

struct MockRule {
  std::string pattern;  // substring of the latest user message; empty matches anything
  std::string reply;
  std::size_t repeat_limit = 0;  // 0 = unlimited
  bool fail = false;             // reply with finish_reason error instead
};

struct MockPolicy {
  std::size_t context_limit = 32768;
  OverflowPolicy on_overflow = OverflowPolicy::error;
  std::vector<MockRule> rules;  // first hit wins; a catch-all is appended if missing

  static MockPolicy from_json(const nlohmann::json& j);
  static MockPolicy load(const std::filesystem::path& path);
};

// Drops content from the front of the conversation (oldest messages first,
// then the head of the first surviving message) until it fits `limit`.
LLMRequest truncate_head(LLMRequest request, std::size_t limit);

// Deterministic scripted backend with a hard context-window limit.
//
// Either replays `MockPolicy::rules` or delegates to a programmable
// responder; in both cases the overflow policy is applied first, so the
// responder only ever sees what fits in the window.
class MockBackend : public Backend {
 public:
  using Responder = std::function<LLMResponse(const LLMRequest&)>;

  explicit MockBackend(MockPolicy policy);
  MockBackend(std::size_t context_limit, OverflowPolicy on_overflow, Responder responder,
              std::string name = "scripted-mock");

  LLMResponse complete(const LLMRequest& request) override;
  std::string name() const override { return name_; }

  std::size_t calls() const;
  std::size_t overflows() const;
  // SHA-256 over every request and response seen so far, in order.
  std::string transcript_digest() const;

 private:
  LLMResponse reply_from_rules(const LLMRequest& request);

  MockPolicy policy_;
  std::vector<std::size_t> fired_;
  Responder responder_;
  std::string name_ = "scripted-mock";

  mutable std::mutex mu_;
  std::size_t calls_ = 0;
  std::size_t overflows_ = 0;
  std::string transcript_;
};

}  // namespace fcagent
