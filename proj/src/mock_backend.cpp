// SPDX-License-Identifier: Apache-2.0
#include "fcagent/mock_backend.hpp"

#include <nlohmann/json.hpp>

#include "fcagent/util.hpp"

namespace fcagent {

namespace {

OverflowPolicy parse_overflow(const std::string& s) {
  if (s == "error") return OverflowPolicy::error;
  if (s == "truncate_head") return OverflowPolicy::truncate_head;
  throw std::invalid_argument("on_overflow must be 'error' or 'truncate_head', got '" + s + "'");
}

const std::string kDefaultReply =
    "```json\n{\"action\":\"finish\",\"final_answer\":\"no scripted rule matched\"}\n```";

}  // namespace

MockPolicy MockPolicy::from_json(const nlohmann::json& j) {
  MockPolicy p;
  const nlohmann::json* rules = &j;
  if (j.is_object()) {
    p.context_limit = j.value("context_limit", p.context_limit);
    if (j.contains("on_overflow")) p.on_overflow = parse_overflow(j.at("on_overflow").get<std::string>());
    if (!j.contains("rules")) throw std::invalid_argument("mock policy needs a 'rules' list");
    rules = &j.at("rules");
  }
  if (!rules->is_array()) throw std::invalid_argument("mock policy rules must be a list");
  for (const auto& r : *rules) {
    MockRule rule;
    rule.pattern = r.value("pattern", std::string{});
    rule.reply = r.value("reply", std::string{});
    rule.repeat_limit = r.value("repeat_limit", std::size_t{0});
    rule.fail = r.value("error", false);
    p.rules.push_back(std::move(rule));
  }
  if (p.context_limit == 0) throw std::invalid_argument("context_limit must be positive");
  return p;
}

MockPolicy MockPolicy::load(const std::filesystem::path& path) {
  return from_json(nlohmann::json::parse(read_file(path)));
}

LLMRequest truncate_head(LLMRequest request, std::size_t limit) {
  std::size_t total = request_size(request);
  auto& msgs = request.messages;
  while (total > limit && msgs.size() > 1) {
    total -= msgs.front().content.size();
    msgs.erase(msgs.begin());
  }
  if (total > limit && !msgs.empty()) {
    auto& first = msgs.front().content;
    first.erase(0, total - limit);
  }
  return request;
}

MockBackend::MockBackend(MockPolicy policy) : policy_(std::move(policy)) {
  const bool has_catch_all = !policy_.rules.empty() && policy_.rules.back().pattern.empty() &&
                             policy_.rules.back().repeat_limit == 0;
  if (!has_catch_all) policy_.rules.push_back(MockRule{"", kDefaultReply, 0, false});
  fired_.assign(policy_.rules.size(), 0);
}

MockBackend::MockBackend(std::size_t context_limit, OverflowPolicy on_overflow, Responder responder,
                         std::string name)
    : responder_(std::move(responder)), name_(std::move(name)) {
  policy_.context_limit = context_limit;
  policy_.on_overflow = on_overflow;
}

LLMResponse MockBackend::complete(const LLMRequest& request) {
  validate_request(request);
  std::lock_guard lock(mu_);
  ++calls_;

  const std::size_t size = request_size(request);
  LLMResponse response;
  if (size > policy_.context_limit) {
    ++overflows_;
    if (policy_.on_overflow == OverflowPolicy::error) {
      response = LLMResponse::failure("context_overflow");
    } else {
      LLMRequest cut = truncate_head(request, policy_.context_limit);
      response = responder_ ? responder_(cut) : reply_from_rules(cut);
    }
  } else {
    response = responder_ ? responder_(request) : reply_from_rules(request);
  }
  response.usage.prompt_size = std::min(size, policy_.context_limit);
  response.usage.completion_size = response.content.size();

  for (const auto& m : request.messages) {
    transcript_ += to_string(m.role);
    transcript_ += '\x1f';
    transcript_ += m.content;
    transcript_ += '\x1e';
  }
  transcript_ += "=>";
  transcript_ += response.ok() ? response.content : "ERROR:" + response.error_reason;
  transcript_ += '\x1d';
  return response;
}

LLMResponse MockBackend::reply_from_rules(const LLMRequest& request) {
  std::string_view latest;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == Role::user) {
      latest = it->content;
      break;
    }
  }
  for (std::size_t i = 0; i < policy_.rules.size(); ++i) {
    auto& rule = policy_.rules[i];
    if (rule.repeat_limit != 0 && fired_[i] >= rule.repeat_limit) continue;
    if (!rule.pattern.empty() && latest.find(rule.pattern) == std::string_view::npos) continue;
    ++fired_[i];
    if (rule.fail) return LLMResponse::failure(rule.reply.empty() ? "scripted_error" : rule.reply);
    LLMResponse r;
    r.content = rule.reply;
    return r;
  }
  // Unreachable while the catch-all rule exists, but exhausted repeat limits
  // on a user-supplied catch-all land here.
  LLMResponse r;
  r.content = kDefaultReply;
  return r;
}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t MockBackend::overflows() const {
  std::lock_guard lock(mu_);
  return overflows_;
}

std::string MockBackend::transcript_digest() const {
  std::lock_guard lock(mu_);
  return sha256_hex(transcript_);
}

}  // namespace fcagent
