// SPDX-License-Identifier: Apache-2.0
#include "fcagent/logs.hpp"

#include <nlohmann/json.hpp>

#include "fcagent/util.hpp"

namespace fcagent {

void ActionLog::append(const ActionLogEntry& e) const {
  nlohmann::ordered_json j;
  j["step"] = e.record.step;
  j["agent_id"] = e.record.agent_id;
  j["tool_name"] = e.record.tool_name;
  j["args_summary"] = e.record.args_summary;
  j["result_summary"] = e.record.result_summary;
  j["status"] = to_string(e.record.status);
  j["timestamp"] = e.timestamp;
  j["kind"] = e.kind == ActionLogEntry::Kind::action ? "action" : "consolidation";
  j["invocation"] = e.invocation;
  j["parent_invocation"] = e.parent_invocation;
  append_line(path_, j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), sync_);
}

std::vector<ActionLogEntry> ActionLog::read(const std::filesystem::path& path) {
  std::vector<ActionLogEntry> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    ActionLogEntry e;
    e.record.step = j.value("step", std::uint64_t{0});
    e.record.agent_id = j.value("agent_id", "");
    e.record.tool_name = j.value("tool_name", "");
    e.record.args_summary = j.value("args_summary", "");
    e.record.result_summary = j.value("result_summary", "");
    e.record.status = j.value("status", "ok") == "ok" ? ActionStatus::ok : ActionStatus::error;
    e.timestamp = j.value("timestamp", std::int64_t{0});
    e.kind = j.value("kind", "action") == "consolidation" ? ActionLogEntry::Kind::consolidation
                                                          : ActionLogEntry::Kind::action;
    e.invocation = j.value("invocation", std::uint64_t{0});
    e.parent_invocation = j.value("parent_invocation", std::uint64_t{0});
    out.push_back(std::move(e));
  }
  return out;
}

void ContextLog::append(std::uint64_t step, const std::string& agent_id, std::uint64_t invocation,
                        std::string_view session, int attempt, const std::string& text) const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["agent_id"] = agent_id;
  j["invocation"] = invocation;
  j["session"] = session;
  j["attempt"] = attempt;
  j["size"] = estimate_size(text);
  j["digest"] = sha256_hex(text);
  if (verbose_) j["text"] = text;
  append_line(path_, j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), false);
}

std::vector<ContextLogEntry> ContextLog::read(const std::filesystem::path& path) {
  std::vector<ContextLogEntry> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    ContextLogEntry e;
    e.step = j.value("step", std::uint64_t{0});
    e.agent_id = j.value("agent_id", "");
    e.invocation = j.value("invocation", std::uint64_t{0});
    e.session = j.value("session", "");
    e.attempt = j.value("attempt", 0);
    e.size = j.value("size", std::size_t{0});
    e.digest = j.value("digest", "");
    if (j.contains("text")) e.text = j.at("text").get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fcagent
