// SPDX-License-Identifier: Apache-2.0
#include "fcagent/directive.hpp"

#include "fcagent/util.hpp"

namespace fcagent {

const std::string_view kRepairInstruction =
    "REPAIR: Your previous reply could not be parsed. Reply with exactly one fenced ```json block "
    "containing a single directive object and nothing else.";

const std::string_view kDirectiveFormat =
    "Reply with exactly one fenced JSON directive and nothing else.\n"
    "To call a tool or delegate to an agent:\n"
    "```json\n{\"action\": \"tool\", \"tool\": \"<name>\", \"args\": {...}}\n```\n"
    "When the objective is complete:\n"
    "```json\n{\"action\": \"finish\", \"final_answer\": \"<result summary>\"}\n```";

namespace {

std::optional<std::string> extract_json(std::string_view text) {
  const auto fence = text.find("```");
  if (fence != std::string_view::npos) {
    auto start = text.find('\n', fence);
    if (start == std::string_view::npos) return std::nullopt;
    ++start;
    // closing fence sits at the start of a line; backticks inside strings do not
    auto end = text.find("\n```", start > 0 ? start - 1 : 0);
    if (end != std::string_view::npos) {
      ++end;
    } else {
      end = text.find("```", start);
    }
    if (end == std::string_view::npos) return std::nullopt;
    return std::string(text.substr(start, end - start));
  }
  auto body = trim(text);
  if (!body.empty() && body.front() == '{') return body;
  return std::nullopt;
}

}  // namespace

std::optional<Directive> parse_directive(std::string_view text) {
  const auto raw = extract_json(text);
  if (!raw) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*raw);
  } catch (const nlohmann::json::parse_error&) {
    return std::nullopt;
  }
  if (!j.is_object() || !j.contains("action") || !j.at("action").is_string()) return std::nullopt;
  const auto action = j.at("action").get<std::string>();
  Directive d;
  if (action == "finish") {
    if (!j.contains("final_answer") || !j.at("final_answer").is_string()) return std::nullopt;
    d.kind = Directive::Kind::finish;
    d.final_answer = j.at("final_answer").get<std::string>();
    return d;
  }
  if (action == "tool" || action == "delegate") {
    if (!j.contains("tool") || !j.at("tool").is_string() || j.at("tool").get<std::string>().empty()) {
      return std::nullopt;
    }
    d.kind = Directive::Kind::tool;
    d.tool = j.at("tool").get<std::string>();
    if (j.contains("args")) {
      if (!j.at("args").is_object()) return std::nullopt;
      d.args = j.at("args");
    }
    return d;
  }
  return std::nullopt;
}

std::string render_directive(const Directive& d) {
  nlohmann::ordered_json j;
  if (d.kind == Directive::Kind::finish) {
    j["action"] = "finish";
    j["final_answer"] = d.final_answer;
  } else {
    j["action"] = "tool";
    j["tool"] = d.tool;
    j["args"] = d.args;
  }
  return "```json\n" + j.dump() + "\n```";
}

}  // namespace fcagent
