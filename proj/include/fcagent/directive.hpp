// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace fcagent {

// One decision parsed from model output: call a tool (or a child agent), or
// finish with an answer.
struct Directive {
  enum class Kind { tool, finish };

  Kind kind = Kind::finish;
  std::string tool;
  nlohmann::json args = nlohmann::json::object();
  std::string final_answer;
};

// Accepts a fenced ```json block (or a bare JSON object) of the form
// {"action":"tool","tool":..,"args":{..}} or {"action":"finish","final_answer":..}.
std::optional<Directive> parse_directive(std::string_view text);

std::string render_directive(const Directive& d);

// Appended to the objective for the single retry after an unparseable reply.
extern const std::string_view kRepairInstruction;

// Wire-format description included in every agent preamble.
extern const std::string_view kDirectiveFormat;

}  // namespace fcagent
