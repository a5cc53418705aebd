// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcagent {

enum class AgentLevel { atomic = 1, domain = 2, alpha = 3 };

std::string_view to_string(AgentLevel level);
AgentLevel parse_agent_level(std::string_view text);

// Default step limit for a level (alpha 200, domain 100, atomic 20).
int default_step_limit(AgentLevel level);

struct AgentSpec {
  std::string agent_id;
  AgentLevel level = AgentLevel::atomic;
  std::string role_preamble;
  std::set<std::string> allowed_tools;  // tool names and lower-level agent ids
  int step_limit = 20;
  std::size_t context_budget = 8192;
};

class HierarchyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationIssue {
  std::string agent_id;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
  std::string to_string() const;
};

// Reports duplicate ids, level-direction violations, unknown tool
// references, bad limits and a missing or repeated alpha agent.
ValidationReport validate_hierarchy(const std::vector<AgentSpec>& specs, const std::set<std::string>& known_tools);

class Hierarchy {
 public:
  Hierarchy() = default;
  explicit Hierarchy(std::vector<AgentSpec> agents) : agents_(std::move(agents)) {}

  // INI file, one section per agent:
  //   [orchestrator]
  //   level = alpha
  //   preamble = ...
  //   tools = coder, write_file
  //   step_limit = 200
  //   context_budget = 8192
  static Hierarchy load(const std::filesystem::path& path);

  const std::vector<AgentSpec>& agents() const { return agents_; }
  const AgentSpec* find(std::string_view agent_id) const;
  // The unique alpha agent; throws HierarchyError otherwise.
  const AgentSpec& alpha() const;
  bool is_agent(std::string_view name) const { return find(name) != nullptr; }

 private:
  std::vector<AgentSpec> agents_;
};

}  // namespace fcagent
