// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fcagent/backend.hpp"
#include "fcagent/context.hpp"
#include "fcagent/directive.hpp"
#include "fcagent/hierarchy.hpp"
#include "fcagent/logs.hpp"
#include "fcagent/tools.hpp"
#include "fcagent/workspace.hpp"

namespace fcagent {

class Corpus;

enum class ExecutionMode { file_centric, compressed_context };

std::string_view to_string(ExecutionMode mode);
ExecutionMode parse_execution_mode(std::string_view text);

struct EngineOptions {
  std::size_t window_capacity = ActionWindow::kDefaultCapacity;
  ConsolidationPolicy consolidation;
  ExecutionMode mode = ExecutionMode::file_centric;
  bool verbose_contexts = false;
  // Backend or parse failures in a row before the agent gives up.
  int max_consecutive_errors = 5;
  // Throws Interrupted right before this workspace step would start.
  std::optional<std::uint64_t> interrupt_at_step;
  ToolOptions tool_options;
};

enum class OutcomeStatus { done, failed, step_limit_reached };

std::string_view to_string(OutcomeStatus status);

struct AgentOutcome {
  OutcomeStatus status = OutcomeStatus::failed;
  std::string result_summary;
  std::uint64_t steps_used = 0;
};

enum class TaskStatus { pending, running, done, failed };

struct TaskNode {
  std::string node_id;
  std::optional<std::string> parent_id;
  std::string objective;
  std::string assigned_agent;
  TaskStatus status = TaskStatus::pending;
  std::string result_summary;
};

// Simulated crash used by recovery tests.
class Interrupted : public std::runtime_error {
 public:
  explicit Interrupted(std::uint64_t step)
      : std::runtime_error("interrupted before step " + std::to_string(step)), step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

// Serial decision loop over a shared workspace.
//
// Each step: build the context (bounded snapshot + window, or the full
// history in compressed_context mode), call the backend, parse one directive,
// execute it, record it, and consolidate when due. Child agents run to
// completion inside the parent's step with their own window and budget; only
// their result summary comes back.
class Engine {
 public:
  Engine(const Hierarchy& hierarchy, const ToolRegistry& tools, Workspace& ws, Backend& backend,
         EngineOptions options = {}, const Corpus* corpus = nullptr);

  // Runs the alpha agent on `objective`.
  AgentOutcome run(std::string_view objective);
  // Continues the alpha agent after a restart; its window is rebuilt from
  // the tail of actions.jsonl.
  AgentOutcome resume(std::string_view objective);

  AgentOutcome run_agent(const AgentSpec& spec, std::string_view objective);
  // Throws HierarchyError if `child_id` is not a lower-level agent the
  // parent may call.
  AgentOutcome delegate(const AgentSpec& parent, std::string_view child_id, std::string_view objective);

  std::string preamble_for(const AgentSpec& spec) const;

  const std::vector<TaskNode>& task_nodes() const { return nodes_; }
  std::size_t max_running_observed() const { return max_running_; }

 private:
  struct Invocation;

  AgentOutcome loop(Invocation& inv);
  AgentOutcome start(const AgentSpec& spec, std::string_view objective, std::uint64_t parent_invocation);
  void set_status(std::size_t node, TaskStatus status);
  LLMResponse call(Invocation& inv, const std::string& objective, int attempt, std::uint64_t step);
  ToolResult execute(Invocation& inv, const Directive& d);

  const Hierarchy& hierarchy_;
  const ToolRegistry& tools_;
  Workspace& ws_;
  Backend& backend_;
  EngineOptions options_;
  const Corpus* corpus_;
  ActionLog action_log_;
  ContextLog context_log_;

  std::vector<TaskNode> nodes_;
  std::vector<std::size_t> node_stack_;
  std::vector<std::uint64_t> invocation_stack_;
  std::uint64_t next_invocation_ = 1;
  std::size_t max_running_ = 0;
};

}  // namespace fcagent
