// SPDX-License-Identifier: Apache-2.0
#include "fcagent/engine.hpp"

#include <algorithm>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "fcagent/util.hpp"

namespace fcagent {

std::string_view to_string(ExecutionMode mode) {
  return mode == ExecutionMode::file_centric ? "file_centric" : "compressed_context";
}

ExecutionMode parse_execution_mode(std::string_view text) {
  if (text == "file_centric") return ExecutionMode::file_centric;
  if (text == "compressed_context") return ExecutionMode::compressed_context;
  throw std::invalid_argument("unknown execution mode '" + std::string(text) + "'");
}

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::done: return "done";
    case OutcomeStatus::failed: return "failed";
    case OutcomeStatus::step_limit_reached: return "step_limit_reached";
  }
  return "failed";
}

struct Engine::Invocation {
  const AgentSpec* spec = nullptr;
  std::uint64_t id = 0;
  std::uint64_t parent = 0;
  std::size_t node = 0;
  std::string objective;
  std::string preamble;
  ActionWindow window;
  // compressed_context only: the whole interaction so far, after the preamble
  std::vector<Message> history;
  std::uint64_t steps_used = 0;
  int consecutive_errors = 0;

  explicit Invocation(std::size_t k) : window(k) {}
};

Engine::Engine(const Hierarchy& hierarchy, const ToolRegistry& tools, Workspace& ws, Backend& backend,
               EngineOptions options, const Corpus* corpus)
    : hierarchy_(hierarchy),
      tools_(tools),
      ws_(ws),
      backend_(backend),
      options_(std::move(options)),
      corpus_(corpus),
      action_log_(ws.actions_log()),
      context_log_(ws.contexts_log(), options_.verbose_contexts) {
  if (options_.window_capacity < 1) throw std::invalid_argument("window capacity must be >= 1");
}

std::string Engine::preamble_for(const AgentSpec& spec) const {
  std::string out = spec.role_preamble;
  if (!out.empty()) out += "\n\n";
  out += fmt::format("You are agent '{}' ({} level). Work only through the tools below.\n\n", spec.agent_id,
                     to_string(spec.level));
  out += std::string(kDirectiveFormat);
  std::set<std::string> plain;
  std::string agents;
  for (const auto& name : spec.allowed_tools) {
    if (const auto* child = hierarchy_.find(name)) {
      agents += fmt::format("- {}(objective: string) [agent, {}]: delegate a subtask; only its summary returns\n",
                            child->agent_id, to_string(child->level));
    } else if (tools_.contains(name)) {
      plain.insert(name);
    }
  }
  out += "\n\nTOOLS:\n";
  if (!plain.empty()) out += tools_.render_listing(plain);
  out += agents;
  return out;
}

void Engine::set_status(std::size_t node, TaskStatus status) {
  nodes_[node].status = status;
  const auto running = static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TaskNode& n) { return n.status == TaskStatus::running; }));
  max_running_ = std::max(max_running_, running);
}

AgentOutcome Engine::run(std::string_view objective) { return run_agent(hierarchy_.alpha(), objective); }

AgentOutcome Engine::run_agent(const AgentSpec& spec, std::string_view objective) {
  return start(spec, objective, 0);
}

AgentOutcome Engine::start(const AgentSpec& spec, std::string_view objective, std::uint64_t parent_invocation) {
  if (spec.step_limit < 1) throw HierarchyError("agent '" + spec.agent_id + "' has step_limit < 1");
  Invocation inv(options_.window_capacity);
  inv.spec = &spec;
  inv.id = next_invocation_++;
  inv.parent = parent_invocation;
  inv.objective = std::string(objective);
  inv.preamble = preamble_for(spec);

  TaskNode node;
  node.node_id = fmt::format("task-{}", inv.id);
  if (!node_stack_.empty()) node.parent_id = nodes_[node_stack_.back()].node_id;
  node.objective = inv.objective;
  node.assigned_agent = spec.agent_id;
  nodes_.push_back(std::move(node));
  inv.node = nodes_.size() - 1;
  return loop(inv);
}

AgentOutcome Engine::resume(std::string_view objective) {
  const AgentSpec& alpha = hierarchy_.alpha();
  const auto entries = ActionLog::read(ws_.actions_log());

  Invocation inv(options_.window_capacity);
  inv.spec = &alpha;
  inv.objective = std::string(objective);
  inv.preamble = preamble_for(alpha);

  std::vector<const ActionLogEntry*> own;
  std::uint64_t max_id = 0;
  for (const auto& e : entries) {
    max_id = std::max(max_id, e.invocation);
    // records past the committed step can only come from a log written ahead
    // of its transition; they never happened
    if (e.record.step > ws_.step_counter()) continue;
    if (e.parent_invocation != 0 || e.kind != ActionLogEntry::Kind::action) continue;
    if (inv.id == 0) inv.id = e.invocation;
    if (e.invocation == inv.id) own.push_back(&e);
  }
  next_invocation_ = max_id + 1;
  if (inv.id == 0) inv.id = next_invocation_++;

  inv.steps_used = own.size();
  if (!own.empty() && own.back()->record.tool_name == "finish" && own.back()->record.status == ActionStatus::ok) {
    return {OutcomeStatus::done, own.back()->record.result_summary, inv.steps_used};
  }
  const std::size_t first = own.size() > inv.window.capacity() ? own.size() - inv.window.capacity() : 0;
  for (std::size_t i = first; i < own.size(); ++i) inv.window.record(own[i]->record);

  if (options_.mode == ExecutionMode::compressed_context) {
    // the raw replies are not logged; rebuild an approximate history from the
    // recorded summaries
    inv.history.push_back({Role::user, std::string(kObjectiveHeader) + inv.objective});
    for (const auto* e : own) {
      inv.history.push_back({Role::assistant, fmt::format("{} {}", e->record.tool_name, e->record.args_summary)});
      inv.history.push_back({Role::user, fmt::format("TOOL RESULT {} ({}):\n{}", e->record.tool_name,
                                                     to_string(e->record.status), e->record.result_summary)});
    }
  }

  TaskNode node;
  node.node_id = fmt::format("task-{}", inv.id);
  node.objective = inv.objective;
  node.assigned_agent = alpha.agent_id;
  nodes_.push_back(std::move(node));
  inv.node = nodes_.size() - 1;
  return loop(inv);
}

AgentOutcome Engine::delegate(const AgentSpec& parent, std::string_view child_id, std::string_view objective) {
  const AgentSpec* child = hierarchy_.find(child_id);
  if (!child) throw HierarchyError("unknown agent '" + std::string(child_id) + "'");
  if (!parent.allowed_tools.count(std::string(child_id))) {
    throw HierarchyError(fmt::format("agent '{}' may not call '{}'", parent.agent_id, child_id));
  }
  if (static_cast<int>(child->level) >= static_cast<int>(parent.level)) {
    throw HierarchyError(fmt::format("agent '{}' cannot delegate to same or higher level agent '{}'",
                                     parent.agent_id, child_id));
  }
  return start(*child, objective, invocation_stack_.empty() ? 0 : invocation_stack_.back());
}

LLMResponse Engine::call(Invocation& inv, const std::string& objective, int attempt, std::uint64_t step) {
  LLMRequest request;
  request.session_tag = std::string(session::kMain);
  std::string logged;
  if (options_.mode == ExecutionMode::file_centric) {
    const auto ctx = build_context(ws_, inv.window, objective, inv.preamble, inv.spec->context_budget);
    request = ctx.to_request(session::kMain);
    logged = ctx.render();
  } else {
    request.messages.push_back({Role::system, inv.preamble});
    if (inv.history.empty()) inv.history.push_back({Role::user, std::string(kObjectiveHeader) + inv.objective});
    request.messages.insert(request.messages.end(), inv.history.begin(), inv.history.end());
    if (attempt > 1) request.messages.push_back({Role::user, std::string(kRepairInstruction)});
    for (const auto& m : request.messages) {
      if (!logged.empty()) logged += "\n\n";
      logged += m.content;
    }
  }
  context_log_.append(step, inv.spec->agent_id, inv.id, session::kMain, attempt, logged);
  try {
    return backend_.complete(request);
  } catch (const std::exception& e) {
    return LLMResponse::failure(e.what());
  }
}

ToolResult Engine::execute(Invocation& inv, const Directive& d) {
  const AgentSpec& spec = *inv.spec;
  if (hierarchy_.is_agent(d.tool)) {
    if (!spec.allowed_tools.count(d.tool)) return ToolResult::error("not permitted: agent '" + d.tool + "'");
    if (!d.args.contains("objective") || !d.args.at("objective").is_string()) {
      return ToolResult::error("invalid arguments: delegation needs a string 'objective'");
    }
    AgentOutcome child;
    try {
      set_status(inv.node, TaskStatus::pending);
      child = delegate(spec, d.tool, d.args.at("objective").get<std::string>());
      set_status(inv.node, TaskStatus::running);
    } catch (const HierarchyError& e) {
      set_status(inv.node, TaskStatus::running);
      return ToolResult::error(std::string("rejected: ") + e.what());
    }
    auto text = fmt::format("[child {}] {}", to_string(child.status), child.result_summary);
    return child.status == OutcomeStatus::done ? ToolResult::ok(std::move(text)) : ToolResult::error(std::move(text));
  }
  if (!spec.allowed_tools.count(d.tool)) return ToolResult::error("not permitted: tool '" + d.tool + "'");
  ToolContext ctx{ws_, backend_, corpus_, options_.tool_options};
  return tools_.invoke(d.tool, d.args, ctx);
}

AgentOutcome Engine::loop(Invocation& inv) {
  const AgentSpec& spec = *inv.spec;
  const bool file_centric = options_.mode == ExecutionMode::file_centric;
  node_stack_.push_back(inv.node);
  invocation_stack_.push_back(inv.id);
  set_status(inv.node, TaskStatus::running);

  AgentOutcome outcome;
  outcome.status = OutcomeStatus::step_limit_reached;
  outcome.result_summary = "step_limit_reached";

  while (inv.steps_used < static_cast<std::uint64_t>(spec.step_limit)) {
    const std::uint64_t step = ws_.pending_step();
    if (options_.interrupt_at_step && *options_.interrupt_at_step == step) throw Interrupted(step);

    std::string tool_name;
    std::string args_summary;
    ToolResult result;
    std::string raw;
    bool finished = false;

    LLMResponse resp = call(inv, inv.objective, 1, step);
    std::optional<Directive> d;
    if (resp.ok()) {
      raw = resp.content;
      d = parse_directive(resp.content);
      if (!d) {
        const auto repaired = inv.objective + "\n\n" + std::string(kRepairInstruction);
        resp = call(inv, repaired, 2, step);
        if (resp.ok()) {
          raw = resp.content;
          d = parse_directive(resp.content);
        }
      }
    }

    if (!resp.ok()) {
      tool_name = "backend";
      result = ToolResult::error("backend error: " + resp.error_reason);
      ++inv.consecutive_errors;
    } else if (!d) {
      tool_name = "invalid_directive";
      args_summary = raw;
      result = ToolResult::error("unparseable directive after repair retry");
      ++inv.consecutive_errors;
    } else if (d->kind == Directive::Kind::finish) {
      tool_name = "finish";
      result = ToolResult::ok(d->final_answer);
      finished = true;
      inv.consecutive_errors = 0;
    } else {
      tool_name = d->tool;
      args_summary = d->args.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      result = execute(inv, *d);
      inv.consecutive_errors = 0;
    }

    // children may have committed steps while this one was executing
    const std::uint64_t commit = ws_.pending_step();
    auto record = ActionRecord::make(commit, spec.agent_id, tool_name, args_summary, result.text, result.status);
    inv.window.record(record);
    ++inv.steps_used;
    if (!file_centric) {
      inv.history.push_back({Role::assistant, raw});
      inv.history.push_back(
          {Role::user, fmt::format("TOOL RESULT {} ({}):\n{}", tool_name, to_string(result.status), result.text)});
    }

    std::optional<ActionLogEntry> consolidation;
    if (file_centric && consolidation_due(commit, options_.consolidation)) {
      auto c = consolidate(ws_, inv.window, options_.consolidation, backend_, inv.objective, inv.preamble,
                           spec.context_budget);
      context_log_.append(commit, spec.agent_id, inv.id, session::kConsolidation, 1, c.context.render());
      ActionLogEntry entry;
      entry.record = ActionRecord::make(commit, spec.agent_id, "consolidate", c.plan_updated ? "plan,progress" : "progress",
                                        c.applied ? c.note : c.warning,
                                        c.applied ? ActionStatus::ok : ActionStatus::error);
      entry.kind = ActionLogEntry::Kind::consolidation;
      entry.invocation = inv.id;
      entry.parent_invocation = inv.parent;
      consolidation = std::move(entry);
    }

    ws_.end_step();
    ActionLogEntry entry;
    entry.record = record;
    entry.invocation = inv.id;
    entry.parent_invocation = inv.parent;
    entry.timestamp = monotonic_timestamp_us();
    action_log_.append(entry);
    if (consolidation) {
      consolidation->timestamp = monotonic_timestamp_us();
      action_log_.append(*consolidation);
    }

    if (finished) {
      outcome = {OutcomeStatus::done, truncate_text(result.text, ActionRecord::kSummaryCap), inv.steps_used};
      break;
    }
    if (inv.consecutive_errors >= options_.max_consecutive_errors) {
      outcome = {OutcomeStatus::failed,
                 fmt::format("{} consecutive errors; last: {}", inv.consecutive_errors, result.text),
                 inv.steps_used};
      break;
    }
  }
  outcome.steps_used = inv.steps_used;
  if (outcome.status == OutcomeStatus::step_limit_reached) {
    spdlog::info("agent '{}' reached its step limit ({})", spec.agent_id, spec.step_limit);
  }

  nodes_[inv.node].result_summary = outcome.result_summary;
  set_status(inv.node, outcome.status == OutcomeStatus::done ? TaskStatus::done : TaskStatus::failed);
  node_stack_.pop_back();
  invocation_stack_.pop_back();
  return outcome;
}

}  // namespace fcagent
