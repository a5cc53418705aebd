// SPDX-License-Identifier: Apache-2.0
#include "fcagent/context.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "fcagent/util.hpp"

namespace fcagent {

std::string_view to_string(ActionStatus status) { return status == ActionStatus::ok ? "ok" : "error"; }

ActionRecord ActionRecord::make(std::uint64_t step, std::string agent_id, std::string tool_name,
                                std::string_view args, std::string_view result, ActionStatus status) {
  return ActionRecord{step,
                      std::move(agent_id),
                      std::move(tool_name),
                      truncate_text(args, kSummaryCap),
                      truncate_text(result, kSummaryCap),
                      status};
}

ActionWindow::ActionWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("action window capacity must be >= 1");
}

void ActionWindow::record(ActionRecord rec) {
  if (any_ && rec.step <= last_step_) {
    throw std::invalid_argument(
        fmt::format("action step {} does not follow last recorded step {}", rec.step, last_step_));
  }
  rec.args_summary = truncate_text(rec.args_summary, ActionRecord::kSummaryCap);
  rec.result_summary = truncate_text(rec.result_summary, ActionRecord::kSummaryCap);
  last_step_ = rec.step;
  any_ = true;
  records_.push_back(std::move(rec));
  while (records_.size() > capacity_) records_.pop_front();
}

// ---------------------------------------------------------------------------

namespace {

std::string indent_continuations(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    out.push_back(c);
    if (c == '\n') out += "    ";
  }
  return out;
}

std::string render_actions(const std::deque<ActionRecord>& records, std::size_t first) {
  if (first >= records.size()) return "(none)\n";
  std::string out;
  for (std::size_t i = first; i < records.size(); ++i) out += render_action(records[i]);
  return out;
}

}  // namespace

std::string render_action(const ActionRecord& r) {
  return fmt::format("- step {} | {} | {}\n  args: {}\n  result: {}\n", r.step, r.tool_name, to_string(r.status),
                     indent_continuations(r.args_summary), indent_continuations(r.result_summary));
}

std::string BoundedContext::user_text() const {
  std::string out;
  out.reserve(state_section.size() + actions_section.size() + objective_section.size() + 64);
  out += kStateHeader;
  out += state_section;
  out += "\n";
  out += kActionsHeader;
  out += actions_section;
  out += "\n";
  out += kObjectiveHeader;
  out += objective_section;
  out += "\n";
  return out;
}

std::string BoundedContext::render() const { return system_preamble + "\n\n" + user_text(); }

LLMRequest BoundedContext::to_request(std::string_view session_tag) const {
  LLMRequest req;
  req.session_tag = std::string(session_tag);
  req.messages.push_back({Role::system, system_preamble});
  req.messages.push_back({Role::user, user_text()});
  return req;
}

BoundedContext build_context(const StateSnapshot& snapshot, const ActionWindow& window, std::string_view objective,
                             std::string_view preamble, std::size_t budget, const Resnapshot& resnapshot,
                             const SizeEstimator& estimator) {
  if (budget < kMinContextBudget) {
    throw ContextConfigError(fmt::format("context budget {} below minimum {}", budget, kMinContextBudget));
  }
  if (snapshot.budget > budget / 2) {
    throw ContextConfigError(
        fmt::format("snapshot budget {} exceeds half the context budget {}", snapshot.budget, budget));
  }

  BoundedContext ctx;
  ctx.system_preamble = std::string(preamble);
  ctx.objective_section = std::string(objective);
  ctx.budget = budget;

  BoundedContext bare = ctx;
  bare.actions_section = "(none)\n";
  if (estimator(bare.render()) > budget) {
    throw ContextConfigError(
        fmt::format("objective and preamble alone ({} characters) exceed the context budget {}",
                    estimator(bare.render()), budget));
  }

  const auto& records = window.records();
  std::size_t first = 0;
  StateSnapshot snap = snapshot;
  auto assemble = [&] {
    ctx.state_section = snap.rendered;
    ctx.actions_section = render_actions(records, first);
    ctx.total_size = estimator(ctx.render());
  };
  assemble();
  while (ctx.total_size > budget && first < records.size()) {
    ++first;
    assemble();
  }
  while (ctx.total_size > budget && resnapshot && snap.budget / 2 >= Workspace::kMinSnapshotBudget) {
    snap = resnapshot(snap.budget / 2);
    assemble();
  }
  if (ctx.total_size > budget) {
    // Preamble and objective fit, so cutting the state section always suffices.
    const std::size_t excess = ctx.total_size - budget;
    ctx.state_section.resize(ctx.state_section.size() > excess ? ctx.state_section.size() - excess : 0);
    ctx.total_size = estimator(ctx.render());
    while (ctx.total_size > budget && !ctx.state_section.empty()) {
      ctx.state_section.pop_back();
      ctx.total_size = estimator(ctx.render());
    }
  }
  for (std::size_t i = first; i < records.size(); ++i) ctx.action_steps.push_back(records[i].step);
  return ctx;
}

BoundedContext build_context(const Workspace& ws, const ActionWindow& window, std::string_view objective,
                             std::string_view preamble, std::size_t budget) {
  if (budget < kMinContextBudget) {
    throw ContextConfigError(fmt::format("context budget {} below minimum {}", budget, kMinContextBudget));
  }
  const std::size_t snap_budget = budget / 2;
  return build_context(ws.snapshot(snap_budget), window, objective, preamble, budget,
                       [&ws](std::size_t b) { return ws.snapshot(b); });
}

// ---------------------------------------------------------------------------

const std::string_view kConsolidationInstruction =
    "CONSOLIDATE: Write a short progress note summarizing what has been completed and what "
    "remains. If the plan must change, end your reply with a line 'PLAN:' followed by the full "
    "new plan.";

ConsolidationOutcome consolidate(Workspace& ws, const ActionWindow& window, const ConsolidationPolicy& policy,
                                 Backend& backend, std::string_view objective, std::string_view preamble,
                                 std::size_t budget) {
  ConsolidationOutcome out;
  const std::string task = std::string(objective) + "\n\n" + std::string(kConsolidationInstruction);
  out.context = build_context(ws, window, task, preamble, budget);

  LLMResponse resp;
  try {
    resp = backend.complete(out.context.to_request(session::kConsolidation));
  } catch (const std::exception& e) {
    resp = LLMResponse::failure(e.what());
  }
  if (!resp.ok()) {
    out.warning = "consolidation skipped at step " + std::to_string(ws.pending_step()) + ": " + resp.error_reason;
    spdlog::warn("{}: {}", ws.task_id(), out.warning);
    return out;
  }

  std::string note = resp.content;
  std::string plan;
  const auto marker = note.rfind("PLAN:");
  if (marker != std::string::npos && (marker == 0 || note[marker - 1] == '\n')) {
    plan = trim(std::string_view(note).substr(marker + 5));
    note = note.substr(0, marker);
  }
  out.note = truncate_text(trim(note), policy.progress_budget);

  std::string progress = ws.read("progress.md");
  if (!progress.empty() && progress.back() != '\n') progress += '\n';
  progress += fmt::format("### step {}\n{}\n", ws.pending_step(), out.note);
  ws.apply(TransitionOp::modify("progress.md", progress));
  if (!plan.empty()) {
    ws.apply(TransitionOp::modify("plan.md", truncate_text(plan, policy.plan_budget) + "\n"));
    out.plan_updated = true;
  }
  out.applied = true;
  return out;
}

}  // namespace fcagent
