// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fcagent/backend.hpp"
#include "fcagent/workspace.hpp"

namespace fcagent {

enum class ActionStatus { ok, error };

std::string_view to_string(ActionStatus status);

struct ActionRecord {
  static constexpr std::size_t kSummaryCap = 512;

  std::uint64_t step = 0;
  std::string agent_id;
  std::string tool_name;
  std::string args_summary;
  std::string result_summary;
  ActionStatus status = ActionStatus::ok;

  // Builds a record with both summaries cut to kSummaryCap.
  static ActionRecord make(std::uint64_t step, std::string agent_id, std::string tool_name,
                           std::string_view args, std::string_view result, ActionStatus status);
};

// Fixed-capacity buffer of the most recent actions, oldest first.
class ActionWindow {
 public:
  static constexpr std::size_t kDefaultCapacity = 10;

  explicit ActionWindow(std::size_t capacity = kDefaultCapacity);

  // Appends `record`, evicting the oldest entry when full. Throws
  // std::invalid_argument unless record.step exceeds the last recorded step.
  void record(ActionRecord record);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::deque<ActionRecord>& records() const { return records_; }

 private:
  std::size_t capacity_;
  std::deque<ActionRecord> records_;
  std::uint64_t last_step_ = 0;
  bool any_ = false;
};

class ContextConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinContextBudget = 2048;

inline constexpr std::string_view kStateHeader = "## STATE\n";
inline constexpr std::string_view kActionsHeader = "## RECENT ACTIONS\n";
inline constexpr std::string_view kObjectiveHeader = "## OBJECTIVE\n";

struct BoundedContext {
  std::string system_preamble;
  std::string state_section;
  std::string actions_section;
  std::string objective_section;
  std::size_t total_size = 0;
  std::size_t budget = 0;
  std::vector<std::uint64_t> action_steps;  // steps rendered in actions_section

  // Everything after the preamble, as sent in the user message.
  std::string user_text() const;
  // Full context bytes: preamble, blank line, user text.
  std::string render() const;
  LLMRequest to_request(std::string_view session_tag) const;
};

std::string render_action(const ActionRecord& record);

using Resnapshot = std::function<StateSnapshot(std::size_t budget)>;

// Deterministic reconstruction of the per-step context from a workspace
// snapshot and the action window.
//
// Over budget, the oldest actions go first, then the state is re-snapshotted
// at half its budget (down to the snapshot minimum) via `resnapshot`. The
// objective and preamble are never cut; if they alone cannot fit, throws
// ContextConfigError.
BoundedContext build_context(const StateSnapshot& snapshot, const ActionWindow& window,
                             std::string_view objective, std::string_view preamble, std::size_t budget,
                             const Resnapshot& resnapshot = {},
                             const SizeEstimator& estimator = estimate_size);

// Convenience overload: snapshots `ws` at budget / 2.
BoundedContext build_context(const Workspace& ws, const ActionWindow& window, std::string_view objective,
                             std::string_view preamble, std::size_t budget);

struct ConsolidationPolicy {
  std::uint64_t interval_steps = 25;
  std::size_t plan_budget = 2048;
  std::size_t progress_budget = 1024;  // cap on each appended progress note
};

inline bool consolidation_due(std::uint64_t step, const ConsolidationPolicy& policy) {
  return policy.interval_steps > 0 && step > 0 && step % policy.interval_steps == 0;
}

extern const std::string_view kConsolidationInstruction;

struct ConsolidationOutcome {
  bool applied = false;
  bool plan_updated = false;
  std::string note;
  std::string warning;
  BoundedContext context;
};

// One backend call that refreshes progress.md (and plan.md when the reply
// carries a "PLAN:" section). Writes join the workspace's current step.
// Backend failures skip the update and return a warning.
ConsolidationOutcome consolidate(Workspace& ws, const ActionWindow& window, const ConsolidationPolicy& policy,
                                 Backend& backend, std::string_view objective, std::string_view preamble,
                                 std::size_t budget);

}  // namespace fcagent
