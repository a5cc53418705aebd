// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcagent {

namespace fs = std::filesystem;

class WorkspaceError : public std::runtime_error {
 public:
  enum class Kind { setup, collision, not_found, rejected, parameter, security, busy };

  WorkspaceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class TransitionKind { create, modify, remove };

std::string_view to_string(TransitionKind kind);

// One file-level effect of an action.
struct TransitionOp {
  TransitionKind kind = TransitionKind::create;
  std::string target;   // path relative to the task directory
  std::string payload;  // ignored for remove

  static TransitionOp create(std::string target, std::string payload);
  static TransitionOp modify(std::string target, std::string payload);
  static TransitionOp remove(std::string target);
};

struct FileArtifact {
  std::string relative_path;
  std::uint64_t byte_size = 0;
  std::uint64_t created_step = 0;
  std::uint64_t modified_step = 0;
  std::string content_digest;
};

struct ListingEntry {
  std::string relative_path;
  std::uint64_t byte_size = 0;
  std::uint64_t modified_step = 0;
};

struct StateSnapshot {
  std::vector<ListingEntry> file_listing;  // the rendered prefix, sorted by path
  std::size_t omitted_files = 0;
  std::string plan_excerpt;
  std::string progress_excerpt;
  std::uint64_t snapshot_step = 0;
  std::size_t budget = 0;
  std::string rendered;

  std::size_t rendered_size() const { return rendered.size(); }
};

struct WorkspaceOptions {
  bool sync = true;  // fsync blobs and log records before applying them
};

// Task-scoped persistent state: a directory of files whose every change goes
// through a write-ahead transition log.
//
// Layout under `<root>/<task_id>/`:
//   plan.md, progress.md, artifacts/, logs/transitions.jsonl,
//   logs/actions.jsonl, logs/contexts.jsonl, logs/blobs/<sha256>
//
// The step counter counts committed steps. A step is one action-induced
// transition and may carry zero or more file ops; `apply_transition` is the
// one-op case. Empty steps are logged as "noop" records so replay can
// reconstruct the counter exactly.
class Workspace {
 public:
  static constexpr std::size_t kMinSnapshotBudget = 512;

  static Workspace init(const fs::path& root, const std::string& task_id, bool resume = false,
                        WorkspaceOptions options = {});
  static Workspace resume(const fs::path& root, const std::string& task_id,
                          WorkspaceOptions options = {});
  // Replays the log without repairing anything on disk and without taking
  // the writer lock. For inspectors.
  static Workspace open_read_only(const fs::path& root, const std::string& task_id);
  // Rebuilds the state of `source_task_dir` up to `up_to_step` (all steps when
  // unset) into a fresh workspace at `<dest_root>/<task_id>`.
  static Workspace replay(const fs::path& source_task_dir, const fs::path& dest_root,
                          const std::string& task_id,
                          std::optional<std::uint64_t> up_to_step = std::nullopt,
                          WorkspaceOptions options = {});
  static bool exists(const fs::path& root, const std::string& task_id);
  static bool valid_task_id(std::string_view task_id);

  Workspace(Workspace&& other) noexcept;
  Workspace& operator=(Workspace&& other) noexcept;
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace();

  const fs::path& dir() const { return dir_; }
  const std::string& task_id() const { return task_id_; }
  std::uint64_t step_counter() const { return step_counter_; }
  // Number the next committed step will carry.
  std::uint64_t pending_step() const { return step_counter_ + 1; }
  bool step_open() const { return step_open_; }
  bool read_only() const { return read_only_; }

  // Applies `op` as a complete step. Throws WorkspaceError(rejected|security)
  // and leaves the workspace untouched when the op is invalid.
  void apply_transition(const TransitionOp& op);
  // Applies `op` inside the currently open step, opening one if needed.
  void apply(const TransitionOp& op);
  // Commits the open step; an empty step is logged as a noop.
  void end_step();

  StateSnapshot snapshot(std::size_t budget) const;

  const std::map<std::string, FileArtifact>& files() const { return files_; }
  bool contains(std::string_view relative_path) const;
  std::string read(std::string_view relative_path) const;
  // Digest over the (path, content digest) pairs of every tracked file.
  std::string state_digest() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Normalizes a task-relative path; throws WorkspaceError(security) for
  // anything that escapes the task directory or touches logs/.
  static std::string normalize_target(std::string_view relative_path);

  fs::path logs_dir() const { return dir_ / "logs"; }
  fs::path transitions_log() const { return logs_dir() / "transitions.jsonl"; }
  fs::path actions_log() const { return logs_dir() / "actions.jsonl"; }
  fs::path contexts_log() const { return logs_dir() / "contexts.jsonl"; }
  fs::path run_metadata() const { return logs_dir() / "run.json"; }
  fs::path blobs_dir() const { return logs_dir() / "blobs"; }

 private:
  Workspace() = default;

  struct Replayed;
  static Replayed replay_log(const fs::path& task_dir);

  void acquire_lock();
  void check_op(const std::string& target, const TransitionOp& op) const;
  void apply_unchecked(const std::string& target, const TransitionOp& op, std::uint64_t step);
  void log_record(std::uint64_t step, std::string_view kind, std::string_view target,
                  std::string_view digest, std::uint64_t size);
  void store_blob(std::string_view digest, std::string_view payload);
  void materialize();

  fs::path dir_;
  std::string task_id_;
  std::uint64_t step_counter_ = 0;
  bool step_open_ = false;
  bool step_has_ops_ = false;
  bool read_only_ = false;
  WorkspaceOptions options_;
  std::map<std::string, FileArtifact> files_;
  std::vector<std::string> warnings_;
  int lock_fd_ = -1;
};

}  // namespace fcagent
