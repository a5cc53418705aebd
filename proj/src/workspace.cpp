// SPDX-License-Identifier: Apache-2.0
#include "fcagent/workspace.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <set>

#include <fmt/core.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fcagent/util.hpp"

namespace fcagent {

namespace {

constexpr std::string_view kPlan = "plan.md";
constexpr std::string_view kProgress = "progress.md";
constexpr std::string_view kNoop = "noop";

const std::string& empty_digest() {
  static const std::string d = sha256_hex("");
  return d;
}

WorkspaceError rejected(const std::string& msg) {
  return WorkspaceError(WorkspaceError::Kind::rejected, msg);
}

std::map<std::string, FileArtifact> initial_files() {
  std::map<std::string, FileArtifact> files;
  for (auto name : {kPlan, kProgress}) {
    files.emplace(std::string(name), FileArtifact{std::string(name), 0, 0, 0, empty_digest()});
  }
  return files;
}

bool is_dir_prefix(std::string_view dir, std::string_view path) {
  return path.size() > dir.size() && path.substr(0, dir.size()) == dir && path[dir.size()] == '/';
}

}  // namespace

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::create: return "create";
    case TransitionKind::modify: return "modify";
    case TransitionKind::remove: return "delete";
  }
  return "create";
}

TransitionOp TransitionOp::create(std::string target, std::string payload) {
  return {TransitionKind::create, std::move(target), std::move(payload)};
}
TransitionOp TransitionOp::modify(std::string target, std::string payload) {
  return {TransitionKind::modify, std::move(target), std::move(payload)};
}
TransitionOp TransitionOp::remove(std::string target) {
  return {TransitionKind::remove, std::move(target), {}};
}

// ---------------------------------------------------------------------------
// Log replay

struct Workspace::Replayed {
  struct Record {
    std::uint64_t step = 0;
    std::string kind;
    std::string target;
    std::string digest;
    std::uint64_t size = 0;
  };
  std::map<std::string, FileArtifact> files = initial_files();
  std::vector<Record> records;
  std::uint64_t step_counter = 0;
  std::size_t valid_bytes = 0;
  std::size_t total_bytes = 0;
  std::vector<std::string> warnings;
};

Workspace::Replayed Workspace::replay_log(const fs::path& task_dir) {
  Replayed out;
  const fs::path log = task_dir / "logs" / "transitions.jsonl";
  const fs::path blobs = task_dir / "logs" / "blobs";
  const std::string raw = fs::exists(log) ? read_file(log) : std::string{};
  out.total_bytes = raw.size();

  bool step_closed = true;  // a noop closes its step
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < raw.size()) {
    ++line_no;
    const auto nl = raw.find('\n', pos);
    auto stop = [&](const std::string& why) {
      out.warnings.push_back(fmt::format("transition log line {} invalid ({}); resumed at step {}",
                                         line_no, why, out.step_counter));
    };
    if (nl == std::string::npos) {
      stop("incomplete record");
      break;
    }
    const std::string_view line(raw.data() + pos, nl - pos);

    Replayed::Record rec;
    try {
      const auto j = nlohmann::json::parse(line);
      rec.step = j.at("step").get<std::uint64_t>();
      rec.kind = j.at("kind").get<std::string>();
      rec.target = j.at("target").get<std::string>();
      rec.digest = j.at("payload_digest").get<std::string>();
      rec.size = j.at("payload_size").get<std::uint64_t>();
      (void)j.at("timestamp").get<std::int64_t>();
    } catch (const std::exception& e) {
      stop("unparseable");
      break;
    }

    const std::uint64_t last = out.step_counter;
    const bool continues = rec.step == last && last > 0 && !step_closed;
    if (!(rec.step == last + 1 || continues)) {
      stop("step out of order");
      break;
    }
    if (rec.kind == kNoop) {
      if (rec.step != last + 1) {
        stop("noop inside a step");
        break;
      }
    } else {
      const bool present = out.files.count(rec.target) > 0;
      if (rec.kind == "create" && present) {
        stop("create of existing file");
        break;
      }
      if ((rec.kind == "modify" || rec.kind == "delete") && !present) {
        stop(rec.kind + " of missing file");
        break;
      }
      if (rec.kind != "create" && rec.kind != "modify" && rec.kind != "delete") {
        stop("unknown kind");
        break;
      }
      if (rec.kind != "delete") {
        const fs::path blob = blobs / rec.digest;
        std::error_code ec;
        if (rec.digest.size() != 64 || !fs::exists(blob, ec) ||
            fs::file_size(blob, ec) != rec.size || sha256_hex(read_file(blob)) != rec.digest) {
          stop("payload blob missing or corrupt");
          break;
        }
      }
    }

    if (rec.kind == "create") {
      out.files[rec.target] = FileArtifact{rec.target, rec.size, rec.step, rec.step, rec.digest};
    } else if (rec.kind == "modify") {
      auto& f = out.files[rec.target];
      f.byte_size = rec.size;
      f.modified_step = rec.step;
      f.content_digest = rec.digest;
    } else if (rec.kind == "delete") {
      out.files.erase(rec.target);
    }
    step_closed = rec.kind == kNoop;
    out.step_counter = rec.step;
    out.records.push_back(std::move(rec));
    pos = nl + 1;
    out.valid_bytes = pos;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction

bool Workspace::valid_task_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_' || c == '.';
  });
}

bool Workspace::exists(const fs::path& root, const std::string& task_id) {
  std::error_code ec;
  return valid_task_id(task_id) && fs::is_directory(root / task_id, ec) &&
         fs::exists(root / task_id / "logs" / "transitions.jsonl", ec);
}

Workspace Workspace::init(const fs::path& root, const std::string& task_id, bool resume,
                          WorkspaceOptions options) {
  if (!valid_task_id(task_id)) {
    throw WorkspaceError(WorkspaceError::Kind::parameter, "task_id is not filesystem-safe: '" + task_id + "'");
  }
  std::error_code ec;
  const fs::path dir = root / task_id;
  if (fs::exists(dir, ec)) {
    if (resume) return Workspace::resume(root, task_id, options);
    throw WorkspaceError(WorkspaceError::Kind::collision, "task already exists: " + dir.string());
  }
  fs::create_directories(dir / "logs" / "blobs", ec);
  if (!ec) fs::create_directories(dir / "artifacts", ec);
  if (ec) {
    throw WorkspaceError(WorkspaceError::Kind::setup,
                         fmt::format("cannot create workspace under {}: {}", root.string(), ec.message()));
  }

  Workspace ws;
  ws.dir_ = dir;
  ws.task_id_ = task_id;
  ws.options_ = options;
  ws.files_ = initial_files();
  try {
    ws.acquire_lock();
    for (auto name : {kPlan, kProgress}) write_file_atomic(dir / name, "", options.sync);
    for (auto name : {"transitions.jsonl", "actions.jsonl", "contexts.jsonl"}) {
      write_file_atomic(dir / "logs" / name, "", options.sync);
    }
  } catch (const WorkspaceError&) {
    throw;
  } catch (const std::exception& e) {
    throw WorkspaceError(WorkspaceError::Kind::setup, e.what());
  }
  return ws;
}

Workspace Workspace::resume(const fs::path& root, const std::string& task_id, WorkspaceOptions options) {
  if (!exists(root, task_id)) {
    throw WorkspaceError(WorkspaceError::Kind::not_found, "no task '" + task_id + "' under " + root.string());
  }
  Workspace ws;
  ws.dir_ = root / task_id;
  ws.task_id_ = task_id;
  ws.options_ = options;
  ws.acquire_lock();

  auto replayed = replay_log(ws.dir_);
  ws.files_ = std::move(replayed.files);
  ws.step_counter_ = replayed.step_counter;
  ws.warnings_ = std::move(replayed.warnings);
  for (const auto& w : ws.warnings_) spdlog::warn("{}: {}", task_id, w);

  if (replayed.valid_bytes < replayed.total_bytes) {
    fs::resize_file(ws.transitions_log(), replayed.valid_bytes);
  }
  ws.materialize();
  return ws;
}

Workspace Workspace::open_read_only(const fs::path& root, const std::string& task_id) {
  if (!exists(root, task_id)) {
    throw WorkspaceError(WorkspaceError::Kind::not_found, "no task '" + task_id + "' under " + root.string());
  }
  Workspace ws;
  ws.dir_ = root / task_id;
  ws.task_id_ = task_id;
  ws.read_only_ = true;
  auto replayed = replay_log(ws.dir_);
  ws.files_ = std::move(replayed.files);
  ws.step_counter_ = replayed.step_counter;
  ws.warnings_ = std::move(replayed.warnings);
  return ws;
}

Workspace Workspace::replay(const fs::path& source_task_dir, const fs::path& dest_root,
                            const std::string& task_id, std::optional<std::uint64_t> up_to_step,
                            WorkspaceOptions options) {
  auto replayed = replay_log(source_task_dir);
  Workspace ws = init(dest_root, task_id, false, options);
  const fs::path blobs = source_task_dir / "logs" / "blobs";
  for (const auto& rec : replayed.records) {
    if (up_to_step && rec.step > *up_to_step) break;
    if (ws.step_open_ && rec.step != ws.pending_step()) ws.end_step();
    if (rec.kind == kNoop) {
      ws.end_step();
      continue;
    }
    if (rec.kind == "delete") {
      ws.apply(TransitionOp::remove(rec.target));
    } else {
      const auto kind = rec.kind == "create" ? TransitionKind::create : TransitionKind::modify;
      ws.apply(TransitionOp{kind, rec.target, read_file(blobs / rec.digest)});
    }
  }
  if (ws.step_open_) ws.end_step();
  return ws;
}

Workspace::Workspace(Workspace&& other) noexcept { *this = std::move(other); }

Workspace& Workspace::operator=(Workspace&& other) noexcept {
  if (this != &other) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    dir_ = std::move(other.dir_);
    task_id_ = std::move(other.task_id_);
    step_counter_ = other.step_counter_;
    step_open_ = other.step_open_;
    step_has_ops_ = other.step_has_ops_;
    read_only_ = other.read_only_;
    options_ = other.options_;
    files_ = std::move(other.files_);
    warnings_ = std::move(other.warnings_);
    lock_fd_ = std::exchange(other.lock_fd_, -1);
  }
  return *this;
}

Workspace::~Workspace() {
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void Workspace::acquire_lock() {
  const fs::path lock = logs_dir() / ".lock";
  lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw WorkspaceError(WorkspaceError::Kind::setup, "cannot open " + lock.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw WorkspaceError(WorkspaceError::Kind::busy, "workspace is held by another writer: " + dir_.string());
  }
}

// ---------------------------------------------------------------------------
// Transitions

std::string Workspace::normalize_target(std::string_view relative_path) {
  const fs::path p(relative_path);
  if (relative_path.empty() || p.is_absolute()) {
    throw WorkspaceError(WorkspaceError::Kind::security,
                         "path must be relative to the workspace: '" + std::string(relative_path) + "'");
  }
  const std::string norm = p.lexically_normal().generic_string();
  if (norm == "." || norm.empty() || norm == ".." || norm.rfind("../", 0) == 0 || norm.back() == '/') {
    throw WorkspaceError(WorkspaceError::Kind::security,
                         "path escapes the workspace: '" + std::string(relative_path) + "'");
  }
  if (norm == "logs" || norm.rfind("logs/", 0) == 0) {
    throw WorkspaceError(WorkspaceError::Kind::security, "logs/ is managed by the runtime: '" + norm + "'");
  }
  return norm;
}

void Workspace::check_op(const std::string& target, const TransitionOp& op) const {
  if (read_only_) throw rejected("workspace opened read-only");
  const bool present = files_.count(target) > 0;
  switch (op.kind) {
    case TransitionKind::create:
      if (present) throw rejected("create: '" + target + "' already exists");
      for (const auto& [path, _] : files_) {
        if (is_dir_prefix(path, target) || is_dir_prefix(target, path)) {
          throw rejected("create: '" + target + "' conflicts with '" + path + "'");
        }
      }
      break;
    case TransitionKind::modify:
      if (!present) throw rejected("modify: '" + target + "' does not exist");
      break;
    case TransitionKind::remove:
      if (!present) throw rejected("delete: '" + target + "' does not exist");
      if (target == kPlan || target == kProgress) throw rejected("delete: '" + target + "' is required");
      break;
  }
}

void Workspace::apply_transition(const TransitionOp& op) {
  if (step_open_) throw std::logic_error("apply_transition called while a step is open");
  apply(op);
  end_step();
}

void Workspace::apply(const TransitionOp& op) {
  const std::string target = normalize_target(op.target);
  check_op(target, op);
  step_open_ = true;
  apply_unchecked(target, op, pending_step());
  step_has_ops_ = true;
}

void Workspace::end_step() {
  if (read_only_) throw rejected("workspace opened read-only");
  if (!step_has_ops_) log_record(pending_step(), kNoop, "", "", 0);
  ++step_counter_;
  step_open_ = false;
  step_has_ops_ = false;
}

void Workspace::store_blob(std::string_view digest, std::string_view payload) {
  const fs::path blob = blobs_dir() / std::string(digest);
  std::error_code ec;
  if (fs::exists(blob, ec) && fs::file_size(blob, ec) == payload.size()) return;
  write_file_atomic(blob, payload, options_.sync);
}

void Workspace::log_record(std::uint64_t step, std::string_view kind, std::string_view target,
                           std::string_view digest, std::uint64_t size) {
  nlohmann::ordered_json rec;
  rec["step"] = step;
  rec["kind"] = kind;
  rec["target"] = target;
  rec["payload_digest"] = digest;
  rec["payload_size"] = size;
  rec["timestamp"] = monotonic_timestamp_us();
  append_line(transitions_log(), rec.dump(), options_.sync);
}

void Workspace::apply_unchecked(const std::string& target, const TransitionOp& op, std::uint64_t step) {
  const fs::path path = dir_ / target;
  if (op.kind == TransitionKind::remove) {
    log_record(step, to_string(op.kind), target, "", 0);
    fs::remove(path);
    files_.erase(target);
    return;
  }
  const std::string digest = sha256_hex(op.payload);
  // Payload first, then the log record, then the file: a crash at any point
  // leaves either no record or a record whose payload can be redone.
  store_blob(digest, op.payload);
  log_record(step, to_string(op.kind), target, digest, op.payload.size());
  fs::create_directories(path.parent_path());
  write_file_atomic(path, op.payload, options_.sync);

  auto [it, inserted] = files_.try_emplace(target);
  auto& f = it->second;
  if (inserted) {
    f.relative_path = target;
    f.created_step = step;
  }
  f.byte_size = op.payload.size();
  f.modified_step = step;
  f.content_digest = digest;
}

void Workspace::materialize() {
  for (const auto& [rel, art] : files_) {
    const fs::path path = dir_ / rel;
    std::error_code ec;
    if (fs::is_regular_file(path, ec) && sha256_hex(read_file(path)) == art.content_digest) continue;
    const std::string content = art.content_digest == empty_digest() ? std::string{}
                                                                     : read_file(blobs_dir() / art.content_digest);
    fs::create_directories(path.parent_path());
    write_file_atomic(path, content, options_.sync);
  }
  std::vector<fs::path> stray;
  for (auto it = fs::recursive_directory_iterator(dir_); it != fs::recursive_directory_iterator(); ++it) {
    const auto rel = fs::relative(it->path(), dir_).generic_string();
    if (rel == "logs") {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && files_.count(rel) == 0) stray.push_back(it->path());
  }
  for (const auto& p : stray) {
    spdlog::warn("{}: removing uncommitted file {}", task_id_, p.string());
    fs::remove(p);
  }
  fs::create_directories(dir_ / "artifacts");
}

// ---------------------------------------------------------------------------
// Queries

bool Workspace::contains(std::string_view relative_path) const {
  return files_.count(std::string(relative_path)) > 0;
}

std::string Workspace::read(std::string_view relative_path) const {
  const std::string target = normalize_target(relative_path);
  if (!contains(target)) {
    throw WorkspaceError(WorkspaceError::Kind::not_found, "no such file: '" + target + "'");
  }
  return read_file(dir_ / target);
}

std::string Workspace::state_digest() const {
  std::string acc;
  for (const auto& [path, f] : files_) {
    acc += path;
    acc += '\0';
    acc += f.content_digest;
    acc += '\n';
  }
  return sha256_hex(acc);
}

namespace {

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string excerpt(const std::string& text, std::size_t room) {
  static constexpr std::string_view kCut = " [truncated]";
  if (text.size() <= room) return text;
  if (room <= kCut.size()) return text.substr(0, room);
  return text.substr(0, room - kCut.size()) + std::string(kCut);
}

std::string listing_line(const ListingEntry& e) {
  return fmt::format("{} {}B @{}\n", e.relative_path, e.byte_size, e.modified_step);
}

std::string more_marker(std::size_t n) { return fmt::format("… {} more files\n", n); }

}  // namespace

StateSnapshot Workspace::snapshot(std::size_t budget) const {
  if (budget < kMinSnapshotBudget) {
    throw WorkspaceError(WorkspaceError::Kind::parameter,
                         fmt::format("snapshot budget {} below minimum {}", budget, kMinSnapshotBudget));
  }
  StateSnapshot snap;
  snap.snapshot_step = step_counter_;
  snap.budget = budget;

  const std::string header = fmt::format("[workspace step {}]\n", step_counter_);
  const std::string plan_h = "### plan.md\n";
  const std::string prog_h = "### progress.md\n";
  const std::string files_h = fmt::format("### files ({})\n", files_.size());
  const std::string worst_marker = more_marker(files_.size());
  const std::size_t frame = header.size() + plan_h.size() + prog_h.size() + files_h.size() + 2;

  // frame + marker is far below the minimum budget for any realistic file count;
  // the clamp keeps the bound even for absurd ones.
  std::size_t room = budget > frame + worst_marker.size() ? budget - frame - worst_marker.size() : 0;

  const auto plan = strip_trailing_newlines(contains(kPlan) ? read(kPlan) : std::string{});
  snap.plan_excerpt = excerpt(plan, room);
  room -= snap.plan_excerpt.size();
  const auto progress = strip_trailing_newlines(contains(kProgress) ? read(kProgress) : std::string{});
  snap.progress_excerpt = excerpt(progress, room);
  room -= snap.progress_excerpt.size();

  std::vector<std::string> lines;
  lines.reserve(files_.size());
  std::size_t all_lines = 0;
  for (const auto& [path, f] : files_) {
    lines.push_back(listing_line({path, f.byte_size, f.modified_step}));
    all_lines += lines.back().size();
  }
  std::string listing;
  if (all_lines <= room + worst_marker.size()) {
    for (const auto& l : lines) listing += l;
    for (const auto& [path, f] : files_) snap.file_listing.push_back({path, f.byte_size, f.modified_step});
  } else {
    std::size_t used = 0;
    auto it = files_.begin();
    for (std::size_t i = 0; i < lines.size(); ++i, ++it) {
      if (used + lines[i].size() > room) break;
      used += lines[i].size();
      listing += lines[i];
      snap.file_listing.push_back({it->first, it->second.byte_size, it->second.modified_step});
    }
    snap.omitted_files = files_.size() - snap.file_listing.size();
    listing += more_marker(snap.omitted_files);
  }

  snap.rendered = header + plan_h + snap.plan_excerpt + "\n" + prog_h + snap.progress_excerpt + "\n" +
                  files_h + listing;
  if (snap.rendered.size() > budget) {
    // Only reachable when the frame alone cannot fit; keep the bound regardless.
    snap.rendered.resize(budget);
  }
  return snap;
}

}  // namespace fcagent
