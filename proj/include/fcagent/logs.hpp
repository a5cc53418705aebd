// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcagent/context.hpp"

namespace fcagent {

// One line of logs/actions.jsonl.
struct ActionLogEntry {
  enum class Kind { action, consolidation };

  ActionRecord record;
  Kind kind = Kind::action;
  std::uint64_t invocation = 0;         // agent run that produced it
  std::uint64_t parent_invocation = 0;  // 0 for the root agent
  std::int64_t timestamp = 0;
};

class ActionLog {
 public:
  explicit ActionLog(std::filesystem::path path, bool sync = false) : path_(std::move(path)), sync_(sync) {}

  void append(const ActionLogEntry& entry) const;
  // Parses every complete line; a torn trailing line is ignored.
  static std::vector<ActionLogEntry> read(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool sync_;
};

// One line of logs/contexts.jsonl. Text is only stored in verbose mode.
struct ContextLogEntry {
  std::uint64_t step = 0;
  std::string agent_id;
  std::uint64_t invocation = 0;
  std::string session;
  int attempt = 0;
  std::size_t size = 0;
  std::string digest;
  std::optional<std::string> text;
};

class ContextLog {
 public:
  ContextLog(std::filesystem::path path, bool verbose) : path_(std::move(path)), verbose_(verbose) {}

  void append(std::uint64_t step, const std::string& agent_id, std::uint64_t invocation,
              std::string_view session, int attempt, const std::string& text) const;
  static std::vector<ContextLogEntry> read(const std::filesystem::path& path);

  bool verbose() const { return verbose_; }

 private:
  std::filesystem::path path_;
  bool verbose_;
};

}  // namespace fcagent
