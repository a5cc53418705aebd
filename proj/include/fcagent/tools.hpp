// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcagent/backend.hpp"
#include "fcagent/context.hpp"
#include "fcagent/document.hpp"
#include "fcagent/workspace.hpp"

namespace fcagent {

class Corpus;

enum class ToolEffect { read_only, workspace_write, external_call };

std::string_view to_string(ToolEffect effect);

struct ToolParam {
  std::string name;
  std::string type;  // "string" | "integer"
  bool required = true;
};

struct ToolDescriptor {
  std::string name;
  std::string description;
  std::vector<ToolParam> args;
  ToolEffect effect = ToolEffect::read_only;
};

struct ToolResult {
  ActionStatus status = ActionStatus::ok;
  std::string text;

  static ToolResult ok(std::string text) { return {ActionStatus::ok, std::move(text)}; }
  static ToolResult error(std::string text) { return {ActionStatus::error, std::move(text)}; }
};

struct ToolOptions {
  std::size_t read_cap = 4096;
  std::size_t search_results = 5;
  ChunkingOptions chunking;
};

// What a tool may touch while it runs.
struct ToolContext {
  Workspace& ws;
  Backend& backend;
  const Corpus* corpus = nullptr;
  ToolOptions options;
};

using ToolFn = std::function<ToolResult(const nlohmann::json& args, ToolContext& ctx)>;

class ToolRegistry {
 public:
  // Throws std::invalid_argument for a duplicate name.
  void register_tool(ToolDescriptor descriptor, ToolFn fn);

  bool contains(std::string_view name) const;
  const ToolDescriptor& descriptor(std::string_view name) const;
  std::vector<std::string> names() const;

  // Runs the tool; exceptions become error results.
  ToolResult invoke(std::string_view name, const nlohmann::json& args, ToolContext& ctx) const;

  // One line per tool, sorted by name; restricted to `only` when non-empty.
  std::string render_listing(const std::set<std::string>& only = {}) const;

 private:
  struct Entry {
    ToolDescriptor descriptor;
    ToolFn fn;
  };
  std::map<std::string, Entry, std::less<>> tools_;
};

struct ReadChunk {
  std::string data;
  std::size_t offset = 0;
  std::size_t next_offset = 0;
  std::size_t total_size = 0;
  bool eof = false;
};

// Reads at most `cap` bytes from `offset`. Throws WorkspaceError on escape
// or missing file.
ReadChunk read_workspace_file(const Workspace& ws, std::string_view path, std::size_t offset, std::size_t cap);

// Creates or modifies `path` through a workspace transition.
TransitionKind write_workspace_file(Workspace& ws, std::string_view path, std::string content);

ToolResult tool_read_file(const nlohmann::json& args, ToolContext& ctx);
ToolResult tool_write_file(const nlohmann::json& args, ToolContext& ctx);
ToolResult tool_list_dir(const nlohmann::json& args, ToolContext& ctx);
ToolResult tool_answer_from_document(const nlohmann::json& args, ToolContext& ctx);
ToolResult tool_search(const nlohmann::json& args, ToolContext& ctx);

// read_file, write_file, list_dir, answer_from_document and search.
ToolRegistry make_builtin_registry();

}  // namespace fcagent
