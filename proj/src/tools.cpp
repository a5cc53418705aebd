// SPDX-License-Identifier: Apache-2.0
#include "fcagent/tools.hpp"

#include <fmt/core.h>

#include "fcagent/corpus.hpp"
#include "fcagent/util.hpp"

namespace fcagent {

std::string_view to_string(ToolEffect effect) {
  switch (effect) {
    case ToolEffect::read_only: return "read_only";
    case ToolEffect::workspace_write: return "workspace_write";
    case ToolEffect::external_call: return "external_call";
  }
  return "read_only";
}

void ToolRegistry::register_tool(ToolDescriptor descriptor, ToolFn fn) {
  if (descriptor.name.empty()) throw std::invalid_argument("tool name is empty");
  if (tools_.count(descriptor.name)) throw std::invalid_argument("tool already registered: " + descriptor.name);
  auto name = descriptor.name;
  tools_.emplace(std::move(name), Entry{std::move(descriptor), std::move(fn)});
}

bool ToolRegistry::contains(std::string_view name) const { return tools_.find(name) != tools_.end(); }

const ToolDescriptor& ToolRegistry::descriptor(std::string_view name) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) throw std::out_of_range("unknown tool: " + std::string(name));
  return it->second.descriptor;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tools_) out.push_back(name);
  return out;
}

ToolResult ToolRegistry::invoke(std::string_view name, const nlohmann::json& args, ToolContext& ctx) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) return ToolResult::error("unknown tool: " + std::string(name));
  try {
    return it->second.fn(args, ctx);
  } catch (const WorkspaceError& e) {
    switch (e.kind()) {
      case WorkspaceError::Kind::security: return ToolResult::error(std::string("security error: ") + e.what());
      case WorkspaceError::Kind::not_found: return ToolResult::error(std::string("not found: ") + e.what());
      default: return ToolResult::error(std::string("rejected: ") + e.what());
    }
  } catch (const std::exception& e) {
    return ToolResult::error(std::string("error: ") + e.what());
  }
}

std::string ToolRegistry::render_listing(const std::set<std::string>& only) const {
  std::string out;
  for (const auto& [name, entry] : tools_) {
    if (!only.empty() && !only.count(name)) continue;
    std::string params;
    for (const auto& p : entry.descriptor.args) {
      if (!params.empty()) params += ", ";
      params += fmt::format("{}{}: {}", p.name, p.required ? "" : "?", p.type);
    }
    out += fmt::format("- {}({}) [{}]: {}\n", name, params, to_string(entry.descriptor.effect),
                       entry.descriptor.description);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string required_string(const nlohmann::json& args, const char* key) {
  if (!args.is_object() || !args.contains(key) || !args.at(key).is_string()) {
    throw std::invalid_argument(fmt::format("missing string argument '{}'", key));
  }
  return args.at(key).get<std::string>();
}

std::size_t optional_size(const nlohmann::json& args, const char* key, std::size_t fallback) {
  if (!args.is_object() || !args.contains(key)) return fallback;
  const auto& v = args.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw std::invalid_argument(fmt::format("argument '{}' must be a non-negative integer", key));
  }
  return v.get<std::size_t>();
}

}  // namespace

ReadChunk read_workspace_file(const Workspace& ws, std::string_view path, std::size_t offset, std::size_t cap) {
  const std::string content = ws.read(path);
  ReadChunk chunk;
  chunk.offset = offset;
  chunk.total_size = content.size();
  if (offset < content.size()) chunk.data = content.substr(offset, cap);
  chunk.next_offset = std::min(content.size(), offset + chunk.data.size());
  chunk.eof = chunk.next_offset >= content.size();
  return chunk;
}

TransitionKind write_workspace_file(Workspace& ws, std::string_view path, std::string content) {
  const std::string target = Workspace::normalize_target(path);
  auto op = ws.contains(target) ? TransitionOp::modify(target, std::move(content))
                                : TransitionOp::create(target, std::move(content));
  const auto kind = op.kind;
  ws.apply(op);
  return kind;
}

ToolResult tool_read_file(const nlohmann::json& args, ToolContext& ctx) {
  const auto path = required_string(args, "path");
  const auto chunk = read_workspace_file(ctx.ws, path, optional_size(args, "offset", 0), ctx.options.read_cap);
  std::string header = fmt::format("[read_file {} offset={} bytes={} next_offset={}{}]\n", path, chunk.offset,
                                   chunk.data.size(), chunk.next_offset, chunk.eof ? " <EOF>" : "");
  return ToolResult::ok(header + chunk.data);
}

ToolResult tool_write_file(const nlohmann::json& args, ToolContext& ctx) {
  const auto path = required_string(args, "path");
  auto content = required_string(args, "content");
  const auto size = content.size();
  const auto kind = write_workspace_file(ctx.ws, path, std::move(content));
  return ToolResult::ok(fmt::format("[write_file {}] {} {} bytes", Workspace::normalize_target(path),
                                    kind == TransitionKind::create ? "created" : "modified", size));
}

ToolResult tool_list_dir(const nlohmann::json& args, ToolContext& ctx) {
  std::string prefix;
  if (args.is_object() && args.contains("path") && args.at("path").is_string()) {
    const auto p = args.at("path").get<std::string>();
    if (!p.empty() && p != "." && p != "/") prefix = Workspace::normalize_target(p) + "/";
  }
  std::string out = fmt::format("[list_dir {}]\n", prefix.empty() ? "." : prefix);
  std::size_t n = 0;
  for (const auto& [path, f] : ctx.ws.files()) {
    if (path.rfind(prefix, 0) != 0) continue;
    out += fmt::format("{} {}B @{}\n", path, f.byte_size, f.modified_step);
    ++n;
  }
  if (n == 0) out += "(empty)\n";
  return ToolResult::ok(out);
}

ToolResult tool_answer_from_document(const nlohmann::json& args, ToolContext& ctx) {
  const auto query = required_string(args, "query");
  DocumentRef doc;
  doc.identifier = required_string(args, "doc");
  const auto source = args.value("source", std::string{});
  if (source == "workspace") {
    doc.source = DocumentSource::workspace_file;
  } else if (source == "corpus") {
    doc.source = DocumentSource::corpus_item;
  } else {
    const bool in_corpus = ctx.corpus && ctx.corpus->find(doc.identifier);
    doc.source = in_corpus ? DocumentSource::corpus_item : DocumentSource::workspace_file;
  }
  try {
    const auto ans = answer_from_document(query, doc, &ctx.ws, ctx.corpus, ctx.backend, ctx.options.chunking);
    return ToolResult::ok(ans.answer);
  } catch (const PartialAnswerError& e) {
    return ToolResult::error(fmt::format("partial answer after {} chunks: {}", e.chunks_consulted(), e.what()));
  } catch (const DocumentError& e) {
    return ToolResult::error(std::string("unreadable document: ") + e.what());
  }
}

ToolResult tool_search(const nlohmann::json& args, ToolContext& ctx) {
  const auto query = required_string(args, "query");
  const auto n = optional_size(args, "n", ctx.options.search_results);
  std::string out = fmt::format("[search \"{}\"]\n", query);
  if (!ctx.corpus || ctx.corpus->empty()) return ToolResult::ok(out + "(no results)\n");
  const auto hits = search_corpus(*ctx.corpus, query, n);
  for (const auto& h : hits) out += fmt::format("{} | {} | {}\n", h.id, h.title, h.snippet);
  if (hits.empty()) out += "(no results)\n";
  return ToolResult::ok(out);
}

ToolRegistry make_builtin_registry() {
  ToolRegistry reg;
  reg.register_tool({"read_file",
                     "Read part of a workspace file; continue from next_offset.",
                     {{"path", "string", true}, {"offset", "integer", false}},
                     ToolEffect::read_only},
                    tool_read_file);
  reg.register_tool({"write_file",
                     "Create or overwrite a workspace file.",
                     {{"path", "string", true}, {"content", "string", true}},
                     ToolEffect::workspace_write},
                    tool_write_file);
  reg.register_tool({"list_dir",
                     "List workspace files under a directory with sizes and last-modified step.",
                     {{"path", "string", false}},
                     ToolEffect::read_only},
                    tool_list_dir);
  reg.register_tool({"answer_from_document",
                     "Answer a query about a corpus item or workspace file without loading it into context.",
                     {{"query", "string", true}, {"doc", "string", true}, {"source", "string", false}},
                     ToolEffect::external_call},
                    tool_answer_from_document);
  reg.register_tool({"search",
                     "Keyword search over the local corpus; returns ids, titles and short snippets.",
                     {{"query", "string", true}, {"n", "integer", false}},
                     ToolEffect::read_only},
                    tool_search);
  return reg;
}

}  // namespace fcagent
