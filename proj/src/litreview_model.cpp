// SPDX-License-Identifier: Apache-2.0
#include "fcagent/litreview_model.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "fcagent/context.hpp"
#include "fcagent/directive.hpp"
#include "fcagent/document.hpp"
#include "fcagent/eval.hpp"
#include "fcagent/util.hpp"

namespace fcagent {

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  // FNV-1a, then a splitmix64 finish so nearby inputs spread out
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h += 0x9E3779B97F4A7C15ULL;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

namespace {

constexpr std::string_view kFact = "Notably, ";
constexpr std::string_view kDone = "DONE";

LLMResponse reply(std::string content) {
  LLMResponse r;
  r.content = std::move(content);
  r.finish_reason = FinishReason::stop;
  return r;
}

std::vector<std::string> extract_facts(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t pos = text.find(kFact); pos != std::string_view::npos; pos = text.find(kFact, pos + 1)) {
    const auto end = text.find_first_of(".\n", pos);
    if (end == std::string_view::npos || text[end] != '.') continue;
    const auto sentence = text.substr(pos, end - pos + 1);
    if (sentence.size() > kMaxFactChars) continue;
    if (std::find(out.begin(), out.end(), sentence) == out.end()) out.emplace_back(sentence);
  }
  return out;
}

std::string line_value(std::string_view text, std::string_view key) {
  const auto pos = text.find(key);
  if (pos == std::string_view::npos) return {};
  const auto start = pos + key.size();
  const auto end = text.find('\n', start);
  return trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::string reader_reply(const LLMRequest& req, std::uint64_t seed) {
  const std::string& user = req.messages.back().content;
  if (user.rfind(kReaderReduceTask, 0) == 0) {
    const auto findings = extract_facts(user);
    if (findings.empty()) return "NONE";
    const auto query = line_value(user, "QUERY: ");
    const std::size_t k = std::min<std::size_t>(findings.size(), 1 + stable_hash(query, seed) % 3);
    std::string out;
    for (std::size_t i = 0; i < k; ++i) {
      if (i) out += " | ";
      out += findings[i];
    }
    return out;
  }
  const auto facts = extract_facts(user);
  if (facts.empty()) return "NONE";
  std::string out;
  for (const auto& f : facts) out += f + "\n";
  return out;
}

struct LastAction {
  std::string tool;
  bool ok = false;
  std::string result;
};

// What the model can see at this step.
struct View {
  std::vector<std::string> items;
  std::optional<std::string> cursor;
  std::optional<LastAction> last;
};

std::vector<std::string> parse_items(std::string_view text) {
  std::vector<std::string> items;
  std::istringstream in(line_value(text, "ITEMS: "));
  for (std::string id; in >> id;) items.push_back(id);
  return items;
}

std::optional<std::string> cursor_in(std::string_view plan) {
  const auto pos = plan.rfind("NEXT: ");
  if (pos == std::string_view::npos) return std::nullopt;
  auto v = line_value(plan.substr(pos), "NEXT: ");
  if (v.empty()) return std::nullopt;
  return v;
}

View view_bounded(std::string_view user) {
  View v;
  const auto state = user.find(kStateHeader);
  const auto actions = user.find(kActionsHeader);
  const auto objective = user.find(kObjectiveHeader);
  if (objective != std::string_view::npos) v.items = parse_items(user.substr(objective));
  if (state != std::string_view::npos && actions != std::string_view::npos && state < actions) {
    v.cursor = cursor_in(user.substr(state, actions - state));
  }
  if (actions != std::string_view::npos) {
    const auto section = user.substr(actions, objective == std::string_view::npos ? std::string_view::npos
                                                                                   : objective - actions);
    const auto head = section.rfind("- step ");
    if (head != std::string_view::npos) {
      const auto line = section.substr(head, section.find('\n', head) - head);
      // "- step N | tool | status"
      const auto a = line.find(" | ");
      const auto b = line.rfind(" | ");
      if (a != std::string_view::npos && b > a) {
        LastAction last;
        last.tool = std::string(line.substr(a + 3, b - a - 3));
        last.ok = line.substr(b + 3) == "ok";
        last.result = line_value(section.substr(head), "  result: ");
        v.last = std::move(last);
      }
    }
  }
  return v;
}

View view_history(const std::vector<Message>& messages) {
  View v;
  for (const auto& m : messages) {
    if (m.role == Role::user && m.content.rfind(kObjectiveHeader, 0) == 0) v.items = parse_items(m.content);
  }
  for (auto it = messages.rbegin(); it != messages.rend() && !v.cursor; ++it) {
    if (it->role != Role::assistant) continue;
    const auto d = parse_directive(it->content);
    if (d && d->kind == Directive::Kind::tool && d->tool == "write_file" && d->args.value("path", "") == "plan.md") {
      v.cursor = cursor_in(d->args.value("content", ""));
    }
  }
  const auto& latest = messages.back();
  if (latest.role == Role::user && latest.content.rfind("TOOL RESULT ", 0) == 0) {
    const auto head_end = latest.content.find('\n');
    const std::string_view head = std::string_view(latest.content).substr(0, head_end);
    const auto open = head.rfind(" (");
    if (open != std::string_view::npos) {
      LastAction last;
      last.tool = std::string(head.substr(12, open - 12));
      last.ok = head.substr(open) == " (ok):";
      last.result = head_end == std::string::npos ? "" : latest.content.substr(head_end + 1);
      v.last = std::move(last);
    }
  }
  return v;
}

std::string thought(std::uint64_t seed, std::string_view item, std::string_view phase) {
  const std::size_t len = 40 + stable_hash(fmt::format("{}/{}", item, phase), seed) % 600;
  static constexpr std::string_view kPattern = "weighing the next move; ";
  std::string out;
  out.reserve(len);
  while (out.size() < len) out += kPattern;
  out.resize(len);
  return out;
}

std::string directive(std::string_view tool, nlohmann::ordered_json args, std::string note) {
  nlohmann::ordered_json j;
  j["action"] = "tool";
  j["thought"] = std::move(note);
  j["tool"] = tool;
  j["args"] = std::move(args);
  return "```json\n" + j.dump() + "\n```";
}

std::string finish(std::string answer) {
  nlohmann::ordered_json j;
  j["action"] = "finish";
  j["final_answer"] = std::move(answer);
  return "```json\n" + j.dump() + "\n```";
}

std::string main_reply(const LLMRequest& req, std::uint64_t seed) {
  std::string user;
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == Role::user) {
      user = it->content;
      break;
    }
  }
  const bool bounded = user.find(kStateHeader) != std::string::npos;
  View v = bounded ? view_bounded(user) : view_history(req.messages);

  if (v.items.empty()) return finish("stopping: the item list is no longer in view");
  const std::string current = v.cursor.value_or(v.items.front());
  if (current == kDone) return finish(fmt::format("reviewed {} items", v.items.size()));
  const auto pos = std::find(v.items.begin(), v.items.end(), current);
  if (pos == v.items.end()) return finish("stopping: plan cursor is not a known item");
  const std::string following = pos + 1 == v.items.end() ? std::string(kDone) : *(pos + 1);

  auto advance = [&] {
    nlohmann::ordered_json args;
    args["path"] = "plan.md";
    args["content"] = fmt::format("# Review plan\nRead, summarize and score every item in order.\nNEXT: {}\n", following);
    return directive("write_file", std::move(args), thought(seed, current, "plan"));
  };

  if (v.last && v.last->tool == "answer_from_document") {
    if (!v.last->ok) return advance();
    nlohmann::ordered_json args;
    args["path"] = review_path(current);
    args["content"] = render_review(v.last->result, static_cast<int>(1 + stable_hash(current, seed) % 5));
    return directive("write_file", std::move(args), thought(seed, current, "review"));
  }
  if (v.last && v.last->tool == "write_file" && v.last->ok &&
      v.last->result.find(review_path(current)) != std::string::npos) {
    return advance();
  }
  nlohmann::ordered_json args;
  args["doc"] = current;
  args["source"] = "corpus";
  args["query"] = fmt::format("Key findings of {}", current);
  return directive("answer_from_document", std::move(args), thought(seed, current, "read"));
}

std::string consolidation_reply(const LLMRequest& req) {
  const auto v = view_bounded(req.messages.back().content);
  return fmt::format("Reviews so far are under artifacts/reviews/; plan cursor at {}.", v.cursor.value_or("start"));
}

}  // namespace

LLMResponse litreview_respond(const LLMRequest& request, std::uint64_t seed) {
  if (request.messages.empty()) return LLMResponse::failure("empty request");
  if (request.session_tag == session::kReader) return reply(reader_reply(request, seed));
  if (request.session_tag == session::kConsolidation) return reply(consolidation_reply(request));
  return reply(main_reply(request, seed));
}

std::unique_ptr<MockBackend> make_litreview_backend(std::size_t context_limit, OverflowPolicy on_overflow,
                                                    std::uint64_t seed) {
  return std::make_unique<MockBackend>(
      context_limit, on_overflow, [seed](const LLMRequest& r) { return litreview_respond(r, seed); },
      "mock-litreview");
}

}  // namespace fcagent
