// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "fcagent/engine.hpp"
#include "fcagent/logs.hpp"
#include "fcagent/mock_backend.hpp"
#include "fcagent/util.hpp"
#include "support.hpp"

using namespace fcagent;
using fcagent::testing::finish_with;
using fcagent::testing::TempDir;
using fcagent::testing::tool_call;

namespace {

// Replies per agent, served in order; the last one repeats. The agent is read
// from the preamble, which is all a real model would have to go on.
class Script {
 public:
  Script& add(const std::string& agent, std::vector<std::string> replies) {
    queues_[agent] = std::move(replies);
    return *this;
  }
  Script& fail_all(const std::string& agent) {
    failing_.insert(agent);
    return *this;
  }

  MockBackend backend(std::size_t limit = 1 << 20, OverflowPolicy overflow = OverflowPolicy::error) {
    return MockBackend(limit, overflow, [this](const LLMRequest& r) { return reply(r); });
  }

  std::vector<LLMRequest> requests;

 private:
  LLMResponse reply(const LLMRequest& r) {
    requests.push_back(r);
    if (r.session_tag == session::kConsolidation) {
      LLMResponse out;
      out.content = "progress noted";
      return out;
    }
    const std::string& sys = r.messages.front().content;
    for (auto& [agent, queue] : queues_) {
      if (sys.find("You are agent '" + agent + "'") == std::string::npos) continue;
      if (failing_.count(agent)) return LLMResponse::failure("scripted outage");
      auto& i = served_[agent];
      LLMResponse out;
      out.content = queue[std::min(i, queue.size() - 1)];
      ++i;
      return out;
    }
    return LLMResponse::failure("no script for this agent");
  }

  std::map<std::string, std::vector<std::string>> queues_;
  std::map<std::string, std::size_t> served_;
  std::set<std::string> failing_;
};

AgentSpec spec(std::string id, AgentLevel level, std::set<std::string> tools, int limit = 0) {
  AgentSpec s;
  s.agent_id = std::move(id);
  s.level = level;
  s.allowed_tools = std::move(tools);
  s.step_limit = limit ? limit : default_step_limit(level);
  s.context_budget = 4096;
  return s;
}

struct Rig {
  TempDir tmp;
  Workspace ws = Workspace::init(tmp.path(), "task", false, WorkspaceOptions{false});
  ToolRegistry tools = make_builtin_registry();

  std::vector<ActionLogEntry> actions() const { return ActionLog::read(ws.actions_log()); }
  std::vector<ContextLogEntry> contexts() const { return ContextLog::read(ws.contexts_log()); }
};

EngineOptions verbose() {
  EngineOptions o;
  o.verbose_contexts = true;
  return o;
}

std::string write(const std::string& path, const std::string& content) {
  return tool_call("write_file", {{"path", path}, {"content", content}});
}

std::string delegate_to(const std::string& agent, const std::string& objective) {
  return tool_call(agent, {{"objective", objective}});
}

}  // namespace

TEST(Engine, WriteThenFinish) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"write_file"})});
  Script script;
  script.add("alpha", {write("artifacts/out.md", "result"), finish_with("wrote it")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend, verbose());
  const auto out = engine.run("write the file");
  EXPECT_EQ(out.status, OutcomeStatus::done);
  EXPECT_EQ(out.steps_used, 2u);
  EXPECT_EQ(out.result_summary, "wrote it");
  EXPECT_EQ(rig.ws.read("artifacts/out.md"), "result");
  EXPECT_EQ(rig.ws.step_counter(), 2u);

  const auto log = rig.actions();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0].record.step, 1u);
  EXPECT_EQ(log[0].record.tool_name, "write_file");
  EXPECT_EQ(log[1].record.tool_name, "finish");
  EXPECT_EQ(log[1].record.step, 2u);
  EXPECT_EQ(log[0].parent_invocation, 0u);

  const auto ctx = rig.contexts();
  ASSERT_EQ(ctx.size(), 2u);
  ASSERT_TRUE(ctx[1].text);
  EXPECT_EQ(ctx[1].digest, sha256_hex(*ctx[1].text));
  EXPECT_NE(ctx[1].text->find("- step 1 | write_file | ok"), std::string::npos);
}

TEST(Engine, MalformedReplyIsRepairedOnceThenRecorded) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"write_file"})});
  Script script;
  script.add("alpha", {"I think I should write a file", "still prose", finish_with("ok")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend, verbose());
  const auto out = engine.run("obj");
  EXPECT_EQ(out.status, OutcomeStatus::done);
  EXPECT_EQ(out.steps_used, 2u);
  const auto log = rig.actions();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0].record.tool_name, "invalid_directive");
  EXPECT_EQ(log[0].record.status, ActionStatus::error);
  EXPECT_EQ(log[0].record.args_summary, "still prose");
  // the retry carried the repair instruction
  ASSERT_GE(script.requests.size(), 2u);
  EXPECT_NE(script.requests[1].messages.back().content.find(kRepairInstruction), std::string::npos);
  EXPECT_EQ(rig.contexts()[1].attempt, 2);
}

TEST(Engine, RepairSucceedsWithoutAnErrorRecord) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {})});
  Script script;
  script.add("alpha", {"prose", finish_with("ok")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  EXPECT_EQ(engine.run("obj").steps_used, 1u);
  EXPECT_EQ(rig.actions().size(), 1u);
}

TEST(Engine, StepLimitStopsTheLoop) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"list_dir"}, 50)});
  Script script;
  script.add("alpha", {tool_call("list_dir", nlohmann::json::object())});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  const auto out = engine.run("never ends");
  EXPECT_EQ(out.status, OutcomeStatus::step_limit_reached);
  EXPECT_EQ(out.steps_used, 50u);
  EXPECT_EQ(rig.ws.step_counter(), 50u);
  std::size_t own = 0;
  for (const auto& e : rig.actions()) own += e.kind == ActionLogEntry::Kind::action;
  EXPECT_EQ(own, 50u);  // consolidation entries at 25 and 50 are logged too
}

TEST(Engine, ConsecutiveBackendFailuresEndTheRun) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {})});
  Script script;
  script.fail_all("alpha").add("alpha", {""});
  auto backend = script.backend();
  EngineOptions o;
  o.max_consecutive_errors = 3;
  Engine engine(h, rig.tools, rig.ws, backend, o);
  const auto out = engine.run("obj");
  EXPECT_EQ(out.status, OutcomeStatus::failed);
  EXPECT_EQ(out.steps_used, 3u);
  for (const auto& e : rig.actions()) EXPECT_EQ(e.record.tool_name, "backend");
}

TEST(Engine, OverflowIsAnErrorRecordNotACrash) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {})});
  Script script;
  script.add("alpha", {finish_with("x")});
  auto backend = script.backend(100, OverflowPolicy::error);
  Engine engine(h, rig.tools, rig.ws, backend);
  const auto out = engine.run("obj");
  EXPECT_EQ(out.status, OutcomeStatus::failed);
  EXPECT_NE(rig.actions().front().record.result_summary.find("context_overflow"), std::string::npos);
}

TEST(Engine, ToolsOutsideTheAllowListAreRefused) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"read_file"})});
  Script script;
  script.add("alpha", {write("a.md", "x"), finish_with("done")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  engine.run("obj");
  const auto log = rig.actions();
  EXPECT_EQ(log[0].record.status, ActionStatus::error);
  EXPECT_NE(log[0].record.result_summary.find("not permitted"), std::string::npos);
  EXPECT_FALSE(rig.ws.contains("a.md"));
}

TEST(Engine, PreambleListsToolsAndAgents) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"coder", "search"}), spec("coder", AgentLevel::domain, {})});
  Script script;
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  const auto pre = engine.preamble_for(*h.find("alpha"));
  EXPECT_NE(pre.find("You are agent 'alpha'"), std::string::npos);
  EXPECT_NE(pre.find("- search("), std::string::npos);
  EXPECT_NE(pre.find("- coder(objective: string) [agent, domain]"), std::string::npos);
  EXPECT_EQ(pre.find("write_file"), std::string::npos);
}

TEST(Delegation, ChildTraceStaysOutOfTheParentContext) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"writer"}), spec("writer", AgentLevel::domain, {"write_file"})});
  Script script;
  const std::string secret = "CHILD-ONLY-7f3a9c";
  script.add("alpha", {delegate_to("writer", "write the notes"), finish_with("parent done")});
  script.add("writer", {write("artifacts/notes.md", secret + " body"), finish_with("notes written")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend, verbose());
  const auto out = engine.run("delegate it");
  EXPECT_EQ(out.status, OutcomeStatus::done);

  const auto log = rig.actions();
  ASSERT_EQ(log.size(), 4u);
  // child steps commit first; the parent's delegation step follows them
  EXPECT_EQ(log[0].record.agent_id, "writer");
  EXPECT_EQ(log[0].record.step, 1u);
  EXPECT_EQ(log[1].record.tool_name, "finish");
  EXPECT_EQ(log[2].record.agent_id, "alpha");
  EXPECT_EQ(log[2].record.tool_name, "writer");
  EXPECT_EQ(log[2].record.step, 3u);
  EXPECT_EQ(log[2].record.result_summary, "[child done] notes written");
  EXPECT_EQ(log[0].parent_invocation, log[2].invocation);

  bool saw_parent = false;
  for (const auto& c : rig.contexts()) {
    ASSERT_TRUE(c.text);
    if (c.agent_id != "alpha") continue;
    saw_parent = true;
    EXPECT_EQ(c.text->find(secret), std::string::npos);
    EXPECT_EQ(c.text->find("You are agent 'writer'"), std::string::npos);
  }
  EXPECT_TRUE(saw_parent);
  for (const auto& r : script.requests) {
    if (r.messages.front().content.find("You are agent 'alpha'") != std::string::npos) {
      for (const auto& m : r.messages) EXPECT_EQ(m.content.find(secret), std::string::npos);
    }
  }
}

TEST(Delegation, ChildStepLimitBecomesAParentError) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"looper"}),
               spec("looper", AgentLevel::atomic, {"list_dir"}, 4)});
  Script script;
  script.add("alpha", {delegate_to("looper", "spin"), finish_with("gave up")});
  script.add("looper", {tool_call("list_dir", nlohmann::json::object())});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  const auto out = engine.run("obj");
  EXPECT_EQ(out.status, OutcomeStatus::done);
  const auto log = rig.actions();
  ASSERT_EQ(log.size(), 6u);
  EXPECT_EQ(log[4].record.agent_id, "alpha");
  EXPECT_EQ(log[4].record.status, ActionStatus::error);
  EXPECT_EQ(log[4].record.result_summary.rfind("[child step_limit_reached]", 0), 0u);
  EXPECT_EQ(engine.task_nodes()[1].status, TaskStatus::failed);
}

TEST(Delegation, UpwardCallsAreRejected) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"worker"}), spec("worker", AgentLevel::atomic, {"alpha"})});
  Script script;
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  EXPECT_THROW(engine.delegate(*h.find("worker"), "alpha", "x"), HierarchyError);
  EXPECT_THROW(engine.delegate(*h.find("alpha"), "ghost", "x"), HierarchyError);
}

TEST(Delegation, NestedAgentsRunOneAtATime) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"d1", "d2"}), spec("d1", AgentLevel::domain, {"leaf"}),
               spec("d2", AgentLevel::domain, {"leaf"}), spec("leaf", AgentLevel::atomic, {"write_file"})});
  Script script;
  script.add("alpha", {delegate_to("d1", "first"), delegate_to("d2", "second"), finish_with("all")});
  script.add("d1", {delegate_to("leaf", "write"), finish_with("d done")});
  script.add("d2", {delegate_to("leaf", "write"), finish_with("d done")});
  // one queue serves both leaf invocations, in order
  script.add("leaf", {write("a.md", "1"), finish_with("leaf done"), write("b.md", "2"), finish_with("leaf done")});
  auto backend = script.backend();
  Engine engine(h, rig.tools, rig.ws, backend);
  const auto out = engine.run("obj");
  EXPECT_EQ(out.status, OutcomeStatus::done);
  EXPECT_EQ(engine.max_running_observed(), 1u);
  EXPECT_TRUE(rig.ws.contains("a.md"));
  EXPECT_TRUE(rig.ws.contains("b.md"));

  const auto& nodes = engine.task_nodes();
  ASSERT_EQ(nodes.size(), 5u);
  EXPECT_FALSE(nodes[0].parent_id);
  EXPECT_EQ(nodes[1].parent_id, nodes[0].node_id);
  EXPECT_EQ(nodes[2].parent_id, nodes[1].node_id);
  EXPECT_EQ(nodes[4].parent_id, nodes[3].node_id);
  for (const auto& node : nodes) EXPECT_EQ(node.status, TaskStatus::done);

  // steps are strictly increasing in log order: no interleaving
  std::uint64_t last = 0;
  for (const auto& e : rig.actions()) {
    EXPECT_GT(e.record.step, last);
    last = e.record.step;
  }
  EXPECT_EQ(last, rig.ws.step_counter());
}

TEST(Engine, ConsolidatesEveryMSteps) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"list_dir"}, 100)});
  Script script;
  script.add("alpha", {tool_call("list_dir", nlohmann::json::object())});
  auto backend = script.backend();
  EngineOptions o;
  o.consolidation.interval_steps = 25;
  Engine engine(h, rig.tools, rig.ws, backend, o);
  engine.run("obj");
  std::vector<std::uint64_t> steps;
  for (const auto& line : read_lines(rig.ws.transitions_log())) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("target") == "progress.md") steps.push_back(j.at("step"));
  }
  EXPECT_EQ(steps, (std::vector<std::uint64_t>{25, 50, 75, 100}));
  std::size_t consolidations = 0;
  for (const auto& e : rig.actions()) consolidations += e.kind == ActionLogEntry::Kind::consolidation;
  EXPECT_EQ(consolidations, 4u);
}

TEST(Engine, CompressedModeGrowsTheHistory) {
  Rig rig;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"list_dir"}, 6)});
  Script script;
  script.add("alpha", {tool_call("list_dir", nlohmann::json::object())});
  auto backend = script.backend();
  EngineOptions o;
  o.mode = ExecutionMode::compressed_context;
  Engine engine(h, rig.tools, rig.ws, backend, o);
  engine.run("obj");
  ASSERT_EQ(script.requests.size(), 6u);
  for (std::size_t i = 1; i < script.requests.size(); ++i) {
    EXPECT_EQ(script.requests[i].messages.size(), script.requests[i - 1].messages.size() + 2);
  }
  EXPECT_EQ(rig.ws.read("progress.md"), "");  // no consolidation in this mode
}

TEST(Engine, ResumeContinuesAfterAnInterrupt) {
  TempDir tmp;
  Hierarchy h({spec("alpha", AgentLevel::alpha, {"write_file"})});
  ToolRegistry tools = make_builtin_registry();
  std::vector<std::string> replies;
  for (int i = 0; i < 5; ++i) replies.push_back(write("f" + std::to_string(i), "x"));
  replies.push_back(finish_with("five files"));
  {
    auto ws = Workspace::init(tmp.path(), "t", false, WorkspaceOptions{false});
    Script script;
    script.add("alpha", replies);
    auto backend = script.backend();
    EngineOptions o;
    o.interrupt_at_step = 4;
    Engine engine(h, tools, ws, backend, o);
    EXPECT_THROW(engine.run("obj"), Interrupted);
    EXPECT_EQ(ws.step_counter(), 3u);
  }
  auto ws = Workspace::resume(tmp.path(), "t", WorkspaceOptions{false});
  Script script;
  // a deterministic model sees the same state and picks up at the fourth write
  script.add("alpha", std::vector<std::string>(replies.begin() + 3, replies.end()));
  auto backend = script.backend();
  Engine engine(h, tools, ws, backend);
  const auto out = engine.resume("obj");
  EXPECT_EQ(out.status, OutcomeStatus::done);
  EXPECT_EQ(out.steps_used, 6u);
  EXPECT_EQ(ws.files().size(), 7u);
  // the window was rebuilt: the first resumed context shows step 3
  ASSERT_FALSE(script.requests.empty());
  EXPECT_NE(script.requests[0].messages.back().content.find("- step 3 | write_file | ok"), std::string::npos);
  const auto log = ActionLog::read(ws.actions_log());
  EXPECT_EQ(log.front().invocation, log.back().invocation);

  Engine again(h, tools, ws, backend);
  const auto done = again.resume("obj");
  EXPECT_EQ(done.status, OutcomeStatus::done);
  EXPECT_EQ(done.result_summary, "five files");
}
