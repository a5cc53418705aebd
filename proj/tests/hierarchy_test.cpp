// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fcagent/directive.hpp"
#include "fcagent/hierarchy.hpp"
#include "fcagent/util.hpp"
#include "support.hpp"

using namespace fcagent;
using fcagent::testing::TempDir;

namespace {

const std::set<std::string> kTools = {"read_file", "write_file", "search"};

AgentSpec agent(std::string id, AgentLevel level, std::set<std::string> tools = {}) {
  AgentSpec s;
  s.agent_id = std::move(id);
  s.level = level;
  s.allowed_tools = std::move(tools);
  s.step_limit = default_step_limit(level);
  return s;
}

bool mentions(const ValidationReport& r, const std::string& needle) {
  return r.to_string().find(needle) != std::string::npos;
}

}  // namespace

TEST(Hierarchy, ValidThreeLevels) {
  const auto r = validate_hierarchy({agent("boss", AgentLevel::alpha, {"coder", "search"}),
                                     agent("coder", AgentLevel::domain, {"editor", "read_file"}),
                                     agent("editor", AgentLevel::atomic, {"write_file"})},
                                    kTools);
  EXPECT_TRUE(r.valid()) << r.to_string();
}

TEST(Hierarchy, UpwardAndSameLevelCallsAreViolations) {
  auto r = validate_hierarchy({agent("boss", AgentLevel::alpha, {"coder"}),
                               agent("coder", AgentLevel::domain, {"boss"})},
                              kTools);
  EXPECT_FALSE(r.valid());
  EXPECT_TRUE(mentions(r, "level-direction"));
  r = validate_hierarchy({agent("boss", AgentLevel::alpha, {"a"}), agent("a", AgentLevel::domain, {"b"}),
                          agent("b", AgentLevel::domain)},
                         kTools);
  EXPECT_TRUE(mentions(r, "level-direction"));
}

TEST(Hierarchy, OtherViolations) {
  EXPECT_TRUE(mentions(validate_hierarchy({agent("x", AgentLevel::domain)}, kTools), "exactly one alpha"));
  EXPECT_TRUE(mentions(
      validate_hierarchy({agent("x", AgentLevel::alpha), agent("y", AgentLevel::alpha)}, kTools),
      "exactly one alpha"));
  EXPECT_TRUE(mentions(
      validate_hierarchy({agent("x", AgentLevel::alpha), agent("x", AgentLevel::atomic)}, kTools), "duplicate"));
  EXPECT_TRUE(mentions(validate_hierarchy({agent("x", AgentLevel::alpha, {"teleport"})}, kTools), "teleport"));
  auto bad = agent("x", AgentLevel::alpha);
  bad.step_limit = 0;
  bad.context_budget = 100;
  const auto r = validate_hierarchy({bad}, kTools);
  EXPECT_TRUE(mentions(r, "step_limit"));
  EXPECT_TRUE(mentions(r, "context_budget"));
}

TEST(Hierarchy, Levels) {
  EXPECT_EQ(parse_agent_level("alpha"), AgentLevel::alpha);
  EXPECT_EQ(parse_agent_level("2"), AgentLevel::domain);
  EXPECT_THROW(parse_agent_level("boss"), HierarchyError);
  EXPECT_EQ(default_step_limit(AgentLevel::alpha), 200);
  EXPECT_EQ(default_step_limit(AgentLevel::domain), 100);
  EXPECT_EQ(default_step_limit(AgentLevel::atomic), 20);
}

TEST(Hierarchy, LoadsIni) {
  TempDir tmp;
  write_file_atomic(tmp / "h.ini",
                    "[lead]\nlevel = alpha\npreamble = You lead.\ntools = helper, search\n\n"
                    "[helper]\nlevel = atomic\ntools = write_file\nstep_limit = 7\ncontext_budget = 4096\n",
                    false);
  const auto h = Hierarchy::load(tmp / "h.ini");
  ASSERT_EQ(h.agents().size(), 2u);
  EXPECT_EQ(h.alpha().agent_id, "lead");
  EXPECT_EQ(h.alpha().role_preamble, "You lead.");
  EXPECT_EQ(h.alpha().allowed_tools, (std::set<std::string>{"helper", "search"}));
  EXPECT_EQ(h.alpha().step_limit, 200);
  EXPECT_EQ(h.find("helper")->step_limit, 7);
  EXPECT_EQ(h.find("helper")->context_budget, 4096u);
  EXPECT_TRUE(validate_hierarchy(h.agents(), kTools).valid());
}

TEST(Hierarchy, BadIni) {
  TempDir tmp;
  write_file_atomic(tmp / "a.ini", "[x]\nlevel = wizard\n", false);
  EXPECT_THROW(Hierarchy::load(tmp / "a.ini"), HierarchyError);
  write_file_atomic(tmp / "b.ini", "[x]\nlevel = alpha\nstep_limit = many\n", false);
  EXPECT_THROW(Hierarchy::load(tmp / "b.ini"), HierarchyError);
  EXPECT_THROW(Hierarchy::load(tmp / "missing.ini"), HierarchyError);
  EXPECT_THROW(Hierarchy().alpha(), HierarchyError);
}

TEST(Directive, ParsesFencedAndBareForms) {
  const auto t = parse_directive("thinking...\n```json\n{\"action\":\"tool\",\"tool\":\"read_file\",\"args\":{\"path\":\"a\"}}\n```");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->kind, Directive::Kind::tool);
  EXPECT_EQ(t->tool, "read_file");
  EXPECT_EQ(t->args.at("path"), "a");
  const auto f = parse_directive(R"({"action": "finish", "final_answer": "all done"})");
  ASSERT_TRUE(f);
  EXPECT_EQ(f->kind, Directive::Kind::finish);
  EXPECT_EQ(f->final_answer, "all done");
  const auto del = parse_directive(R"({"action": "delegate", "tool": "coder", "args": {"objective": "x"}})");
  ASSERT_TRUE(del);
  EXPECT_EQ(del->tool, "coder");
}

TEST(Directive, RejectsMalformedOutput) {
  for (const char* bad : {"", "just prose", "```json\n{not json}\n```", R"({"action": "dance"})",
                          R"({"action": "tool"})", R"({"action": "tool", "tool": "x", "args": [1]})",
                          R"({"action": "finish"})"}) {
    EXPECT_FALSE(parse_directive(bad)) << bad;
  }
}

TEST(Directive, RenderRoundTrips) {
  Directive d;
  d.kind = Directive::Kind::tool;
  d.tool = "write_file";
  d.args = {{"path", "p"}, {"content", "c\n```"}};
  const auto back = parse_directive(render_directive(d));
  ASSERT_TRUE(back);
  EXPECT_EQ(back->tool, d.tool);
  EXPECT_EQ(back->args, d.args);
}
