// SPDX-License-Identifier: Apache-2.0
#include "fcagent/hierarchy.hpp"

#include <map>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include "fcagent/context.hpp"

namespace fcagent {

std::string_view to_string(AgentLevel level) {
  switch (level) {
    case AgentLevel::atomic: return "atomic";
    case AgentLevel::domain: return "domain";
    case AgentLevel::alpha: return "alpha";
  }
  return "atomic";
}

AgentLevel parse_agent_level(std::string_view text) {
  if (text == "alpha" || text == "3") return AgentLevel::alpha;
  if (text == "domain" || text == "2") return AgentLevel::domain;
  if (text == "atomic" || text == "1") return AgentLevel::atomic;
  throw HierarchyError("unknown agent level '" + std::string(text) + "'");
}

int default_step_limit(AgentLevel level) {
  switch (level) {
    case AgentLevel::alpha: return 200;
    case AgentLevel::domain: return 100;
    case AgentLevel::atomic: return 20;
  }
  return 20;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& i : issues) out += fmt::format("{}: {}\n", i.agent_id.empty() ? "<hierarchy>" : i.agent_id, i.message);
  return out;
}

ValidationReport validate_hierarchy(const std::vector<AgentSpec>& specs, const std::set<std::string>& known_tools) {
  ValidationReport report;
  std::map<std::string, const AgentSpec*> by_id;
  std::size_t alphas = 0;
  for (const auto& s : specs) {
    if (s.agent_id.empty()) report.issues.push_back({"", "agent with empty id"});
    if (!by_id.emplace(s.agent_id, &s).second) report.issues.push_back({s.agent_id, "duplicate agent_id"});
    if (s.level == AgentLevel::alpha) ++alphas;
  }
  if (alphas != 1) report.issues.push_back({"", fmt::format("expected exactly one alpha agent, found {}", alphas)});

  for (const auto& s : specs) {
    if (s.step_limit < 1) report.issues.push_back({s.agent_id, "step_limit must be >= 1"});
    if (s.context_budget < kMinContextBudget) {
      report.issues.push_back(
          {s.agent_id, fmt::format("context_budget {} below minimum {}", s.context_budget, kMinContextBudget)});
    }
    for (const auto& tool : s.allowed_tools) {
      auto it = by_id.find(tool);
      if (it != by_id.end()) {
        if (static_cast<int>(it->second->level) >= static_cast<int>(s.level)) {
          report.issues.push_back({s.agent_id, fmt::format("level-direction violation: {} agent lists {} agent '{}'",
                                                           to_string(s.level), to_string(it->second->level), tool)});
        }
      } else if (!known_tools.count(tool)) {
        report.issues.push_back({s.agent_id, fmt::format("unknown tool reference '{}'", tool)});
      }
    }
  }
  return report;
}

Hierarchy Hierarchy::load(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw HierarchyError(std::string("cannot parse hierarchy file: ") + e.what());
  }
  std::vector<AgentSpec> agents;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw HierarchyError("hierarchy file: '" + section + "' is not a section");
    AgentSpec spec;
    spec.agent_id = section;
    spec.level = parse_agent_level(boost::algorithm::trim_copy(body.get<std::string>("level", "")));
    spec.role_preamble = body.get<std::string>("preamble", "");
    std::vector<std::string> tools;
    const auto list = body.get<std::string>("tools", "");
    boost::algorithm::split(tools, list, boost::is_any_of(","));
    for (auto& t : tools) {
      boost::algorithm::trim(t);
      if (!t.empty()) spec.allowed_tools.insert(t);
    }
    // get<T>(path, default) swallows bad values, so go through get_optional
    try {
      if (auto v = body.get_optional<int>("step_limit")) {
        spec.step_limit = *v;
      } else if (body.get_child_optional("step_limit")) {
        throw boost::property_tree::ptree_bad_data("step_limit", 0);
      } else {
        spec.step_limit = default_step_limit(spec.level);
      }
      if (auto v = body.get_optional<std::size_t>("context_budget")) {
        spec.context_budget = *v;
      } else if (body.get_child_optional("context_budget")) {
        throw boost::property_tree::ptree_bad_data("context_budget", 0);
      }
    } catch (const boost::property_tree::ptree_bad_data&) {
      throw HierarchyError("hierarchy file: bad number in section '" + section + "'");
    }
    agents.push_back(std::move(spec));
  }
  if (agents.empty()) throw HierarchyError("hierarchy file declares no agents");
  return Hierarchy(std::move(agents));
}

const AgentSpec* Hierarchy::find(std::string_view agent_id) const {
  for (const auto& a : agents_) {
    if (a.agent_id == agent_id) return &a;
  }
  return nullptr;
}

const AgentSpec& Hierarchy::alpha() const {
  const AgentSpec* found = nullptr;
  for (const auto& a : agents_) {
    if (a.level != AgentLevel::alpha) continue;
    if (found) throw HierarchyError("more than one alpha agent");
    found = &a;
  }
  if (!found) throw HierarchyError("no alpha agent");
  return *found;
}

}  // namespace fcagent
