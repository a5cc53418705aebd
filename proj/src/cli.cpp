// SPDX-License-Identifier: Apache-2.0
#include "fcagent/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "fcagent/corpus.hpp"
#include "fcagent/hierarchy.hpp"
#include "fcagent/http_backend.hpp"
#include "fcagent/litreview_model.hpp"
#include "fcagent/logs.hpp"
#include "fcagent/mock_backend.hpp"
#include "fcagent/tools.hpp"
#include "fcagent/util.hpp"
#include "fcagent/workspace.hpp"

namespace fcagent::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError(fmt::format("config: bad value for '{}'", key));
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  const fs::path p(value);
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

OverflowPolicy overflow_from(const std::string& text) {
  if (text == "error") return OverflowPolicy::error;
  if (text == "truncate_head") return OverflowPolicy::truncate_head;
  throw ConfigError("config: on_overflow must be 'error' or 'truncate_head'");
}

ExecutionMode mode_from(const std::string& text) {
  try {
    return parse_execution_mode(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

RunConfig RunConfig::load(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  RunConfig c;

  c.workspace_root = resolve(base, get<std::string>(tree, "task.workspace_root", "workspaces"));
  c.task_id = get<std::string>(tree, "task.task_id", "");
  c.objective = get<std::string>(tree, "task.objective", "");
  c.hierarchy_file = resolve(base, get<std::string>(tree, "task.hierarchy", ""));
  c.corpus_dir = resolve(base, get<std::string>(tree, "task.corpus", ""));
  c.mode = mode_from(get<std::string>(tree, "task.mode", "file_centric"));

  const auto window = get<long>(tree, "context.window", static_cast<long>(c.window));
  if (window < 1) throw ConfigError("config: context.window must be >= 1");
  c.window = static_cast<std::size_t>(window);
  c.consolidation_interval = get<std::uint64_t>(tree, "context.consolidation_interval", c.consolidation_interval);
  c.max_consecutive_errors = get<int>(tree, "context.max_consecutive_errors", c.max_consecutive_errors);
  if (c.max_consecutive_errors < 1) throw ConfigError("config: context.max_consecutive_errors must be >= 1");
  c.verbose_contexts = get<bool>(tree, "context.verbose_contexts", false);
  c.sync = get<bool>(tree, "context.sync", true);

  auto& b = c.backend;
  b.kind = get<std::string>(tree, "backend.kind", "mock");
  if (b.kind != "mock" && b.kind != "litreview" && b.kind != "http") {
    throw ConfigError("config: backend.kind must be mock, litreview or http");
  }
  b.mock_policy = resolve(base, get<std::string>(tree, "backend.mock_policy", ""));
  b.context_limit = get<std::size_t>(tree, "backend.context_limit", 0);
  b.on_overflow = overflow_from(get<std::string>(tree, "backend.on_overflow", "error"));
  b.seed = get<std::uint64_t>(tree, "backend.seed", 42);
  b.endpoint = get<std::string>(tree, "backend.endpoint", "");
  b.model = get<std::string>(tree, "backend.model", "");
  b.api_key_env = get<std::string>(tree, "backend.api_key_env", "OPENAI_API_KEY");
  b.timeout_seconds = get<int>(tree, "backend.timeout_seconds", 60);
  b.attempts = get<int>(tree, "backend.attempts", 3);
  if (b.attempts < 1) throw ConfigError("config: backend.attempts must be >= 1");

  auto& e = c.eval;
  e.n_items = get<std::size_t>(tree, "eval.n_items", e.n_items);
  e.runs = get<std::size_t>(tree, "eval.runs", e.runs);
  e.seed = get<std::uint64_t>(tree, "eval.seed", e.seed);
  e.per_item_summary_min = get<std::size_t>(tree, "eval.per_item_summary_min", e.per_item_summary_min);
  e.context_budget = get<std::size_t>(tree, "eval.context_budget", e.context_budget);
  e.context_limit = get<std::size_t>(tree, "eval.context_limit", e.context_limit);
  e.on_overflow = overflow_from(get<std::string>(tree, "eval.on_overflow", "truncate_head"));
  e.step_limit = get<int>(tree, "eval.step_limit", e.step_limit);
  e.window_capacity = c.window;
  e.consolidation_interval = c.consolidation_interval;
  e.mode = mode_from(get<std::string>(tree, "eval.mode", "file_centric"));
  e.workspace_root = resolve(base, get<std::string>(tree, "eval.workspace_root", "eval-workspaces"));
  e.corpus_dir = resolve(base, get<std::string>(tree, "eval.corpus_dir", ""));
  e.parallel = get<bool>(tree, "eval.parallel", true);
  e.verbose_contexts = get<bool>(tree, "eval.verbose_contexts", false);
  e.sync = get<bool>(tree, "eval.sync", false);
  e.model = get<std::string>(tree, "eval.model", e.model);
  c.report_dir = resolve(base, get<std::string>(tree, "eval.report_dir", "reports"));
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("config: eval: ") + ex.what());
  }
  return c;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == "litreview") {
    return make_litreview_backend(cfg.context_limit ? cfg.context_limit : 16384, cfg.on_overflow, cfg.seed);
  }
  if (cfg.kind == "http") {
    HttpBackendConfig h;
    if (!cfg.endpoint.empty()) h.endpoint = cfg.endpoint;
    if (!cfg.model.empty()) h.model = cfg.model;
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) h.api_key = key;
    h.timeout_seconds = cfg.timeout_seconds;
    h.attempts = cfg.attempts;
    return std::make_unique<HttpBackend>(h);
  }
  if (cfg.mock_policy.empty()) throw ConfigError("config: backend.mock_policy is required for the mock backend");
  MockPolicy policy;
  try {
    policy = MockPolicy::load(cfg.mock_policy);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: mock policy: ") + e.what());
  }
  if (cfg.context_limit) policy.context_limit = cfg.context_limit;
  return std::make_unique<MockBackend>(std::move(policy));
}

namespace {

struct Prepared {
  Hierarchy hierarchy;
  std::string hierarchy_digest;
  std::optional<Corpus> corpus;
  std::unique_ptr<Backend> backend;
  ToolRegistry tools;
};

// Everything that can be a configuration error, checked before any
// workspace exists.
Prepared prepare(const RunConfig& cfg) {
  if (!Workspace::valid_task_id(cfg.task_id)) throw ConfigError("config: task.task_id is missing or invalid");
  if (cfg.hierarchy_file.empty()) throw ConfigError("config: task.hierarchy is required");
  Prepared p;
  p.tools = make_builtin_registry();
  try {
    p.hierarchy = Hierarchy::load(cfg.hierarchy_file);
    p.hierarchy_digest = sha256_hex(read_file(cfg.hierarchy_file));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("hierarchy: ") + e.what());
  }
  const auto names = p.tools.names();
  const auto report = validate_hierarchy(p.hierarchy.agents(), {names.begin(), names.end()});
  if (!report.valid()) throw ConfigError("invalid hierarchy:\n" + report.to_string());
  if (!cfg.corpus_dir.empty()) {
    try {
      p.corpus = Corpus::load(cfg.corpus_dir);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("corpus: ") + e.what());
    }
  }
  p.backend = make_backend(cfg.backend);
  return p;
}

EngineOptions engine_options(const RunConfig& cfg) {
  EngineOptions o;
  o.window_capacity = cfg.window;
  o.consolidation.interval_steps = cfg.consolidation_interval;
  o.mode = cfg.mode;
  o.verbose_contexts = cfg.verbose_contexts;
  o.max_consecutive_errors = cfg.max_consecutive_errors;
  return o;
}

void print_outcome(const AgentOutcome& o, std::ostream& out) {
  out << "outcome: " << to_string(o.status) << "\n"
      << "steps_used: " << o.steps_used << "\n"
      << "summary: " << o.result_summary << "\n";
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Prepared p;
  try {
    p = prepare(cfg);
    if (cfg.objective.empty()) throw ConfigError("config: task.objective is required");
    if (Workspace::exists(cfg.workspace_root, cfg.task_id)) {
      throw ConfigError(fmt::format("task '{}' already exists; use --resume", cfg.task_id));
    }
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }

  std::optional<Workspace> ws;
  try {
    ws.emplace(Workspace::init(cfg.workspace_root, cfg.task_id, false, WorkspaceOptions{cfg.sync}));
    nlohmann::ordered_json meta;
    meta["task_id"] = cfg.task_id;
    meta["objective"] = cfg.objective;
    meta["mode"] = to_string(cfg.mode);
    meta["hierarchy_file"] = cfg.hierarchy_file.string();
    meta["hierarchy_digest"] = p.hierarchy_digest;
    meta["backend"] = p.backend->name();
    meta["window"] = cfg.window;
    meta["consolidation_interval"] = cfg.consolidation_interval;
    meta["temperature"] = 0;
    write_file_atomic(ws->run_metadata(), meta.dump(2) + "\n", cfg.sync);

    Engine engine(p.hierarchy, p.tools, *ws, *p.backend, engine_options(cfg), p.corpus ? &*p.corpus : nullptr);
    const auto outcome = engine.run(cfg.objective);
    print_outcome(outcome, out);
    return outcome.status == OutcomeStatus::done ? kSuccess : kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

namespace {

bool finished_already(const fs::path& actions, std::uint64_t committed, AgentOutcome& outcome) {
  std::optional<std::uint64_t> root;
  const ActionLogEntry* last = nullptr;
  std::uint64_t steps = 0;
  const auto entries = ActionLog::read(actions);
  for (const auto& e : entries) {
    if (e.parent_invocation != 0 || e.kind != ActionLogEntry::Kind::action || e.record.step > committed) continue;
    if (!root) root = e.invocation;
    if (e.invocation != *root) continue;
    last = &e;
    ++steps;
  }
  if (!last || last->record.tool_name != "finish" || last->record.status != ActionStatus::ok) return false;
  outcome = {OutcomeStatus::done, last->record.result_summary, steps};
  return true;
}

}  // namespace

int cmd_resume(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Prepared p;
  try {
    p = prepare(cfg);
    if (!Workspace::exists(cfg.workspace_root, cfg.task_id)) {
      throw ConfigError(fmt::format("no task '{}' under {}", cfg.task_id, cfg.workspace_root.string()));
    }
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }

  try {
    std::optional<Workspace> ws;
    ws.emplace(Workspace::resume(cfg.workspace_root, cfg.task_id, WorkspaceOptions{cfg.sync}));
    for (const auto& w : ws->warnings()) err << "warning: " << w << "\n";

    std::string objective = cfg.objective;
    if (fs::exists(ws->run_metadata())) {
      const auto meta = nlohmann::json::parse(read_file(ws->run_metadata()), nullptr, false);
      if (meta.is_object()) {
        objective = meta.value("objective", objective);
        const auto digest = meta.value("hierarchy_digest", std::string{});
        if (!digest.empty() && digest != p.hierarchy_digest) {
          err << "warning: hierarchy file changed since the task started; continuing with the current one\n";
        }
      }
    }
    if (objective.empty()) throw std::runtime_error("no objective in run metadata or config");

    AgentOutcome outcome;
    if (finished_already(ws->actions_log(), ws->step_counter(), outcome)) {
      out << "already done\n";
      print_outcome(outcome, out);
      return kSuccess;
    }
    Engine engine(p.hierarchy, p.tools, *ws, *p.backend, engine_options(cfg), p.corpus ? &*p.corpus : nullptr);
    outcome = engine.resume(objective);
    print_outcome(outcome, out);
    return outcome.status == OutcomeStatus::done ? kSuccess : kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "resume failed: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

int cmd_eval(const RunConfig& cfg, bool ablation, std::ostream& out, std::ostream& err) {
  LitReviewConfig ec = cfg.eval;
  if (ablation && ec.runs < 3) {
    err << "an ablation needs eval.runs >= 3\n";
    return kUsageError;
  }
  BackendFactory factory;
  if (cfg.backend.kind == "litreview" || cfg.backend.kind == "mock") {
    // the scripted mock has no notion of the protocol; eval always uses the
    // simulated reviewer unless a real endpoint is configured
    factory = default_backend_factory(ec);
  } else {
    factory = [b = cfg.backend](std::size_t) { return make_backend(b); };
  }
  try {
    const auto hierarchy = litreview_hierarchy(ec);
    fs::create_directories(cfg.report_dir);
    std::vector<CoverageReport> reports;
    nlohmann::json doc;
    if (ablation) {
      const auto pair = run_ablation_pair(ec, hierarchy, factory);
      reports = {pair.file_centric, pair.compressed};
      doc = pair.to_json();
    } else {
      auto report = run_litreview(ec, hierarchy, factory);
      doc = report.to_json();
      reports = {std::move(report)};
    }
    if (ec.verbose_contexts) {
      const auto corpus_dir = ec.corpus_dir.empty() ? ec.workspace_root / "corpus" : ec.corpus_dir;
      std::vector<fs::path> logs;
      for (const auto& r : reports) {
        for (const auto& run : r.runs) logs.push_back(ec.workspace_root / run.task_id / "logs" / "contexts.jsonl");
      }
      const auto scan = scan_context_logs(Corpus::load(corpus_dir), logs, ec.parallel);
      doc["containment"] = {{"scanned", scan.scanned}, {"violations", scan.violations}};
    }
    const std::string stem = ablation ? "ablation" : fmt::format("coverage-{}", to_string(ec.mode));
    const auto table = render_table(reports);
    write_file_atomic(cfg.report_dir / (stem + ".json"), doc.dump(2) + "\n", false);
    write_file_atomic(cfg.report_dir / (stem + ".md"), table, false);
    out << table;
    if (ablation) {
      out << fmt::format("gap (avg): {:.1f}\nvariance: file_centric {:.2f}, compressed_context {:.2f}\n",
                         doc["gap"].get<double>(), reports[0].variance, reports[1].variance);
    }
    out << "report: " << (cfg.report_dir / (stem + ".json")).string() << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    err << "eval failed: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

int cmd_inspect(const fs::path& root, const std::string& task_id, const std::string& what,
                std::optional<std::uint64_t> step, std::ostream& out, std::ostream& err) {
  if (what != "files" && what != "actions" && what != "contexts") {
    err << "--what must be files, actions or contexts\n";
    return kUsageError;
  }
  if (!Workspace::valid_task_id(task_id) || !Workspace::exists(root, task_id)) {
    err << fmt::format("no task '{}' under {}\n", task_id, root.string());
    return kUsageError;
  }
  try {
    if (what == "files") {
      const auto ws = Workspace::open_read_only(root, task_id);
      out << fmt::format("workspace step {}\n", ws.step_counter());
      for (const auto& [path, f] : ws.files()) out << fmt::format("{} {}B @{}\n", path, f.byte_size, f.modified_step);
      return kSuccess;
    }
    const fs::path logs = root / task_id / "logs";
    if (what == "actions") {
      auto entries = ActionLog::read(logs / "actions.jsonl");
      std::stable_sort(entries.begin(), entries.end(),
                       [](const auto& a, const auto& b) { return a.record.step < b.record.step; });
      for (const auto& e : entries) {
        if (step && e.record.step != *step) continue;
        const auto& r = e.record;
        out << fmt::format("step {} | {} | {}{} | {} | args: {} | result: {}\n", r.step, r.agent_id, r.tool_name,
                           e.kind == ActionLogEntry::Kind::consolidation ? " (consolidation)" : "",
                           to_string(r.status), truncate_text(r.args_summary, 120),
                           truncate_text(r.result_summary, 120));
      }
      return kSuccess;
    }
    const auto entries = ContextLog::read(logs / "contexts.jsonl");
    if (!step) {
      for (const auto& e : entries) {
        out << fmt::format("step {} | {} | {} | attempt {} | {} chars | sha256 {}{}\n", e.step, e.agent_id, e.session,
                           e.attempt, e.size, e.digest, e.text ? "" : " (text not logged)");
      }
      return kSuccess;
    }
    std::vector<const ContextLogEntry*> at;
    for (const auto& e : entries) {
      if (e.step == *step) at.push_back(&e);
    }
    if (at.empty()) {
      err << fmt::format("no context logged at step {}\n", *step);
      return kRuntimeFailure;
    }
    for (const auto* e : at) {
      if (at.size() > 1 || !e->text) {
        out << fmt::format("--- {} {} attempt {} sha256 {}\n", e->agent_id, e->session, e->attempt, e->digest);
      }
      if (e->text) {
        out << *e->text;
      } else {
        out << "(text not logged; rerun with --verbose-contexts)\n";
      }
    }
    return kSuccess;
  } catch (const std::exception& e) {
    err << "inspect failed: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"File-centric agent runtime"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  bool verbose = false;
  auto* run_cmd = app.add_subcommand("run", "run a task (or continue one with --resume)");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_flag("--resume", resume, "continue an interrupted task");
  run_cmd->add_flag("--verbose-contexts", verbose, "store full context text in logs/contexts.jsonl");

  bool ablation = false;
  bool serial = false;
  auto* eval_cmd = app.add_subcommand("eval", "literature-review coverage evaluation");
  eval_cmd->add_option("--config", config_path, "config file")->required();
  eval_cmd->add_flag("--ablation", ablation, "run both execution modes on identical seeds");
  eval_cmd->add_flag("--serial", serial, "run repetitions one after another");
  eval_cmd->add_flag("--verbose-contexts", verbose, "store full context text and scan it for corpus text");

  std::string task_id;
  std::string what = "files";
  std::string root;
  std::optional<std::uint64_t> step;
  auto* inspect_cmd = app.add_subcommand("inspect", "read-only view of a task");
  inspect_cmd->add_option("task_id", task_id, "task id")->required();
  inspect_cmd->add_option("--what", what, "files, actions or contexts");
  inspect_cmd->add_option("--step", step, "restrict to one step");
  inspect_cmd->add_option("--root", root, "workspace root");
  inspect_cmd->add_option("--config", config_path, "config file (for its workspace root)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  if (inspect_cmd->parsed()) {
    fs::path ws_root = root.empty() ? fs::path(".") : fs::path(root);
    if (root.empty() && !config_path.empty()) {
      try {
        ws_root = RunConfig::load(config_path).workspace_root;
      } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kUsageError;
      }
    }
    return cmd_inspect(ws_root, task_id, what, step, out, err);
  }

  RunConfig cfg;
  try {
    cfg = RunConfig::load(config_path);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  if (run_cmd->parsed()) {
    if (verbose) cfg.verbose_contexts = true;
    return resume ? cmd_resume(cfg, out, err) : cmd_run(cfg, out, err);
  }
  if (verbose) cfg.eval.verbose_contexts = true;
  if (serial) cfg.eval.parallel = false;
  return cmd_eval(cfg, ablation, out, err);
}

}  // namespace fcagent::cli
