// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcagent/backend.hpp"
#include "fcagent/engine.hpp"
#include "fcagent/eval.hpp"

namespace fcagent::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendConfig {
  std::string kind = "mock";  // mock | litreview | http
  // mock
  std::filesystem::path mock_policy;
  std::size_t context_limit = 32768;
  OverflowPolicy on_overflow = OverflowPolicy::error;
  std::uint64_t seed = 42;
  // http
  std::string endpoint;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 60;
  int attempts = 3;
};

// One INI file with [task], [context], [backend] and [eval] sections.
// Relative paths are resolved against the config file's directory.
struct RunConfig {
  std::filesystem::path workspace_root = "workspaces";
  std::string task_id;
  std::string objective;
  std::filesystem::path hierarchy_file;
  std::filesystem::path corpus_dir;  // optional, for answer_from_document and search
  ExecutionMode mode = ExecutionMode::file_centric;

  std::size_t window = ActionWindow::kDefaultCapacity;
  std::uint64_t consolidation_interval = 25;
  int max_consecutive_errors = 5;
  bool verbose_contexts = false;
  bool sync = true;

  BackendConfig backend;

  LitReviewConfig eval;
  std::filesystem::path report_dir = "reports";

  static RunConfig load(const std::filesystem::path& path);
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_resume(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, bool ablation, std::ostream& out, std::ostream& err);
int cmd_inspect(const std::filesystem::path& root, const std::string& task_id, const std::string& what,
                std::optional<std::uint64_t> step, std::ostream& out, std::ostream& err);

// Full command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fcagent::cli
