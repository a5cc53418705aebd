// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

namespace fcagent::testing {

namespace fs = std::filesystem;

// A scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "fcagent-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::string fenced(const nlohmann::json& j) { return "```json\n" + j.dump() + "\n```"; }

inline std::string tool_call(const std::string& tool, const nlohmann::json& args) {
  return fenced({{"action", "tool"}, {"tool", tool}, {"args", args}});
}

inline std::string finish_with(const std::string& answer) {
  return fenced({{"action", "finish"}, {"final_answer", answer}});
}

}  // namespace fcagent::testing
