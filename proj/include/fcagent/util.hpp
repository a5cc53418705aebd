// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fcagent {

namespace fs = std::filesystem;

// Lowercase hex SHA-256 of `data` (64 characters).
std::string sha256_hex(std::string_view data);

// Cuts `text` to at most `cap` characters, ending in "..." when cut.
std::string truncate_text(std::string_view text, std::size_t cap);

std::string read_file(const fs::path& path);

// Writes via a sibling temp file and rename so readers never see a torn file.
void write_file_atomic(const fs::path& path, std::string_view data, bool sync);

// Appends one line and flushes it to the OS (and to disk when `sync`).
void append_line(const fs::path& path, std::string_view line, bool sync);

std::vector<std::string> read_lines(const fs::path& path);

// Microseconds since epoch, never smaller than the previous call's value.
std::int64_t monotonic_timestamp_us();

std::string trim(std::string_view s);

}  // namespace fcagent
