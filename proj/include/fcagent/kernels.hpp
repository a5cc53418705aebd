// SPDX-License-Identifier: Apache-2.0
#pragma once

// OpenMP kernels used by eval, each next to the serial version it must agree
// with. The serial versions are what the tests treat as ground truth.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fcagent/eval.hpp"

namespace fcagent::kernels {

// fn must not throw; it is called once per index.
void for_each_serial(std::size_t n, const std::function<void(std::size_t)>& fn);
void for_each_parallel(std::size_t n, const std::function<void(std::size_t)>& fn);

// summaries[run][item]; an empty string stands for a missing review.
using SummaryGrid = std::vector<std::vector<std::string>>;
using JudgmentGrid = std::vector<std::vector<GroundednessJudgment>>;

JudgmentGrid judge_serial(const std::vector<JudgeIndex>& index, const SummaryGrid& summaries, std::size_t min_chars);
JudgmentGrid judge_parallel(const std::vector<JudgeIndex>& index, const SummaryGrid& summaries,
                            std::size_t min_chars);

// Every length-`window` substring of a document set, hashed for lookups.
class ContainmentIndex {
 public:
  static constexpr std::size_t kDefaultWindow = 64;

  explicit ContainmentIndex(std::vector<std::string> documents, std::size_t window = kDefaultWindow);

  struct Hit {
    std::size_t text = 0;         // index of the scanned text
    std::size_t offset = 0;       // position in that text
    std::size_t document = 0;
    std::size_t doc_offset = 0;
  };

  std::size_t window() const { return window_; }
  // Leftmost window of `text` that also occurs in some document.
  bool find_first(std::string_view text, Hit& hit) const;

 private:
  struct Entry {
    std::uint64_t hash;
    std::uint32_t document;
    std::uint32_t offset;
  };

  std::vector<std::string> documents_;
  std::size_t window_;
  std::uint64_t top_power_ = 1;  // base^(window-1)
  std::unordered_set<std::uint64_t> filter_;
  std::vector<Entry> entries_;  // sorted by hash
};

// First hit per text that has one, ordered by text index.
std::vector<ContainmentIndex::Hit> scan_serial(const ContainmentIndex& index, const std::vector<std::string>& texts);
std::vector<ContainmentIndex::Hit> scan_parallel(const ContainmentIndex& index,
                                                 const std::vector<std::string>& texts);

// Brute force, for checking the hashed scan on small inputs.
bool contains_shared_window_naive(std::string_view text, const std::vector<std::string>& documents,
                                  std::size_t window);

}  // namespace fcagent::kernels
