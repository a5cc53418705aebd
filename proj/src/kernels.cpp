// SPDX-License-Identifier: Apache-2.0
#include "fcagent/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace fcagent::kernels {

void for_each_serial(std::size_t n, const std::function<void(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

void for_each_parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

namespace {

void check_grid(const std::vector<JudgeIndex>& index, const SummaryGrid& summaries) {
  for (const auto& row : summaries) {
    if (row.size() != index.size()) throw std::invalid_argument("summary grid row does not match item count");
  }
}

}  // namespace

JudgmentGrid judge_serial(const std::vector<JudgeIndex>& index, const SummaryGrid& summaries, std::size_t min_chars) {
  check_grid(index, summaries);
  JudgmentGrid out(summaries.size());
  for (std::size_t r = 0; r < summaries.size(); ++r) {
    out[r].reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) out[r].push_back(judge_grounded(summaries[r][i], index[i], min_chars));
  }
  return out;
}

JudgmentGrid judge_parallel(const std::vector<JudgeIndex>& index, const SummaryGrid& summaries,
                            std::size_t min_chars) {
  check_grid(index, summaries);
  const std::size_t items = index.size();
  JudgmentGrid out(summaries.size(), std::vector<GroundednessJudgment>(items));
  // flatten so short runs still spread across threads
  const auto total = static_cast<std::int64_t>(summaries.size() * items);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t k = 0; k < total; ++k) {
    const auto r = static_cast<std::size_t>(k) / items;
    const auto i = static_cast<std::size_t>(k) % items;
    out[r][i] = judge_grounded(summaries[r][i], index[i], min_chars);
  }
  return out;
}

namespace {

constexpr std::uint64_t kBase = 1099511628211ULL;

std::uint64_t hash_window(std::string_view s) {
  std::uint64_t h = 0;
  for (unsigned char c : s) h = h * kBase + c;
  return h;
}

}  // namespace

ContainmentIndex::ContainmentIndex(std::vector<std::string> documents, std::size_t window)
    : documents_(std::move(documents)), window_(window) {
  if (window_ == 0) throw std::invalid_argument("containment window must be positive");
  for (std::size_t i = 1; i < window_; ++i) top_power_ *= kBase;
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    const std::string& doc = documents_[d];
    if (doc.size() < window_) continue;
    std::uint64_t h = hash_window(std::string_view(doc).substr(0, window_));
    for (std::size_t off = 0;; ++off) {
      entries_.push_back({h, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(off)});
      if (off + window_ >= doc.size()) break;
      h = (h - static_cast<unsigned char>(doc[off]) * top_power_) * kBase + static_cast<unsigned char>(doc[off + window_]);
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.hash != b.hash ? a.hash < b.hash : (a.document != b.document ? a.document < b.document : a.offset < b.offset);
  });
  filter_.reserve(entries_.size());
  for (const auto& e : entries_) filter_.insert(e.hash);
}

bool ContainmentIndex::find_first(std::string_view text, Hit& hit) const {
  if (text.size() < window_ || entries_.empty()) return false;
  std::uint64_t h = hash_window(text.substr(0, window_));
  for (std::size_t off = 0;; ++off) {
    if (filter_.count(h)) {
      auto lo = std::lower_bound(entries_.begin(), entries_.end(), h,
                                 [](const Entry& e, std::uint64_t v) { return e.hash < v; });
      for (; lo != entries_.end() && lo->hash == h; ++lo) {
        // hashes collide; compare the bytes
        if (std::string_view(documents_[lo->document]).substr(lo->offset, window_) == text.substr(off, window_)) {
          hit.offset = off;
          hit.document = lo->document;
          hit.doc_offset = lo->offset;
          return true;
        }
      }
    }
    if (off + window_ >= text.size()) return false;
    h = (h - static_cast<unsigned char>(text[off]) * top_power_) * kBase + static_cast<unsigned char>(text[off + window_]);
  }
}

std::vector<ContainmentIndex::Hit> scan_serial(const ContainmentIndex& index, const std::vector<std::string>& texts) {
  std::vector<ContainmentIndex::Hit> out;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    ContainmentIndex::Hit hit;
    if (index.find_first(texts[t], hit)) {
      hit.text = t;
      out.push_back(hit);
    }
  }
  return out;
}

std::vector<ContainmentIndex::Hit> scan_parallel(const ContainmentIndex& index,
                                                 const std::vector<std::string>& texts) {
  std::vector<ContainmentIndex::Hit> per_text(texts.size());
  std::vector<char> found(texts.size(), 0);
  const auto n = static_cast<std::int64_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (index.find_first(texts[i], per_text[i])) {
      per_text[i].text = i;
      found[i] = 1;
    }
  }
  std::vector<ContainmentIndex::Hit> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (found[i]) out.push_back(per_text[i]);
  }
  return out;
}

bool contains_shared_window_naive(std::string_view text, const std::vector<std::string>& documents,
                                  std::size_t window) {
  if (text.size() < window) return false;
  for (std::size_t off = 0; off + window <= text.size(); ++off) {
    const auto piece = text.substr(off, window);
    for (const auto& doc : documents) {
      if (doc.find(piece) != std::string::npos) return true;
    }
  }
  return false;
}

}  // namespace fcagent::kernels
