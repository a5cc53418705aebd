// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fcagent {

// One document of a corpus directory: `<id>/meta.json` holds
// {id, title, metadata}, `<id>/body.txt` the plain (or pre-extracted) text.
struct CorpusItem {
  std::string id;
  std::string title;
  nlohmann::json metadata = nlohmann::json::object();
  std::string body;

  nlohmann::json meta_json() const;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<CorpusItem> items);

  // Loads every subdirectory that has both meta.json and body.txt.
  static Corpus load(const std::filesystem::path& dir);

  const CorpusItem* find(std::string_view id) const;
  const std::vector<CorpusItem>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<CorpusItem> items_;  // sorted by id
  std::map<std::string, std::size_t, std::less<>> index_;
};

void write_corpus_item(const std::filesystem::path& corpus_dir, const CorpusItem& item);

struct SearchHit {
  std::string id;
  std::string title;
  std::string snippet;  // always shorter than 64 characters
  std::size_t title_hits = 0;
  std::size_t body_hits = 0;
};

// Keyword ranking: title term hits, then body term hits, then id ascending.
// Items with no hits are left out.
std::vector<SearchHit> search_corpus(const Corpus& corpus, std::string_view query, std::size_t top_n);

// Lowercased alphanumeric tokens.
std::vector<std::string> keyword_tokens(std::string_view text);

}  // namespace fcagent
