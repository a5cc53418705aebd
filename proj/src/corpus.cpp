// SPDX-License-Identifier: Apache-2.0
#include "fcagent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "fcagent/util.hpp"

namespace fcagent {

nlohmann::json CorpusItem::meta_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["title"] = title;
  j["metadata"] = metadata;
  return nlohmann::json(j);
}

Corpus::Corpus(std::vector<CorpusItem> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].id, i).second) {
      throw std::invalid_argument("duplicate corpus id: " + items_[i].id);
    }
  }
}

Corpus Corpus::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("corpus directory not found: " + dir.string());
  }
  std::vector<CorpusItem> items;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto meta = entry.path() / "meta.json";
    const auto body = entry.path() / "body.txt";
    if (!entry.is_directory() || !std::filesystem::exists(meta) || !std::filesystem::exists(body)) continue;
    const auto j = nlohmann::json::parse(read_file(meta));
    CorpusItem item;
    item.id = j.at("id").get<std::string>();
    item.title = j.value("title", "");
    item.metadata = j.value("metadata", nlohmann::json::object());
    item.body = read_file(body);
    items.push_back(std::move(item));
  }
  return Corpus(std::move(items));
}

const CorpusItem* Corpus::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

void write_corpus_item(const std::filesystem::path& corpus_dir, const CorpusItem& item) {
  const auto dir = corpus_dir / item.id;
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["id"] = item.id;
  meta["title"] = item.title;
  meta["metadata"] = item.metadata;
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n", false);
  write_file_atomic(dir / "body.txt", item.body, false);
}

std::vector<std::string> keyword_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::size_t count_hits(const std::vector<std::string>& terms, const std::vector<std::string>& tokens) {
  std::unordered_map<std::string_view, std::size_t> freq;
  for (const auto& t : tokens) ++freq[t];
  std::size_t hits = 0;
  for (const auto& term : terms) {
    auto it = freq.find(term);
    if (it != freq.end()) hits += it->second;
  }
  return hits;
}

std::string make_snippet(const CorpusItem& item, const std::vector<std::string>& terms) {
  constexpr std::size_t kSnippet = 48;
  std::string lower(item.body.size(), '\0');
  std::transform(item.body.begin(), item.body.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::size_t at = std::string::npos;
  for (const auto& term : terms) at = std::min(at, lower.find(term));
  if (at == std::string::npos) at = 0;
  std::string s = item.body.substr(at, kSnippet);
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::vector<SearchHit> search_corpus(const Corpus& corpus, std::string_view query, std::size_t top_n) {
  auto terms = keyword_tokens(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  std::vector<SearchHit> hits;
  if (terms.empty()) return hits;
  for (const auto& item : corpus.items()) {
    SearchHit h{item.id, item.title, {}, count_hits(terms, keyword_tokens(item.title)),
                count_hits(terms, keyword_tokens(item.body))};
    if (h.title_hits + h.body_hits == 0) continue;
    h.snippet = make_snippet(item, terms);
    hits.push_back(std::move(h));
  }
  std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.title_hits != b.title_hits) return a.title_hits > b.title_hits;
    if (a.body_hits != b.body_hits) return a.body_hits > b.body_hits;
    return a.id < b.id;
  });
  if (hits.size() > top_n) hits.resize(top_n);
  return hits;
}

}  // namespace fcagent
