// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "fcagent/eval.hpp"
#include "fcagent/kernels.hpp"

using namespace fcagent;
using namespace fcagent::kernels;

namespace {

std::string random_text(std::mt19937& rng, std::size_t n, const std::string& alphabet = "abcd ") {
  std::string s(n, ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

}  // namespace

TEST(ForEach, SerialAndParallelVisitEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  for_each_parallel(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  std::vector<std::size_t> order;
  for_each_serial(5, [&](std::size_t i) { order.push_back(i); });
  EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Judge, SerialAndParallelAgree) {
  const auto planted = synthesize_corpus(20, 9);
  std::vector<JudgeIndex> index;
  for (const auto& p : planted) index.emplace_back(p.item);
  std::mt19937 rng(4);
  SummaryGrid grid(7, std::vector<std::string>(index.size()));
  for (auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      switch (rng() % 4) {
        case 0: break;  // missing
        case 1: row[i] = planted[i].facts[rng() % planted[i].facts.size()]; break;
        case 2: row[i] = planted[(i + 1) % planted.size()].facts[0]; break;  // wrong item
        default: row[i] = planted[i].item.title;
      }
    }
  }
  const auto a = judge_serial(index, grid, 1);
  const auto b = judge_parallel(index, grid, 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t i = 0; i < a[r].size(); ++i) {
      EXPECT_EQ(a[r][i].item_id, b[r][i].item_id);
      EXPECT_EQ(a[r][i].grounded, b[r][i].grounded);
      EXPECT_EQ(a[r][i].summary_present, b[r][i].summary_present);
      EXPECT_EQ(a[r][i].evidence_span, b[r][i].evidence_span);
    }
  }
  grid[0].pop_back();
  EXPECT_THROW(judge_serial(index, grid, 1), std::invalid_argument);
}

TEST(Containment, HashedScanMatchesNaiveScan) {
  std::mt19937 rng(17);
  std::vector<std::string> docs;
  for (int d = 0; d < 6; ++d) docs.push_back(random_text(rng, 2000 + rng() % 3000));
  docs.push_back("short");  // below the window, never matches
  const ContainmentIndex index(docs, 64);
  std::vector<std::string> texts;
  for (int t = 0; t < 300; ++t) {
    std::string text = random_text(rng, rng() % 400);
    if (rng() % 3 == 0) {
      const auto& doc = docs[rng() % 6];
      const std::size_t len = 50 + rng() % 30;  // sometimes shorter than the window
      text.insert(rng() % (text.size() + 1), doc.substr(rng() % (doc.size() - len), len));
    }
    texts.push_back(std::move(text));
  }
  const auto serial = scan_serial(index, texts);
  const auto parallel = scan_parallel(index, texts);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].text, parallel[i].text);
    EXPECT_EQ(serial[i].offset, parallel[i].offset);
    EXPECT_EQ(serial[i].document, parallel[i].document);
  }
  std::size_t naive_hits = 0;
  std::size_t h = 0;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    const bool naive = contains_shared_window_naive(texts[t], docs, 64);
    naive_hits += naive;
    const bool hashed = h < serial.size() && serial[h].text == t;
    EXPECT_EQ(naive, hashed) << "text " << t;
    if (hashed) {
      const auto& hit = serial[h];
      EXPECT_EQ(texts[t].substr(hit.offset, 64), docs[hit.document].substr(hit.doc_offset, 64));
      ++h;
    }
  }
  EXPECT_GT(naive_hits, 0u);
  EXPECT_LT(naive_hits, texts.size());
}

TEST(Containment, WindowEdges) {
  const std::string doc(64, 'q');
  const ContainmentIndex index({doc}, 64);
  ContainmentIndex::Hit hit;
  EXPECT_TRUE(index.find_first(doc, hit));
  EXPECT_FALSE(index.find_first(doc.substr(1), hit));
  EXPECT_TRUE(index.find_first("xx" + doc + "yy", hit));
  EXPECT_EQ(hit.offset, 2u);
  EXPECT_THROW(ContainmentIndex({doc}, 0), std::invalid_argument);
}
