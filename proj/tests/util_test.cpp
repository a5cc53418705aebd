// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fcagent/backend.hpp"
#include "fcagent/util.hpp"
#include "support.hpp"

using namespace fcagent;

TEST(Sha256, KnownVectors) {
  // FIPS 180-2 appendix vectors
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(TruncateText, KeepsShortTextAndMarksCuts) {
  EXPECT_EQ(truncate_text("hello", 10), "hello");
  EXPECT_EQ(truncate_text("hello world", 8), "hello...");
  EXPECT_EQ(truncate_text("hello world", 8).size(), 8u);
  EXPECT_EQ(truncate_text("hello", 2), "he");
}

TEST(EstimateSize, CountsCharacters) {
  EXPECT_EQ(estimate_size(""), 0u);
  EXPECT_EQ(estimate_size("abcd"), 4u);
  const std::string a = "first part", b = "and the second";
  EXPECT_EQ(estimate_size(a + b), estimate_size(a) + estimate_size(b));
}

TEST(RequestSize, SumsMessages) {
  LLMRequest r;
  r.messages = {{Role::system, "abc"}, {Role::user, "de"}};
  EXPECT_EQ(request_size(r), 5u);
  EXPECT_EQ(request_size(r, [](std::string_view s) { return s.size() * 2; }), 10u);
  EXPECT_THROW(validate_request(LLMRequest{}), InvalidRequest);
}

TEST(Files, AtomicWriteRoundTripsAndReplaces) {
  fcagent::testing::TempDir tmp;
  const auto p = tmp / "x.txt";
  write_file_atomic(p, std::string("a\0b", 3), false);
  EXPECT_EQ(read_file(p), std::string("a\0b", 3));
  write_file_atomic(p, "second", true);
  EXPECT_EQ(read_file(p), "second");
  // no temp files left behind
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Files, AppendAndReadLines) {
  fcagent::testing::TempDir tmp;
  const auto p = tmp / "log.jsonl";
  append_line(p, "one", false);
  append_line(p, "two", true);
  EXPECT_EQ(read_lines(p), (std::vector<std::string>{"one", "two"}));
}

TEST(Timestamps, NeverDecrease) {
  auto last = monotonic_timestamp_us();
  for (int i = 0; i < 10000; ++i) {
    const auto now = monotonic_timestamp_us();
    ASSERT_GE(now, last);
    last = now;
  }
}

TEST(Trim, StripsWhitespace) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(trim(" \t\n"), "");
}
