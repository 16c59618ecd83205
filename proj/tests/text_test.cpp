#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/record.hpp"
#include "tow/sha256.hpp"
#include "tow/text.hpp"

using namespace tow;

TEST_CASE("trim removes edge whitespace only") {
  CHECK(text::trim("  hello  ") == "hello");
  CHECK(text::trim("\t\na b\r\n") == "a b");
  CHECK(text::trim("") == "");
  CHECK(text::trim("   ") == "");
  CHECK(text::trim("x") == "x");
}

TEST_CASE("ascii case conversion leaves non-ascii bytes alone") {
  CHECK(text::to_lower_ascii("MiXeD 123") == "mixed 123");
  CHECK(text::to_upper_ascii("MiXeD 123") == "MIXED 123");
  CHECK(text::to_lower_ascii("Caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("strip_edge_punctuation handles ascii punctuation") {
  CHECK(text::strip_edge_punctuation("ranges.") == "ranges");
  CHECK(text::strip_edge_punctuation("\"ranges.\"") == "ranges");
  CHECK(text::strip_edge_punctuation("(C)") == "C");
  CHECK(text::strip_edge_punctuation("...") == "");
  CHECK(text::strip_edge_punctuation("don't") == "don't");
  CHECK(text::strip_edge_punctuation("4-inches,") == "4-inches");
}

TEST_CASE("strip_edge_punctuation handles common wide punctuation") {
  CHECK(text::strip_edge_punctuation("“ranges.”") == "ranges");
  CHECK(text::strip_edge_punctuation("‘word’") == "word");
  CHECK(text::strip_edge_punctuation("word…") == "word");
  CHECK(text::strip_edge_punctuation("«word»") == "word");
  CHECK(text::strip_edge_punctuation("—word–") == "word");
}

TEST_CASE("split_whitespace and count_words") {
  auto tokens = text::split_whitespace("  one two\tthree\nfour ");
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0] == "one");
  CHECK(tokens[3] == "four");
  CHECK(text::count_words("") == 0);
  CHECK(text::count_words("   ") == 0);
  CHECK(text::count_words("a b  c") == 3);
}

TEST_CASE("first_n_words joins with single spaces") {
  CHECK(text::first_n_words("one  two\tthree four", 3) == "one two three");
  CHECK(text::first_n_words("one two", 5) == "one two");
  CHECK(text::first_n_words("one two", 0) == "");
}

TEST_CASE("valid_utf8 accepts well-formed and rejects malformed sequences") {
  CHECK(text::valid_utf8("plain ascii"));
  CHECK(text::valid_utf8("caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80"));
  CHECK_FALSE(text::valid_utf8("\xc3"));              // truncated two-byte
  CHECK_FALSE(text::valid_utf8("\xc3\x28"));          // bad continuation
  CHECK_FALSE(text::valid_utf8("\xed\xa0\x80"));      // surrogate half
  CHECK_FALSE(text::valid_utf8("\xc0\xaf"));          // overlong slash
  CHECK_FALSE(text::valid_utf8("\xf5\x80\x80\x80"));  // above U+10FFFF
}

TEST_CASE("count_occurrences is non-overlapping") {
  CHECK(text::count_occurrences("aaa", "aa") == 1);
  CHECK(text::count_occurrences("<ToW> a <ToW> b", "<ToW>") == 2);
  CHECK(text::count_occurrences("abc", "") == 0);
  CHECK(text::count_occurrences("", "x") == 0);
}

TEST_CASE("normalize_whitespace collapses runs and trims") {
  CHECK(text::normalize_whitespace("  a\t\tb \n c ") == "a b c");
  CHECK(text::normalize_whitespace("") == "");
  CHECK(text::normalize_whitespace("x") == "x");
}

TEST_CASE("fnv1a64 matches reference vectors") {
  // Offset basis and the standard single-byte probe for FNV-1a 64.
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("format_sig4 keeps four significant digits") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", 0.0500043);
  CHECK(text::format_sig4(0.0500043) == buf);
  CHECK(text::format_sig4(1.0) == "1");
  CHECK(text::format_sig4(0.001953125) == "0.001953");
}

TEST_CASE("sha256_hex matches the NIST vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("jsonio dump is single-line with sorted keys") {
  json j;
  j["zeta"] = 1;
  j["alpha"] = "x";
  j["mid"] = json::array({1, 2});
  std::string s = jsonio::dump(j);
  CHECK(s == R"({"alpha":"x","mid":[1,2],"zeta":1})");
  CHECK(s.find('\n') == std::string::npos);
}

TEST_CASE("jsonio write_file_atomic then read_file round-trips") {
  testutil::ScratchDir scratch("jsonio");
  std::string body = "line one\nline two\n";
  jsonio::write_file_atomic(scratch.str("sub/out.txt"), body);
  CHECK(jsonio::read_file(scratch.str("sub/out.txt")) == body);
  auto lines = jsonio::read_lines(scratch.str("sub/out.txt"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "line one");
  CHECK(lines[1] == "line two");
}

TEST_CASE("log level_from_name accepts known names and rejects others") {
  CHECK(log::level_from_name("debug") == log::Level::kDebug);
  CHECK(log::level_from_name("info") == log::Level::kInfo);
  CHECK(log::level_from_name("warn") == log::Level::kWarn);
  CHECK(log::level_from_name("error") == log::Level::kError);
  CHECK_THROWS_AS(log::level_from_name("verbose"), std::invalid_argument);
}

namespace {

ThoughtRecord full_record() {
  ThoughtRecord r;
  r.doc_id = "doc-1";
  r.target.doc_id = "doc-1";
  r.target.byte_start = 9;
  r.target.byte_end = 15;
  r.target.surface = "ranges";
  r.context = "Mountain ";
  r.gold_word = "ranges";
  r.gold_stripped = "ranges";
  r.raw_thought = "The passage is about mountain formation.";
  r.predicted_word = "ranges";
  r.category = Category::kSoftConsistent;
  r.final_thought = "About mountain formation.";
  r.judge_reasoning = "Same topic.";
  r.add_flag(kFlagTruncated);
  r.usage.prompt_tokens = 120;
  r.usage.completion_tokens = 30;
  r.template_version = "fewshot-default-v1";
  return r;
}

}  // namespace

TEST_CASE("record JSON round-trip preserves every field") {
  ThoughtRecord r = full_record();
  ThoughtRecord back = record_from_json(record_to_json(r));
  CHECK(back.doc_id == r.doc_id);
  CHECK(back.target.byte_start == r.target.byte_start);
  CHECK(back.target.byte_end == r.target.byte_end);
  CHECK(back.target.surface == r.target.surface);
  CHECK(back.context == r.context);
  CHECK(back.gold_word == r.gold_word);
  CHECK(back.gold_stripped == r.gold_stripped);
  CHECK(back.raw_thought == r.raw_thought);
  CHECK(back.predicted_word == r.predicted_word);
  REQUIRE(back.category.has_value());
  CHECK(*back.category == Category::kSoftConsistent);
  REQUIRE(back.final_thought.has_value());
  CHECK(*back.final_thought == *r.final_thought);
  REQUIRE(back.judge_reasoning.has_value());
  CHECK(*back.judge_reasoning == *r.judge_reasoning);
  CHECK(back.has_flag(kFlagTruncated));
  CHECK(back.usage.prompt_tokens == 120);
  CHECK(back.usage.completion_tokens == 30);
  CHECK(back.template_version == r.template_version);
  CHECK(back.record_id() == "doc-1:9");
}

TEST_CASE("record round-trip keeps empty optionals empty") {
  ThoughtRecord r;
  r.doc_id = "d";
  r.target.doc_id = "d";
  r.target.byte_start = 3;
  r.target.byte_end = 4;
  r.target.surface = "x";
  r.gold_word = "x";
  ThoughtRecord back = record_from_json(record_to_json(r));
  CHECK_FALSE(back.category.has_value());
  CHECK_FALSE(back.final_thought.has_value());
  CHECK_FALSE(back.judge_reasoning.has_value());
  CHECK(back.flags.empty());
  CHECK_FALSE(back.failed());
}

TEST_CASE("category names round-trip and reject unknowns") {
  for (auto c : {Category::kTrivial, Category::kExactMatch,
                 Category::kSoftConsistent, Category::kUnpredictable}) {
    CHECK(category_from_name(category_name(c)) == c);
  }
  CHECK(category_name(Category::kExactMatch) == "exact_match");
  CHECK_THROWS_AS(category_from_name("mostly_right"), std::invalid_argument);
}

TEST_CASE("read_records and write_records round-trip a file") {
  testutil::ScratchDir scratch("records");
  std::vector<ThoughtRecord> records{full_record()};
  records.push_back(full_record());
  records[1].doc_id = "doc-2";
  records[1].target.doc_id = "doc-2";
  records[1].category = Category::kExactMatch;
  records[1].flags.clear();
  write_records(scratch.str("records.jsonl"), records);
  auto back = read_records(scratch.str("records.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].doc_id == "doc-1");
  CHECK(back[1].doc_id == "doc-2");
  CHECK(*back[1].category == Category::kExactMatch);
}
