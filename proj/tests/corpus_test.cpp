#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tow/corpus.hpp"
#include "tow/text.hpp"

using namespace tow;

namespace {

corpus::Document make_doc(std::string id, std::string body) {
  corpus::Document doc;
  doc.doc_id = std::move(id);
  doc.text = std::move(body);
  return doc;
}

// Independent segmentation oracle: scan byte runs separated by ASCII space.
std::vector<std::pair<std::size_t, std::size_t>> scan_spans(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_ascii_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t start = i;
    while (i < s.size() && !text::is_ascii_space(s[i])) ++i;
    spans.emplace_back(start, i);
  }
  return spans;
}

}  // namespace

TEST_CASE("segment_words finds maximal non-space runs with exact offsets") {
  auto doc = make_doc("d", "Mountain ranges are formed");
  auto words = corpus::segment_words(doc, corpus::StopwordList::builtin());
  REQUIRE(words.size() == 4);
  CHECK(words[0].surface == "Mountain");
  CHECK(words[0].byte_start == 0);
  CHECK(words[0].byte_end == 8);
  CHECK(words[1].surface == "ranges");
  CHECK(words[1].byte_start == 9);
  CHECK(words[3].surface == "formed");
  CHECK(words[3].byte_end == doc.text.size());
  for (const auto& w : words) {
    CHECK(doc.text.substr(w.byte_start, w.byte_end - w.byte_start) == w.surface);
    CHECK(w.doc_id == "d");
  }
}

TEST_CASE("segment_words keeps punctuation attached to the word") {
  auto doc = make_doc("d", "It is 8-feet by 4-inches, roughly.");
  auto words = corpus::segment_words(doc, corpus::StopwordList::builtin());
  std::vector<std::string> surfaces;
  for (const auto& w : words) surfaces.push_back(w.surface);
  CHECK(surfaces == std::vector<std::string>{"It", "is", "8-feet", "by",
                                             "4-inches,", "roughly."});
  CHECK(words[4].surface == "4-inches,");
  CHECK(doc.text.substr(words[4].byte_start, 9) == "4-inches,");
}

TEST_CASE("segment_words on empty and all-space text") {
  const auto& sw = corpus::StopwordList::builtin();
  CHECK(corpus::segment_words(make_doc("d", ""), sw).empty());
  CHECK(corpus::segment_words(make_doc("d", " \t\n "), sw).empty());
}

TEST_CASE("segment_words offsets reconstruct random documents exactly") {
  std::mt19937_64 rng(20240817);
  const std::string alphabet = "ab cde\tf\ngh ij,.kl mn";
  for (int iter = 0; iter < 200; ++iter) {
    std::string body;
    std::size_t len = rng() % 120;
    for (std::size_t i = 0; i < len; ++i) body += alphabet[rng() % alphabet.size()];
    auto doc = make_doc("r", body);
    auto words = corpus::segment_words(doc, corpus::StopwordList::builtin());
    auto expect = scan_spans(body);
    REQUIRE(words.size() == expect.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      CHECK(words[i].byte_start == expect[i].first);
      CHECK(words[i].byte_end == expect[i].second);
      CHECK(body.substr(words[i].byte_start, words[i].byte_end - words[i].byte_start) ==
            words[i].surface);
    }
  }
}

TEST_CASE("is_trivial_word flags stopwords and punctuation-only tokens") {
  const auto& sw = corpus::StopwordList::builtin();
  CHECK(corpus::is_trivial_word("the", sw));
  CHECK(corpus::is_trivial_word("The,", sw));
  CHECK(corpus::is_trivial_word("---", sw));
  CHECK(corpus::is_trivial_word("...", sw));
  CHECK_FALSE(corpus::is_trivial_word("Mountain", sw));
  CHECK_FALSE(corpus::is_trivial_word("ranges.", sw));
}

TEST_CASE("builtin stopword list matches the shipped file word for word") {
  const auto& builtin = corpus::StopwordList::builtin();
  CHECK(builtin.version_tag() == "builtin-en-v1");
  auto body = testutil::read_file(testutil::data_path("stopwords_en.txt"));
  std::size_t n = 0;
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    for (const auto& word : text::split_whitespace(trimmed)) {
      CHECK_MESSAGE(builtin.contains(text::to_lower_ascii(word)),
                    "missing from builtin: " << word);
      ++n;
    }
  }
  CHECK(n == builtin.size());
}

TEST_CASE("StopwordList::from_file lowercases and skips comments") {
  testutil::ScratchDir scratch("stopwords");
  testutil::write_file(scratch.path() / "custom.txt",
                       "# comment\nThe\nAND\n\nzig\n");
  auto sw = corpus::StopwordList::from_file(scratch.str("custom.txt"));
  CHECK(sw.size() == 3);
  CHECK(sw.contains("the"));
  CHECK(sw.contains("and"));
  CHECK(sw.contains("zig"));
  CHECK_FALSE(sw.contains("#"));
  CHECK(sw.version_tag() == "file:custom.txt");
}

TEST_CASE("load_documents reads JSONL in order and reports line errors") {
  testutil::ScratchDir scratch("load");
  testutil::write_file(scratch.path() / "docs.jsonl",
                       R"({"id":"a","text":"alpha body"})" "\n"
                       R"({"text":"no id line"})" "\n"
                       "not json at all\n"
                       R"({"id":"c"})" "\n"
                       R"({"id":"d","text":""})" "\n"
                       R"({"id":"a","text":"duplicate"})" "\n");
  auto result = corpus::load_documents(scratch.str("docs.jsonl"));

  REQUIRE(result.documents.size() == 2);
  CHECK(result.documents[0].doc_id == "a");
  CHECK(result.documents[0].text == "alpha body");
  CHECK(result.documents[1].doc_id == "docs.jsonl#2");  // id falls back to location
  CHECK(result.documents[1].text == "no id line");

  REQUIRE(result.errors.size() == 4);
  CHECK(result.errors[0].where == "docs.jsonl#3");
  CHECK(result.errors[0].message.find("invalid json") != std::string::npos);
  CHECK(result.errors[1].message.find("missing string field 'text'") != std::string::npos);
  CHECK(result.errors[2].message.find("empty document text") != std::string::npos);
  CHECK(result.errors[3].message.find("duplicate doc id") != std::string::npos);
}

TEST_CASE("load_documents walks a directory deterministically") {
  testutil::ScratchDir scratch("loaddir");
  testutil::write_file(scratch.path() / "b.txt", "whole file doc");
  testutil::write_file(scratch.path() / "a" / "inner.jsonl",
                       R"({"id":"x","text":"from jsonl"})" "\n");
  auto result = corpus::load_documents(scratch.str());
  REQUIRE(result.documents.size() == 2);
  CHECK(result.documents[0].doc_id == "x");  // a/inner.jsonl sorts before b.txt
  CHECK(result.documents[1].doc_id == "b.txt");
  CHECK(result.documents[1].text == "whole file doc");
  CHECK(result.errors.empty());
}

TEST_CASE("plain files with malformed utf-8 are reported, not loaded") {
  testutil::ScratchDir scratch("badutf8");
  testutil::write_file(scratch.path() / "bad.txt", "broken \xc3\x28 bytes");
  testutil::write_file(scratch.path() / "ok.txt", "fine");
  auto result = corpus::load_documents(scratch.str());
  REQUIRE(result.documents.size() == 1);
  CHECK(result.documents[0].doc_id == "ok.txt");
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].where == "bad.txt");
  CHECK(result.errors[0].message.find("not valid utf-8") != std::string::npos);
}

TEST_CASE("load_documents throws on a missing path") {
  CHECK_THROWS(corpus::load_documents("/nonexistent/definitely/missing.jsonl"));
}

TEST_CASE("bounded_rand is deterministic and rejects zero bound") {
  std::mt19937_64 a(123), b(123);
  for (int i = 0; i < 50; ++i) {
    std::uint64_t bound = 1 + (i * 37) % 97;
    auto va = corpus::bounded_rand(a, bound);
    CHECK(va == corpus::bounded_rand(b, bound));
    CHECK(va < bound);
  }
  std::mt19937_64 c(1);
  CHECK_THROWS_AS(corpus::bounded_rand(c, 0), std::invalid_argument);
}

TEST_CASE("make_doc_rng depends on doc id, not processing order") {
  auto r1 = corpus::make_doc_rng(42, "doc-a");
  auto r2 = corpus::make_doc_rng(42, "doc-b");
  auto r3 = corpus::make_doc_rng(42, "doc-a");
  CHECK(r1() == r3());
  CHECK(r1() != r2());  // astronomically unlikely to collide
  auto r4 = corpus::make_doc_rng(43, "doc-a");
  auto r5 = corpus::make_doc_rng(42, "doc-a");
  r5();
  CHECK(r4() != r5());
}

TEST_CASE("sample_targets is deterministic, sorted, and skips the first word") {
  const auto& sw = corpus::StopwordList::builtin();
  auto doc = make_doc("doc-7",
                      "Glaciers carve valleys while rivers deposit sediment across "
                      "plains forming deltas near coastal marshes");
  auto once = corpus::sample_targets(doc, sw, 5, 42);
  auto twice = corpus::sample_targets(doc, sw, 5, 42);
  REQUIRE(once.size() == 5);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].byte_start == twice[i].byte_start);
    CHECK(once[i].surface == twice[i].surface);
  }
  CHECK(std::is_sorted(once.begin(), once.end(),
                       [](const corpus::WordTarget& a, const corpus::WordTarget& b) {
                         return a.byte_start < b.byte_start;
                       }));
  std::set<std::size_t> starts;
  for (const auto& t : once) {
    CHECK(t.byte_start > 0);  // first word is never a target
    CHECK_FALSE(corpus::is_trivial_word(t.surface, sw));
    CHECK(starts.insert(t.byte_start).second);
  }
  auto other_seed = corpus::sample_targets(doc, sw, 5, 43);
  bool differs = other_seed.size() != once.size();
  for (std::size_t i = 0; !differs && i < once.size(); ++i) {
    differs = other_seed[i].byte_start != once[i].byte_start;
  }
  CHECK(differs);
}

TEST_CASE("sample_targets clamps k to the eligible pool") {
  const auto& sw = corpus::StopwordList::builtin();
  auto doc = make_doc("d", "Blue heron stalks minnows");
  auto targets = corpus::sample_targets(doc, sw, 50, 1);
  CHECK(targets.size() == 3);  // all but the first word
}

TEST_CASE("sample_targets returns empty when nothing is eligible") {
  const auto& sw = corpus::StopwordList::builtin();
  CHECK(corpus::sample_targets(make_doc("d", ""), sw, 5, 1).empty());
  CHECK(corpus::sample_targets(make_doc("d", "Mountain"), sw, 5, 1).empty());
  CHECK(corpus::sample_targets(make_doc("d", "Rock the and of ..."), sw, 5, 1).empty());
}

TEST_CASE("sample_targets spans always match the document text") {
  const auto& sw = corpus::StopwordList::builtin();
  std::mt19937_64 rng(99);
  const char* vocab[] = {"ridge", "the",  "basalt", "flows", "of",   "and",
                         "erode", "cliff", "a",      "tide",  "pools", "form"};
  for (int iter = 0; iter < 50; ++iter) {
    std::string body;
    std::size_t n = 2 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) body += ' ';
      body += vocab[rng() % 12];
    }
    auto doc = make_doc("doc-" + std::to_string(iter), body);
    for (const auto& t : corpus::sample_targets(doc, sw, 6, 7)) {
      CHECK(doc.text.substr(t.byte_start, t.byte_end - t.byte_start) == t.surface);
    }
  }
}

TEST_CASE("bundled fixture corpus loads cleanly with fifty documents") {
  auto result = corpus::load_documents(testutil::fixture_path("corpus_50.jsonl").string());
  CHECK(result.documents.size() == 50);
  CHECK(result.errors.empty());
  std::set<std::string> ids;
  for (const auto& doc : result.documents) {
    CHECK(text::valid_utf8(doc.text));
    CHECK_FALSE(doc.text.empty());
    CHECK(ids.insert(doc.doc_id).second);
  }
}
