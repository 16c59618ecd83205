#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tow/denoise.hpp"
#include "tow/emitter.hpp"
#include "tow/text.hpp"

using namespace tow;

namespace {

corpus::Document make_doc(std::string id, std::string body) {
  corpus::Document doc;
  doc.doc_id = std::move(id);
  doc.text = std::move(body);
  return doc;
}

ThoughtRecord make_record(const corpus::Document& doc, std::size_t byte_start,
                          std::size_t byte_end, Category category,
                          std::string thought) {
  ThoughtRecord r;
  r.doc_id = doc.doc_id;
  r.target.doc_id = doc.doc_id;
  r.target.byte_start = byte_start;
  r.target.byte_end = byte_end;
  r.target.surface = doc.text.substr(byte_start, byte_end - byte_start);
  r.gold_word = r.target.surface;
  r.raw_thought = thought;
  r.category = category;
  if (category == Category::kUnpredictable) {
    r.final_thought = denoise::kUnpredictableThought;
  } else {
    r.final_thought = std::move(thought);
  }
  return r;
}

const emitter::TagConfig kTags;

}  // namespace

TEST_CASE("validate_tags accepts the defaults and rejects bad pairs") {
  CHECK_NOTHROW(emitter::validate_tags(kTags));

  emitter::TagConfig empty_open{"", "</T>"};
  CHECK_THROWS_AS(emitter::validate_tags(empty_open), std::invalid_argument);
  emitter::TagConfig same{"<T>", "<T>"};
  CHECK_THROWS_AS(emitter::validate_tags(same), std::invalid_argument);
  emitter::TagConfig contained{"<T>", "<T>>"};
  CHECK_THROWS_AS(emitter::validate_tags(contained), std::invalid_argument);
  emitter::TagConfig contained_rev{"[[x]]", "[x]"};
  CHECK_THROWS_AS(emitter::validate_tags(contained_rev), std::invalid_argument);
}

TEST_CASE("composition_includes follows the category/composition matrix") {
  using emitter::Composition;
  using emitter::composition_includes;

  for (auto comp : {Composition::kEmOnly, Composition::kWithoutUnpredictable,
                    Composition::kFull}) {
    CHECK(composition_includes(comp, Category::kExactMatch));
    CHECK_FALSE(composition_includes(comp, Category::kTrivial));
  }
  CHECK_FALSE(composition_includes(Composition::kEmOnly, Category::kSoftConsistent));
  CHECK(composition_includes(Composition::kWithoutUnpredictable, Category::kSoftConsistent));
  CHECK(composition_includes(Composition::kFull, Category::kSoftConsistent));
  CHECK_FALSE(composition_includes(Composition::kEmOnly, Category::kUnpredictable));
  CHECK_FALSE(composition_includes(Composition::kWithoutUnpredictable,
                                   Category::kUnpredictable));
  CHECK(composition_includes(Composition::kFull, Category::kUnpredictable));
}

TEST_CASE("composition names round-trip") {
  using emitter::Composition;
  CHECK(emitter::composition_name(Composition::kEmOnly) == "em-only");
  CHECK(emitter::composition_name(Composition::kWithoutUnpredictable) == "no-unpred");
  CHECK(emitter::composition_name(Composition::kFull) == "full");
  for (auto c : {Composition::kEmOnly, Composition::kWithoutUnpredictable,
                 Composition::kFull}) {
    CHECK(emitter::composition_from_name(emitter::composition_name(c)) == c);
  }
  CHECK_THROWS_AS(emitter::composition_from_name("everything"), std::invalid_argument);
}

TEST_CASE("augment_document inserts thoughts immediately before their word") {
  auto doc = make_doc("d", "Mountain ranges are formed");
  std::vector<ThoughtRecord> records;
  records.push_back(make_record(doc, 0, 8, Category::kUnpredictable, "off-topic guess"));
  records.push_back(make_record(
      doc, 9, 15, Category::kExactMatch,
      "The context discusses mountain formation, suggesting the next word will be "
      "\"ranges.\""));

  auto out = emitter::augment_document(doc, records, denoise::Paradigm::kTow,
                                       emitter::Composition::kFull, kTags);
  CHECK(out ==
        "<ToW> unpredictable </ToW>Mountain <ToW> The context discusses mountain "
        "formation, suggesting the next word will be \"ranges.\" </ToW>ranges are formed");
}

TEST_CASE("raw paradigm returns the document unchanged") {
  auto doc = make_doc("d", "Mountain ranges are formed");
  std::vector<ThoughtRecord> records;
  records.push_back(make_record(doc, 9, 15, Category::kExactMatch, "a thought"));
  auto out = emitter::augment_document(doc, records, denoise::Paradigm::kRaw,
                                       emitter::Composition::kFull, kTags);
  CHECK(out == doc.text);
}

TEST_CASE("em-only composition drops non-exact-match records") {
  auto doc = make_doc("d", "Mountain ranges are formed");
  std::vector<ThoughtRecord> records;
  records.push_back(make_record(doc, 0, 8, Category::kUnpredictable, "x"));
  records.push_back(make_record(doc, 16, 19, Category::kSoftConsistent, "linking verb"));
  auto out = emitter::augment_document(doc, records, denoise::Paradigm::kTow,
                                       emitter::Composition::kEmOnly, kTags);
  CHECK(out == doc.text);
}

TEST_CASE("paradigm selects which thought text is embedded") {
  auto doc = make_doc("d", "alpha beta");
  ThoughtRecord r = make_record(doc, 6, 10, Category::kSoftConsistent, "long raw thought");
  r.final_thought = "short";
  auto noden = emitter::augment_document(doc, {r}, denoise::Paradigm::kNoDeN,
                                         emitter::Composition::kFull, kTags);
  CHECK(noden == "alpha <ToW> long raw thought </ToW>beta");
  auto tow = emitter::augment_document(doc, {r}, denoise::Paradigm::kTow,
                                       emitter::Composition::kFull, kTags);
  CHECK(tow == "alpha <ToW> short </ToW>beta");

  // Partial denoising keeps the raw thought for exact matches only.
  ThoughtRecord em = make_record(doc, 6, 10, Category::kExactMatch, "long raw thought");
  em.final_thought = "short";
  auto partden_em = emitter::augment_document(doc, {em}, denoise::Paradigm::kPartDeN,
                                              emitter::Composition::kFull, kTags);
  CHECK(partden_em == "alpha <ToW> long raw thought </ToW>beta");
  auto partden_soft = emitter::augment_document(doc, {r}, denoise::Paradigm::kPartDeN,
                                                emitter::Composition::kFull, kTags);
  CHECK(partden_soft == "alpha <ToW> short </ToW>beta");
}

TEST_CASE("failed records are skipped during augmentation") {
  auto doc = make_doc("d", "alpha beta");
  ThoughtRecord r = make_record(doc, 6, 10, Category::kExactMatch, "thought");
  r.add_flag(kFlagGenerationFailed);
  r.category.reset();
  auto out = emitter::augment_document(doc, {r}, denoise::Paradigm::kTow,
                                       emitter::Composition::kFull, kTags);
  CHECK(out == doc.text);
}

TEST_CASE("augment_document validates its inputs") {
  auto doc = make_doc("d", "alpha beta gamma");
  using emitter::Composition;
  using denoise::Paradigm;

  ThoughtRecord wrong_doc = make_record(doc, 6, 10, Category::kExactMatch, "t");
  wrong_doc.doc_id = "other";
  wrong_doc.target.doc_id = "other";
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {wrong_doc}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("does not belong"), std::invalid_argument);

  ThoughtRecord uncategorized = make_record(doc, 6, 10, Category::kExactMatch, "t");
  uncategorized.category.reset();
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {uncategorized}, Paradigm::kTow, Composition::kFull,
                                kTags),
      doctest::Contains("uncategorized"), std::invalid_argument);

  ThoughtRecord bad_span = make_record(doc, 6, 10, Category::kExactMatch, "t");
  bad_span.target.surface = "wrong";
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {bad_span}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("span does not match"), std::invalid_argument);

  auto r1 = make_record(doc, 6, 10, Category::kExactMatch, "t");
  auto dup = make_record(doc, 6, 10, Category::kSoftConsistent, "u");
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {r1, dup}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("duplicate target"), std::invalid_argument);

  auto r2 = make_record(doc, 11, 16, Category::kExactMatch, "t");
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {r2, r1}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("unsorted"), std::invalid_argument);

  ThoughtRecord empty_thought = make_record(doc, 6, 10, Category::kExactMatch, "");
  empty_thought.final_thought = "";
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {empty_thought}, Paradigm::kTow, Composition::kFull,
                                kTags),
      doctest::Contains("empty thought"), std::invalid_argument);

  ThoughtRecord tagged = make_record(doc, 6, 10, Category::kExactMatch,
                                     "contains </ToW> inside");
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(doc, {tagged}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("tag strings"), std::invalid_argument);

  auto tag_doc = make_doc("d2", "already has <ToW> inside");
  CHECK_THROWS_WITH_AS(
      emitter::augment_document(tag_doc, {}, Paradigm::kTow, Composition::kFull, kTags),
      doctest::Contains("tag strings"), std::invalid_argument);
}

TEST_CASE("strip_tow removes annotations and restores the original") {
  CHECK(emitter::strip_tow("plain text, no tags", kTags) == "plain text, no tags");
  CHECK(emitter::strip_tow("<ToW> a thought </ToW>word rest", kTags) == "word rest");
  CHECK(emitter::strip_tow(
            "<ToW> unpredictable </ToW>Mountain <ToW> x </ToW>ranges are formed", kTags) ==
        "Mountain ranges are formed");
}

TEST_CASE("strip_tow reports malformed tag structure with byte offsets") {
  try {
    emitter::strip_tow("ab </ToW> x", kTags);
    FAIL("expected TagError");
  } catch (const emitter::TagError& e) {
    CHECK(e.offset() == 3);
    CHECK(std::string(e.what()).find("close tag without matching open") !=
          std::string::npos);
  }
  try {
    emitter::strip_tow("ab <ToW> never closed", kTags);
    FAIL("expected TagError");
  } catch (const emitter::TagError& e) {
    CHECK(e.offset() == 3);
    CHECK(std::string(e.what()).find("unclosed") != std::string::npos);
  }
  try {
    emitter::strip_tow("<ToW> outer <ToW> inner </ToW>w", kTags);
    FAIL("expected TagError");
  } catch (const emitter::TagError& e) {
    CHECK(e.offset() == 12);
    CHECK(std::string(e.what()).find("nested") != std::string::npos);
  }
}

TEST_CASE("round trip: strip_tow undoes augment_document exactly") {
  std::mt19937_64 rng(777);
  const char* vocab[] = {"ridge",  "stone", "wave",  "gull",  "tide", "cliff",
                         "basalt", "moss",  "spray", "charts", "notes", "@@x,"};
  const Category cats[] = {Category::kExactMatch, Category::kSoftConsistent,
                           Category::kUnpredictable};
  const denoise::Paradigm paradigms[] = {denoise::Paradigm::kRaw,
                                         denoise::Paradigm::kNoDeN,
                                         denoise::Paradigm::kPartDeN,
                                         denoise::Paradigm::kTow};
  const emitter::Composition comps[] = {emitter::Composition::kEmOnly,
                                        emitter::Composition::kWithoutUnpredictable,
                                        emitter::Composition::kFull};
  int failures = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::size_t n_words = 2 + rng() % 20;
    std::string body;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i < n_words; ++i) {
      if (i) body += (rng() % 4 == 0) ? "  " : " ";
      std::size_t start = body.size();
      body += vocab[rng() % 12];
      spans.emplace_back(start, body.size());
    }
    auto doc = make_doc("doc-" + std::to_string(iter), body);

    std::vector<ThoughtRecord> records;
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (rng() % 3 == 0) {
        auto cat = cats[rng() % 3];
        std::string thought = "thought about token " + std::string(vocab[rng() % 12]);
        records.push_back(make_record(doc, spans[i].first, spans[i].second, cat, thought));
      }
    }
    auto paradigm = paradigms[rng() % 4];
    auto comp = comps[rng() % 3];
    auto augmented = emitter::augment_document(doc, records, paradigm, comp, kTags);
    if (emitter::strip_tow(augmented, kTags) != body) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("composition widening never removes annotations") {
  auto doc = make_doc("d", "one two three four five");
  std::vector<ThoughtRecord> records;
  records.push_back(make_record(doc, 4, 7, Category::kExactMatch, "em"));
  records.push_back(make_record(doc, 8, 13, Category::kSoftConsistent, "soft"));
  records.push_back(make_record(doc, 14, 18, Category::kUnpredictable, "x"));
  auto count_tags = [&](emitter::Composition comp) {
    auto out = emitter::augment_document(doc, records, denoise::Paradigm::kTow, comp, kTags);
    return text::count_occurrences(out, kTags.open);
  };
  auto em_only = count_tags(emitter::Composition::kEmOnly);
  auto no_unpred = count_tags(emitter::Composition::kWithoutUnpredictable);
  auto full = count_tags(emitter::Composition::kFull);
  CHECK(em_only == 1);
  CHECK(no_unpred == 2);
  CHECK(full == 3);
  CHECK(em_only <= no_unpred);
  CHECK(no_unpred <= full);
}

TEST_CASE("augmentation preserves the original word sequence") {
  auto doc = make_doc("d", "one two three four");
  std::vector<ThoughtRecord> records;
  records.push_back(make_record(doc, 4, 7, Category::kExactMatch, "em thought"));
  records.push_back(make_record(doc, 14, 18, Category::kSoftConsistent, "soft thought"));
  auto augmented = emitter::augment_document(doc, records, denoise::Paradigm::kTow,
                                             emitter::Composition::kFull, kTags);
  auto original_words = text::split_whitespace(doc.text);
  auto stripped_words = text::split_whitespace(emitter::strip_tow(augmented, kTags));
  REQUIRE(original_words.size() == stripped_words.size());
  for (std::size_t i = 0; i < original_words.size(); ++i) {
    CHECK(original_words[i] == stripped_words[i]);
  }
}

TEST_CASE("whitespace tokenizer counts tags as standalone tokens") {
  emitter::WhitespaceTokenizer tok;
  CHECK(tok.tag() == "ws");
  CHECK(tok.count("") == 0);
  CHECK(tok.count("one two three") == 3);
  CHECK(tok.count("</ToW>ranges") == 2);     // tag splits off the word
  CHECK(tok.count("<ToW>") == 1);
  CHECK(tok.count("<ToW> short thought </ToW>word") == 5);
  CHECK(tok.count("a<ToW>b</ToW>c") == 5);
}

TEST_CASE("token counts are additive up to boundary effects") {
  std::mt19937_64 rng(31337);
  emitter::WhitespaceTokenizer tok;
  const char* pieces[] = {"word", " ",  "<ToW>", "</ToW>", "x,y", "\t", "spray"};
  for (int iter = 0; iter < 300; ++iter) {
    std::string a, b;
    for (int i = 0; i < 6; ++i) {
      a += pieces[rng() % 7];
      b += pieces[rng() % 7];
    }
    auto ca = tok.count(a);
    auto cb = tok.count(b);
    auto cab = tok.count(a + b);
    CHECK(ca + cb >= cab);
    CHECK(cab + 2 >= ca + cb);
  }
}

TEST_CASE("command tokenizer shells out and parses the count") {
  testutil::ScratchDir scratch("cmdtok");
  auto script = scratch.path() / "count_words.sh";
  testutil::write_file(script, "#!/bin/sh\nwc -w\n");
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);

  auto tok = emitter::make_tokenizer("cmd:" + script.string());
  CHECK(tok->tag() == "cmd:" + script.string());
  CHECK(tok->count("one two three") == 3);
  CHECK(tok->count("") == 0);
}

TEST_CASE("command tokenizer failures surface as errors") {
  auto missing = emitter::make_tokenizer("cmd:/nonexistent/binary-xyz");
  CHECK_THROWS_AS(missing->count("text"), std::runtime_error);

  testutil::ScratchDir scratch("cmdtokbad");
  auto script = scratch.path() / "noise.sh";
  testutil::write_file(script, "#!/bin/sh\ncat > /dev/null\necho not-a-number\n");
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  auto not_a_number = emitter::make_tokenizer("cmd:" + script.string());
  CHECK_THROWS_AS(not_a_number->count("text"), std::runtime_error);
}

TEST_CASE("make_tokenizer rejects unknown specs") {
  CHECK(emitter::make_tokenizer("ws")->tag() == "ws");
  CHECK_THROWS_AS(emitter::make_tokenizer("bpe"), std::invalid_argument);
  CHECK_THROWS_AS(emitter::make_tokenizer(""), std::invalid_argument);
}

TEST_CASE("corpus_stats divides the token surplus by the annotation count") {
  // Ten thoughts of five tokens each plus two tag tokens: surplus 7 per tag.
  std::vector<corpus::Document> raw, augmented;
  for (int d = 0; d < 5; ++d) {
    std::string id = "doc-" + std::to_string(d);
    raw.push_back(make_doc(id, "alpha beta gamma delta"));
    augmented.push_back(make_doc(
        id,
        "alpha <ToW> one two three four five </ToW>beta gamma "
        "<ToW> six seven eight nine ten </ToW>delta"));
  }
  emitter::WhitespaceTokenizer tok;
  auto row = emitter::corpus_stats(raw, augmented, tok, kTags, "tow_full");
  CHECK(row.label == "tow_full");
  CHECK(row.tow_count == 10);
  CHECK(row.total_tokens == 5 * 4 + 10 * 7);
  CHECK(row.tokens_per_tow == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(row.tokenizer_tag == "ws");
}

TEST_CASE("corpus_stats on an unannotated corpus reports zero overhead") {
  std::vector<corpus::Document> raw = {make_doc("a", "one two three")};
  emitter::WhitespaceTokenizer tok;
  auto row = emitter::corpus_stats(raw, raw, tok, kTags, "raw");
  CHECK(row.tow_count == 0);
  CHECK(row.total_tokens == 3);
  CHECK(row.tokens_per_tow == doctest::Approx(0.0));
}

TEST_CASE("augmented corpora never have fewer tokens than the raw corpus") {
  std::mt19937_64 rng(4242);
  emitter::WhitespaceTokenizer tok;
  const char* vocab[] = {"sand", "dune", "wind", "ripple", "crest"};
  for (int iter = 0; iter < 100; ++iter) {
    std::string body;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t n = 2 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) body += ' ';
      std::size_t s = body.size();
      body += vocab[rng() % 5];
      spans.emplace_back(s, body.size());
    }
    auto doc = make_doc("d", body);
    std::vector<ThoughtRecord> records;
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (rng() % 2) {
        records.push_back(make_record(doc, spans[i].first, spans[i].second,
                                      Category::kExactMatch, "brief note"));
      }
    }
    auto augmented = emitter::augment_document(doc, records, denoise::Paradigm::kTow,
                                               emitter::Composition::kFull, kTags);
    auto raw_tokens = tok.count(body);
    auto aug_tokens = tok.count(augmented);
    CHECK(aug_tokens >= raw_tokens);
    if (records.empty()) CHECK(aug_tokens == raw_tokens);
    if (aug_tokens == raw_tokens) {
      CHECK(text::count_occurrences(augmented, kTags.open) == 0);
    }
  }
}

TEST_CASE("corpus_stats rejects mismatched document sets") {
  std::vector<corpus::Document> raw = {make_doc("a", "x"), make_doc("b", "y")};
  std::vector<corpus::Document> augmented = {make_doc("a", "x"), make_doc("c", "y")};
  emitter::WhitespaceTokenizer tok;
  try {
    emitter::corpus_stats(raw, augmented, tok, kTags, "row");
    FAIL("expected mismatch error");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("b") != std::string::npos);
    CHECK(msg.find("c") != std::string::npos);
  }
}

TEST_CASE("read/write augmented corpora round-trip and reject duplicates") {
  testutil::ScratchDir scratch("emit");
  std::vector<corpus::Document> docs = {make_doc("a", "first body"),
                                        make_doc("b", "second body")};
  emitter::write_augmented(scratch.str("corpus.jsonl"), docs);
  auto back = emitter::read_augmented(scratch.str("corpus.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].doc_id == "a");
  CHECK(back[0].text == "first body");
  CHECK(back[1].doc_id == "b");

  testutil::write_file(scratch.path() / "dup_read.jsonl",
                       R"({"id":"a","text":"x"})" "\n" R"({"id":"a","text":"y"})" "\n");
  CHECK_THROWS_AS(emitter::read_augmented(scratch.str("dup_read.jsonl")),
                  std::runtime_error);
}
