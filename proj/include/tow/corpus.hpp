#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace tow::corpus {

enum class DocSource { kOpenWebMath, kC4, kOther };

std::string source_name(DocSource source);
DocSource source_from_name(const std::string& name);

struct Document {
  std::string doc_id;
  std::string text;  // UTF-8
  DocSource source = DocSource::kOther;
};

struct WordTarget {
  std::string doc_id;
  size_t byte_start = 0;
  size_t byte_end = 0;  // half-open
  std::string surface;
  bool is_trivial = false;
};

struct LoadError {
  std::string where;  // "<file>#<line>" or path
  std::string message;
};

struct LoadResult {
  std::vector<Document> documents;
  std::vector<LoadError> errors;
};

class StopwordList {
 public:
  static const StopwordList& builtin();
  static StopwordList from_file(const std::string& path);

  bool contains(const std::string& lowercase_word) const;
  size_t size() const { return words_.size(); }
  const std::string& version_tag() const { return version_tag_; }

 private:
  StopwordList(std::unordered_set<std::string> words, std::string version_tag);

  std::unordered_set<std::string> words_;
  std::string version_tag_;
};

// Loads a corpus from a JSONL file (fields: id?, text, source?) or from a
// directory (every regular file is one document). Malformed records are
// reported in LoadResult.errors; an unreadable path throws.
LoadResult load_documents(const std::string& path);

std::vector<WordTarget> segment_words(const Document& doc, const StopwordList& stopwords);

bool is_trivial_word(const std::string& surface, const StopwordList& stopwords);

// RNG keyed by (seed, doc_id) so per-document draws are independent of
// processing order.
std::mt19937_64 make_doc_rng(uint64_t seed, const std::string& doc_id);

// Uniform draw in [0, bound) via rejection sampling; identical sequence on
// every platform.
uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound);

// Deterministically samples up to k non-trivial targets (never the first
// word), seeded by (seed, doc_id); result sorted by byte_start.
std::vector<WordTarget> sample_targets(const Document& doc, const StopwordList& stopwords,
                                       size_t k, uint64_t seed);

}  // namespace tow::corpus
