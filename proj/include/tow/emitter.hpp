#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tow/denoise.hpp"
#include "tow/record.hpp"

namespace tow::emitter {

struct TagConfig {
  std::string open = "<ToW>";
  std::string close = "</ToW>";
};

// Throws std::invalid_argument when tags are empty, equal, or one contains
// the other.
void validate_tags(const TagConfig& tags);

enum class Composition { kEmOnly, kWithoutUnpredictable, kFull };

std::string composition_name(Composition composition);
Composition composition_from_name(const std::string& name);

bool composition_includes(Composition composition, Category category);

// Inserts "{open} {thought} {close}" directly before each included target
// word. Raw paradigm returns doc.text unchanged. Failed records are skipped;
// overlaps, duplicates, span mismatches, uncategorized records, and tag
// collisions throw.
std::string augment_document(const corpus::Document& doc,
                             const std::vector<ThoughtRecord>& records,
                             denoise::Paradigm paradigm, Composition composition,
                             const TagConfig& tags = {});

class TagError : public std::runtime_error {
 public:
  TagError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Removes every tag span including the tags; exact inverse of
// augment_document. Throws TagError on stray, unclosed, or nested tags.
std::string strip_tow(const std::string& text, const TagConfig& tags = {});

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count(const std::string& text) = 0;
  virtual std::string tag() const = 0;
};

// Whitespace tokens, except that tag strings always split off as their own
// tokens ("</ToW>ranges" counts as 2).
class WhitespaceTokenizer : public Tokenizer {
 public:
  explicit WhitespaceTokenizer(TagConfig tags = {});
  std::size_t count(const std::string& text) override;
  std::string tag() const override { return "ws"; }

 private:
  TagConfig tags_;
};

// Runs an external command with the text on stdin and reads back an integer.
class CommandTokenizer : public Tokenizer {
 public:
  explicit CommandTokenizer(std::string command);
  std::size_t count(const std::string& text) override;
  std::string tag() const override { return "cmd:" + command_; }

 private:
  std::string command_;
};

// "ws" or "cmd:<path>".
std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec, const TagConfig& tags = {});

struct StatsRow {
  std::string label;
  std::int64_t total_tokens = 0;
  std::int64_t tow_count = 0;
  double tokens_per_tow = 0.0;
  std::string tokenizer_tag;
};

// Token and tag statistics for one augmented corpus against its raw pair.
// Doc-id sets must match.
StatsRow corpus_stats(const std::vector<corpus::Document>& raw,
                      const std::vector<corpus::Document>& augmented, Tokenizer& tokenizer,
                      const TagConfig& tags = {}, const std::string& label = "");

// Augmented-corpus JSONL ({id, text} per line).
std::vector<corpus::Document> read_augmented(const std::string& path);
void write_augmented(const std::string& path, const std::vector<corpus::Document>& docs);

}  // namespace tow::emitter
