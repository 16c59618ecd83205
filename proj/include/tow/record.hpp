#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tow/corpus.hpp"
#include "tow/jsonio.hpp"

namespace tow {

enum class Category { kTrivial, kExactMatch, kSoftConsistent, kUnpredictable };

std::string category_name(Category category);
Category category_from_name(const std::string& name);

// Record flags, kept as plain strings in the serialized form.
inline constexpr const char* kFlagGenerationFailed = "generation_failed";
inline constexpr const char* kFlagJudgeFailed = "judge_failed";
inline constexpr const char* kFlagNotDenoised = "not_denoised";
inline constexpr const char* kFlagTruncated = "truncated";
inline constexpr const char* kFlagSkippedShort = "skipped_short";

struct RecordUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

// One annotated target word, carried through every pipeline stage.
struct ThoughtRecord {
  std::string doc_id;
  corpus::WordTarget target;
  std::string context;       // pre-target text, possibly left-truncated
  std::string gold_word;     // target.surface verbatim
  std::string gold_stripped; // surface without surrounding punctuation
  std::string raw_thought;
  std::string predicted_word;
  std::optional<Category> category;
  std::optional<std::string> final_thought;
  std::optional<std::string> judge_reasoning;
  std::vector<std::string> flags;
  RecordUsage usage;
  std::string template_version;

  bool has_flag(const std::string& flag) const;
  void add_flag(const std::string& flag);
  bool failed() const { return has_flag(kFlagGenerationFailed); }

  std::string record_id() const {
    return doc_id + ":" + std::to_string(target.byte_start);
  }
};

json record_to_json(const ThoughtRecord& record);
ThoughtRecord record_from_json(const json& j);

std::vector<ThoughtRecord> read_records(const std::string& path);
void write_records(const std::string& path, const std::vector<ThoughtRecord>& records);

}  // namespace tow
