#pragma once

#include <string>

#include "tow/provider.hpp"
#include "tow/record.hpp"

namespace tow::consistency {

struct JudgeConfig {
  std::string model = "gpt-4o-mini";
  int max_output_tokens = 512;
};

struct JudgeVerdict {
  bool consistent = false;
  std::string reasoning;
  std::string raw_content;
};

class JudgeParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lowercased, surrounding punctuation stripped, internal characters kept.
std::string normalize_word(const std::string& surface);

// True iff both words normalize to the same non-empty string.
bool classify_exact(const std::string& predicted_word, const std::string& gold_word);

// Template with {<context>}, {<thought>}, {<next_word>} slots in place.
std::string judge_template();

provider::ChatRequest build_judge_prompt(const std::string& context, const std::string& thought,
                                         const std::string& gold_word,
                                         const JudgeConfig& cfg = {});

// Scans after the LAST "Judgement:" for a true/false token; reasoning is the
// text between "Reasoning:" and that label when present.
JudgeVerdict parse_judgement(const std::string& content);

std::string judge_retry_reminder();

// Fills record.category: exact match short-circuits without a judge call;
// otherwise the judge separates soft_consistent from unpredictable. Judge
// failure after one retry yields unpredictable plus a judge_failed flag.
ThoughtRecord categorize(provider::Provider& judge, ThoughtRecord record,
                         const JudgeConfig& cfg = {});

}  // namespace tow::consistency
