#pragma once

#include <string>

#include "tow/provider.hpp"
#include "tow/record.hpp"

namespace tow::denoise {

// Thought text injected for unpredictable words in every non-raw paradigm.
inline constexpr const char* kUnpredictableThought = "unpredictable";

enum class Paradigm { kRaw, kNoDeN, kPartDeN, kTow };

std::string paradigm_name(Paradigm paradigm);
Paradigm paradigm_from_name(const std::string& name);

struct DenoiseConfig {
  std::string model = "gpt-4o-mini";
  int max_output_tokens = 256;
  bool skip_short = false;  // skip the call when raw_thought is already <=15 words
  std::string unpredictable_text = kUnpredictableThought;
};

class DenoiseParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Templates with {<context>}, {<thought>}, {<gold_next>} slots in place.
std::string summarize_template();
std::string denoise_template();

provider::ChatRequest build_summarize_prompt(const std::string& context,
                                             const std::string& thought,
                                             const DenoiseConfig& cfg = {});

// The soft-consistent variant; the gold slot carries the normalized word.
provider::ChatRequest build_denoise_prompt(const std::string& context,
                                           const std::string& thought,
                                           const std::string& gold_word,
                                           const DenoiseConfig& cfg = {});

// Text after the last "Shorter Thought:" label; a label-free single line of
// at most 25 words is accepted whole. Anything else throws.
std::string parse_shorter_thought(const std::string& content);

std::string denoise_retry_reminder();

// Fills record.final_thought. EM records go through the summarize prompt,
// soft records through the gold-conditioned one, unpredictable records get
// the constant without any call. Output still over 25 words after one retry
// is cut to its first 15 words (truncated flag); provider/parse failure
// falls back to raw_thought (not_denoised flag).
ThoughtRecord denoise_record(provider::Provider& prov, ThoughtRecord record,
                             const DenoiseConfig& cfg = {});

// Thought selection per paradigm; empty optional for raw. Total on every
// categorized record.
std::optional<std::string> thought_text(const ThoughtRecord& record, Paradigm paradigm);

}  // namespace tow::denoise
