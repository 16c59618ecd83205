#include "tow/denoise.hpp"

#include "tow/consistency.hpp"
#include "tow/log.hpp"
#include "tow/text.hpp"

namespace tow::denoise {

namespace {

constexpr const char* kSummarizeTemplate =
    "Task Instruction: Please modify the following thought into a shorter one within 15 "
    "words without changing much of the meaning. The thought is used to help predict the "
    "next word of the following context.\n"
    "Context: {<context>}\n"
    "Thought: {<thought>}\n"
    "Shorter Thought:";

constexpr const char* kDenoiseTemplate =
    "Task Instruction: Please modify the following thought into a shorter one within 15 "
    "words without changing much of the meaning. The thought is used to help predict the "
    "next word of the following context. Besides, the gold next word is also given. You "
    "should try to shorten the thought based on it.\n"
    "Context: {<context>}\n"
    "Thought: {<thought>}\n"
    "Gold Next Word: {<gold_next>}\n"
    "Shorter Thought:";

void replace_slot(std::string& s, const std::string& slot, const std::string& value) {
  auto pos = s.find(slot);
  if (pos != std::string::npos) s.replace(pos, slot.size(), value);
}

provider::ChatRequest make_request(std::string prompt, const DenoiseConfig& cfg) {
  provider::ChatRequest req;
  req.model = cfg.model;
  req.max_output_tokens = cfg.max_output_tokens;
  req.messages.push_back({provider::Role::kUser, std::move(prompt)});
  return req;
}

}  // namespace

std::string paradigm_name(Paradigm paradigm) {
  switch (paradigm) {
    case Paradigm::kRaw:
      return "raw";
    case Paradigm::kNoDeN:
      return "noden";
    case Paradigm::kPartDeN:
      return "partden";
    case Paradigm::kTow:
      return "tow";
  }
  return "raw";
}

Paradigm paradigm_from_name(const std::string& name) {
  if (name == "raw") return Paradigm::kRaw;
  if (name == "noden") return Paradigm::kNoDeN;
  if (name == "partden") return Paradigm::kPartDeN;
  if (name == "tow") return Paradigm::kTow;
  throw std::invalid_argument("unknown paradigm: " + name);
}

std::string summarize_template() { return kSummarizeTemplate; }
std::string denoise_template() { return kDenoiseTemplate; }

provider::ChatRequest build_summarize_prompt(const std::string& context,
                                             const std::string& thought,
                                             const DenoiseConfig& cfg) {
  if (thought.empty()) {
    throw std::invalid_argument("summarize prompt requires a non-empty thought");
  }
  std::string prompt = kSummarizeTemplate;
  replace_slot(prompt, "{<context>}", context);
  replace_slot(prompt, "{<thought>}", thought);
  return make_request(std::move(prompt), cfg);
}

provider::ChatRequest build_denoise_prompt(const std::string& context,
                                           const std::string& thought,
                                           const std::string& gold_word,
                                           const DenoiseConfig& cfg) {
  if (thought.empty()) {
    throw std::invalid_argument("denoise prompt requires a non-empty thought");
  }
  auto gold = consistency::normalize_word(gold_word);
  if (gold.empty()) {
    throw std::invalid_argument("denoise prompt requires a non-empty gold word");
  }
  std::string prompt = kDenoiseTemplate;
  replace_slot(prompt, "{<context>}", context);
  replace_slot(prompt, "{<thought>}", thought);
  replace_slot(prompt, "{<gold_next>}", gold);
  return make_request(std::move(prompt), cfg);
}

std::string parse_shorter_thought(const std::string& content) {
  auto pos = content.rfind("Shorter Thought:");
  if (pos != std::string::npos) {
    auto rest = text::trim(content.substr(pos + 16));
    if (rest.empty()) throw DenoiseParseError("empty shorter thought");
    return rest;
  }
  auto trimmed = text::trim(content);
  if (!trimmed.empty() && trimmed.find('\n') == std::string::npos &&
      text::count_words(trimmed) <= 25) {
    return trimmed;
  }
  throw DenoiseParseError("missing 'Shorter Thought:' label");
}

std::string denoise_retry_reminder() {
  return "Respond using exactly the label 'Shorter Thought:' followed by a thought of at "
         "most 15 words.";
}

ThoughtRecord denoise_record(provider::Provider& prov, ThoughtRecord record,
                             const DenoiseConfig& cfg) {
  if (record.failed()) {
    return record;
  }
  if (!record.category) {
    throw std::invalid_argument("denoise requires a categorized record: " +
                                record.record_id());
  }
  if (*record.category == Category::kUnpredictable) {
    record.final_thought = cfg.unpredictable_text;
    return record;
  }

  if (cfg.skip_short && text::count_words(record.raw_thought) <= 15) {
    record.final_thought = record.raw_thought;
    record.add_flag(kFlagSkippedShort);
    return record;
  }

  auto request = *record.category == Category::kExactMatch
                     ? build_summarize_prompt(record.context, record.raw_thought, cfg)
                     : build_denoise_prompt(record.context, record.raw_thought,
                                            record.gold_word, cfg);
  request.request_tag = "denoise:" + record.record_id();

  std::optional<std::string> long_output;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      request.messages.back().content += "\n\n" + denoise_retry_reminder();
      request.request_tag = "denoise-retry:" + record.record_id();
    }
    try {
      auto response = prov.complete(request);
      record.usage.prompt_tokens += response.usage.prompt_tokens;
      record.usage.completion_tokens += response.usage.completion_tokens;
      auto shorter = parse_shorter_thought(response.content);
      if (text::count_words(shorter) <= 25) {
        record.final_thought = shorter;
        return record;
      }
      long_output = shorter;
      log::warn("denoise", "shorter thought still over 25 words", record.record_id());
    } catch (const DenoiseParseError& e) {
      log::warn("denoise", std::string("parse failure: ") + e.what(), record.record_id());
    } catch (const provider::ProviderError& e) {
      log::error("denoise", std::string("provider failure: ") + e.what(),
                 record.record_id());
      break;
    }
  }

  if (long_output) {
    record.final_thought = text::first_n_words(*long_output, 15);
    record.add_flag(kFlagTruncated);
  } else {
    record.final_thought = record.raw_thought;
    record.add_flag(kFlagNotDenoised);
  }
  return record;
}

std::optional<std::string> thought_text(const ThoughtRecord& record, Paradigm paradigm) {
  if (paradigm == Paradigm::kRaw) return std::nullopt;
  if (!record.category) {
    throw std::invalid_argument("thought_text requires a categorized record: " +
                                record.record_id());
  }
  if (*record.category == Category::kUnpredictable) {
    return record.final_thought ? *record.final_thought : std::string(kUnpredictableThought);
  }
  switch (paradigm) {
    case Paradigm::kNoDeN:
      return record.raw_thought;
    case Paradigm::kPartDeN:
      if (*record.category == Category::kExactMatch) return record.raw_thought;
      return record.final_thought ? *record.final_thought : record.raw_thought;
    case Paradigm::kTow:
      return record.final_thought ? *record.final_thought : record.raw_thought;
    case Paradigm::kRaw:
      break;
  }
  return std::nullopt;
}

}  // namespace tow::denoise
