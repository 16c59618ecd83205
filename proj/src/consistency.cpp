#include "tow/consistency.hpp"

#include "tow/log.hpp"
#include "tow/text.hpp"

namespace tow::consistency {

namespace {

constexpr const char* kJudgeTemplate =
    "Task Instruction: Given the following certain text, thought for its next word and "
    "the gold next word, you need to judge whether the thought for generating the next "
    "word is consistent based on the reasoning process and the given text. For "
    "consistency, we mean that the thought only needs to generally entail the gold next "
    "word in reasoning and does NOT need to be specific on the gold next words.\n"
    "\n"
    "Context: {<context>}\n"
    "Thought: {<thought>}\n"
    "Gold Next Word: {<next_word>}\n"
    "\n"
    "Now please give me your reasoning and judgement, i.e. True or False, for the "
    "consistency of thought and gold next word based on the above information.\n"
    "\n"
    "Reasoning: Let's think step by step. \n"
    "Judgement:";

void replace_slot(std::string& s, const std::string& slot, const std::string& value) {
  auto pos = s.find(slot);
  if (pos != std::string::npos) s.replace(pos, slot.size(), value);
}

}  // namespace

std::string normalize_word(const std::string& surface) {
  return text::to_lower_ascii(text::strip_edge_punctuation(surface));
}

bool classify_exact(const std::string& predicted_word, const std::string& gold_word) {
  auto p = normalize_word(predicted_word);
  return !p.empty() && p == normalize_word(gold_word);
}

std::string judge_template() { return kJudgeTemplate; }

provider::ChatRequest build_judge_prompt(const std::string& context, const std::string& thought,
                                         const std::string& gold_word,
                                         const JudgeConfig& cfg) {
  if (thought.empty()) {
    throw std::invalid_argument("judge prompt requires a non-empty thought");
  }
  std::string prompt = kJudgeTemplate;
  replace_slot(prompt, "{<context>}", context);
  replace_slot(prompt, "{<thought>}", thought);
  replace_slot(prompt, "{<next_word>}", gold_word);

  provider::ChatRequest req;
  req.model = cfg.model;
  req.max_output_tokens = cfg.max_output_tokens;
  req.messages.push_back({provider::Role::kUser, std::move(prompt)});
  return req;
}

JudgeVerdict parse_judgement(const std::string& content) {
  auto jpos = content.rfind("Judgement:");
  if (jpos == std::string::npos) {
    throw JudgeParseError("missing 'Judgement:' label");
  }
  JudgeVerdict verdict;
  verdict.raw_content = content;

  bool found = false;
  for (const auto& token : text::split_whitespace(content.substr(jpos + 10))) {
    auto word = text::to_lower_ascii(text::strip_edge_punctuation(token));
    if (word == "true") {
      verdict.consistent = true;
      found = true;
      break;
    }
    if (word == "false") {
      verdict.consistent = false;
      found = true;
      break;
    }
  }
  if (!found) {
    throw JudgeParseError("no True/False token after 'Judgement:'");
  }

  auto rpos = content.find("Reasoning:");
  if (rpos != std::string::npos && rpos < jpos) {
    verdict.reasoning = text::trim(content.substr(rpos + 10, jpos - (rpos + 10)));
  }
  return verdict;
}

std::string judge_retry_reminder() {
  return "Respond using exactly the label 'Judgement:' followed by True or False.";
}

ThoughtRecord categorize(provider::Provider& judge, ThoughtRecord record,
                         const JudgeConfig& cfg) {
  if (record.failed()) {
    return record;
  }
  if (classify_exact(record.predicted_word, record.gold_word)) {
    record.category = Category::kExactMatch;
    return record;
  }

  auto request = build_judge_prompt(record.context, record.raw_thought, record.gold_word, cfg);
  request.request_tag = "judge:" + record.record_id();

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      request.messages.back().content += "\n\n" + judge_retry_reminder();
      request.request_tag = "judge-retry:" + record.record_id();
    }
    try {
      auto response = judge.complete(request);
      record.usage.prompt_tokens += response.usage.prompt_tokens;
      record.usage.completion_tokens += response.usage.completion_tokens;
      auto verdict = parse_judgement(response.content);
      record.category =
          verdict.consistent ? Category::kSoftConsistent : Category::kUnpredictable;
      if (!verdict.reasoning.empty()) record.judge_reasoning = verdict.reasoning;
      return record;
    } catch (const JudgeParseError& e) {
      log::warn("check", std::string("judge parse failure: ") + e.what(),
                record.record_id());
      if (attempt == 1) break;
    } catch (const provider::ProviderError& e) {
      log::error("check", std::string("judge provider failure: ") + e.what(),
                 record.record_id());
      break;
    }
  }
  record.category = Category::kUnpredictable;
  record.add_flag(kFlagJudgeFailed);
  return record;
}

}  // namespace tow::consistency
