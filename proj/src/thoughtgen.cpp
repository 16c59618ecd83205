#include "tow/thoughtgen.hpp"

#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/text.hpp"

namespace tow::thoughtgen {

namespace {

constexpr const char* kGenerationTemplate =
    "Task Instruction: Given certain text, you need to predict the next word of it. "
    "Moreover, before your output, you could first give short thoughts about how you "
    "infer the next word based on the provided context.\n"
    "\n"
    "Here are five examples for the task:\n"
    "Example 0: {<ex0>}\n"
    "\n"
    "Example 1: {<ex1>}\n"
    "\n"
    "Example 2: {<ex2>}\n"
    "\n"
    "Example 3: {<ex3>}\n"
    "\n"
    "Example 4: {<ex4>}\n"
    "\n"
    "Now please give me your prediction for the thought and next word based on the "
    "following context:\n"
    "{<context>}\n"
    "\n"
    "Thought:\n"
    "Next Word:";

void replace_slot(std::string& s, const std::string& slot, const std::string& value) {
  auto pos = s.find(slot);
  while (pos != std::string::npos) {
    s.replace(pos, slot.size(), value);
    pos = s.find(slot, pos + value.size());
  }
}

}  // namespace

const std::vector<FewshotExample>& default_fewshot() {
  static const std::vector<FewshotExample> examples = {
      {"The sun rises in the",
       "The sentence describes the direction of sunrise, which is a well-known compass "
       "direction.",
       "east"},
      {"Plants absorb carbon dioxide and release",
       "The sentence contrasts what plants take in with the gas they give off during "
       "photosynthesis.",
       "oxygen"},
      {"It was raining hard, so she opened her umbrella before stepping",
       "Opening an umbrella happens right before leaving shelter, so the next word likely "
       "describes going out.",
       "outside"},
      {"Two plus two equals",
       "The context is an arithmetic sum whose result is a small number written as a word.",
       "four"},
      {"The capital of France is",
       "The sentence states a geography fact, and the capital city of France is well known.",
       "Paris"},
  };
  return examples;
}

GenerationPromptConfig load_fewshot(const std::string& path) {
  GenerationPromptConfig cfg;
  json j = json::parse(jsonio::read_file(path));
  cfg.template_version = j.value("template_version", "fewshot-custom");
  cfg.fewshot.clear();
  for (const auto& e : j.at("examples")) {
    cfg.fewshot.push_back({e.at("context").get<std::string>(),
                           e.at("thought").get<std::string>(),
                           e.at("next_word").get<std::string>()});
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const GenerationPromptConfig& cfg) {
  if (cfg.fewshot.size() != 5) {
    throw std::invalid_argument("generation prompt needs exactly 5 few-shot examples, got " +
                                std::to_string(cfg.fewshot.size()));
  }
  for (const auto& e : cfg.fewshot) {
    if (e.next_word.empty() || text::split_whitespace(e.next_word).size() != 1) {
      throw std::invalid_argument("few-shot next_word must be a single token: '" +
                                  e.next_word + "'");
    }
  }
  if (cfg.max_context_chars == 0) {
    throw std::invalid_argument("max_context_chars must be positive");
  }
}

std::string generation_template() { return kGenerationTemplate; }

std::string render_fewshot_example(const FewshotExample& example) {
  return "Context: " + example.context + "\nThought: " + example.thought +
         "\nNext Word: " + example.next_word;
}

std::string truncate_context_left(const std::string& context, std::size_t max_chars) {
  if (context.size() <= max_chars) return context;
  std::size_t earliest = context.size() - max_chars;
  std::size_t ws = earliest;
  while (ws < context.size() && !text::is_ascii_space(context[ws])) ++ws;
  if (ws < context.size()) {
    while (ws < context.size() && text::is_ascii_space(context[ws])) ++ws;
    if (ws < context.size()) return context.substr(ws);
  }
  // One token larger than the budget: cut on a UTF-8 boundary instead.
  std::size_t cut = earliest;
  while (cut < context.size() &&
         (static_cast<unsigned char>(context[cut]) & 0xc0) == 0x80) {
    ++cut;
  }
  return context.substr(cut);
}

provider::ChatRequest build_generation_prompt(const std::string& context,
                                              const GenerationPromptConfig& cfg) {
  if (context.empty()) {
    throw std::invalid_argument("generation context must be non-empty");
  }
  validate_config(cfg);
  std::string prompt = kGenerationTemplate;
  for (std::size_t i = 0; i < 5; ++i) {
    replace_slot(prompt, "{<ex" + std::to_string(i) + ">}",
                 render_fewshot_example(cfg.fewshot[i]));
  }
  replace_slot(prompt, "{<context>}", truncate_context_left(context, cfg.max_context_chars));

  provider::ChatRequest req;
  req.model = cfg.model;
  req.max_output_tokens = cfg.max_output_tokens;
  req.messages.push_back({provider::Role::kUser, std::move(prompt)});
  return req;
}

ParsedGeneration parse_generation(const std::string& content) {
  auto tpos = content.rfind("Thought:");
  if (tpos == std::string::npos) {
    throw ParseError("missing 'Thought:' label");
  }
  auto npos = content.find("Next Word:", tpos);
  if (npos == std::string::npos) {
    throw ParseError("missing 'Next Word:' label");
  }
  ParsedGeneration out;
  out.thought = text::trim(content.substr(tpos + 8, npos - (tpos + 8)));
  if (out.thought.empty()) {
    throw ParseError("empty thought");
  }
  auto tokens = text::split_whitespace(content.substr(npos + 10));
  if (tokens.empty()) {
    throw ParseError("empty next-word prediction");
  }
  out.predicted_word = text::strip_edge_punctuation(tokens.front());
  if (out.predicted_word.empty()) {
    throw ParseError("next-word prediction has no word characters");
  }
  return out;
}

std::string retry_reminder() {
  return "Respond using exactly the labels 'Thought:' and 'Next Word:'.";
}

ThoughtRecord generate_thought(provider::Provider& prov, const corpus::Document& doc,
                               const corpus::WordTarget& target,
                               const GenerationPromptConfig& cfg) {
  if (target.byte_start == 0) {
    throw std::invalid_argument("target at document start has no context");
  }
  if (target.byte_end > doc.text.size() ||
      doc.text.compare(target.byte_start, target.byte_end - target.byte_start,
                       target.surface) != 0) {
    throw std::invalid_argument("target span does not match document text: " +
                                target.doc_id + ":" + std::to_string(target.byte_start));
  }

  ThoughtRecord record;
  record.doc_id = doc.doc_id;
  record.target = target;
  record.gold_word = target.surface;
  record.gold_stripped = text::strip_edge_punctuation(target.surface);
  record.template_version = cfg.template_version;
  record.context =
      truncate_context_left(doc.text.substr(0, target.byte_start), cfg.max_context_chars);

  auto request = build_generation_prompt(doc.text.substr(0, target.byte_start), cfg);
  request.request_tag = "generate:" + record.record_id();

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      request.messages.back().content += "\n\n" + retry_reminder();
      request.request_tag = "generate-retry:" + record.record_id();
    }
    try {
      auto response = prov.complete(request);
      record.usage.prompt_tokens += response.usage.prompt_tokens;
      record.usage.completion_tokens += response.usage.completion_tokens;
      auto parsed = parse_generation(response.content);
      record.raw_thought = parsed.thought;
      record.predicted_word = parsed.predicted_word;
      return record;
    } catch (const ParseError& e) {
      log::warn("generate", std::string("parse failure: ") + e.what(), record.record_id());
      if (attempt == 1) break;
    } catch (const provider::ProviderError& e) {
      log::error("generate", std::string("provider failure: ") + e.what(),
                 record.record_id());
      break;
    }
  }
  record.add_flag(kFlagGenerationFailed);
  return record;
}

}  // namespace tow::thoughtgen
