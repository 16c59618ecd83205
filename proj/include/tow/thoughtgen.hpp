#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tow/provider.hpp"
#include "tow/record.hpp"

namespace tow::thoughtgen {

struct FewshotExample {
  std::string context;
  std::string thought;
  std::string next_word;  // single whitespace-free token
};

struct GenerationPromptConfig {
  std::vector<FewshotExample> fewshot;  // exactly 5
  std::size_t max_context_chars = 4000;
  std::string template_version = "fewshot-default-v1";
  std::string model = "gpt-4o";
  int max_output_tokens = 512;
};

class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The shipped default 5-shot set; identical to data/fewshot_default.json.
const std::vector<FewshotExample>& default_fewshot();

// Loads {template_version, examples:[{context,thought,next_word}]}.
GenerationPromptConfig load_fewshot(const std::string& path);

// Throws std::invalid_argument unless the config has exactly 5 examples with
// single-token next words.
void validate_config(const GenerationPromptConfig& cfg);

// Template with {<ex0>}..{<ex4>} and {<context>} slots still in place.
std::string generation_template();

std::string render_fewshot_example(const FewshotExample& example);

// Longest suffix of context that fits max_chars and starts right after a
// whitespace run; falls back to a UTF-8-aligned byte cut for one huge token.
std::string truncate_context_left(const std::string& context, std::size_t max_chars);

provider::ChatRequest build_generation_prompt(const std::string& context,
                                              const GenerationPromptConfig& cfg);

struct ParsedGeneration {
  std::string thought;
  std::string predicted_word;
};

// Anchors on the LAST "Thought:" label, then the following "Next Word:".
// Throws ParseError when either label (or either field) is missing.
ParsedGeneration parse_generation(const std::string& content);

// Reminder line appended to the prompt on the single parse-failure retry.
std::string retry_reminder();

ThoughtRecord generate_thought(provider::Provider& prov, const corpus::Document& doc,
                               const corpus::WordTarget& target,
                               const GenerationPromptConfig& cfg);

}  // namespace tow::thoughtgen
