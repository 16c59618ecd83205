#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tow/consistency.hpp"
#include "tow/corpus.hpp"
#include "tow/denoise.hpp"
#include "tow/emitter.hpp"
#include "tow/provider.hpp"
#include "tow/record.hpp"
#include "tow/thoughtgen.hpp"

namespace tow::pipeline {

int default_jobs();

// Everything a run needs; populated from CLI flags plus the config file.
struct Settings {
  std::string corpus_path;
  std::string out_dir = "out";

  std::uint64_t seed = 42;
  std::size_t per_doc = 15;
  std::string stopwords_path;  // empty: builtin list

  std::string fewshot_path;  // empty: bundled default
  std::size_t max_context_chars = 4000;
  int max_output_tokens = 512;

  std::string provider = "http";  // http | mock
  std::string generator_endpoint = "https://api.openai.com/v1/chat/completions";
  std::string judge_endpoint = "https://api.openai.com/v1/chat/completions";
  std::string generator_model = "gpt-4o";
  std::string judge_model = "gpt-4o-mini";
  std::string cache_dir;  // empty: <out_dir>/cache
  int max_attempts = 5;
  int backoff_ms = 250;
  int timeout_sec = 60;

  std::string mock_fixtures;
  double mock_fault_rate = 0.0;
  bool mock_fallback = false;

  bool skip_short = false;
  std::string tag_open = "<ToW>";
  std::string tag_close = "</ToW>";
  std::string tokenizer = "ws";

  int jobs = default_jobs();
  bool strict = false;
};

json settings_to_json(const Settings& settings);
std::string config_hash(const Settings& settings);

emitter::TagConfig tag_config(const Settings& settings);
thoughtgen::GenerationPromptConfig generation_config(const Settings& settings);
consistency::JudgeConfig judge_config(const Settings& settings);
denoise::DenoiseConfig denoise_config(const Settings& settings);
const corpus::StopwordList& stopword_list(const Settings& settings);

// role is "generator" or "judge"; http providers get their credential from
// the role env vars. Wrapped in a response cache unless caching is off.
std::shared_ptr<provider::Provider> make_provider(const Settings& settings,
                                                  const std::string& role);

struct SampleOutput {
  std::vector<corpus::Document> documents;
  std::vector<corpus::LoadError> load_errors;
  std::vector<corpus::WordTarget> targets;  // sorted by (doc_id, byte_start)
};

SampleOutput run_sample(const Settings& settings);

void write_targets(const std::string& path, const std::vector<corpus::WordTarget>& targets);
std::vector<corpus::WordTarget> read_targets(const std::string& path);

std::vector<ThoughtRecord> run_generate(provider::Provider& prov,
                                        const std::vector<corpus::Document>& documents,
                                        const std::vector<corpus::WordTarget>& targets,
                                        const Settings& settings);

std::vector<ThoughtRecord> run_check(provider::Provider& judge,
                                     std::vector<ThoughtRecord> records,
                                     const Settings& settings);

std::vector<ThoughtRecord> run_denoise(provider::Provider& prov,
                                       std::vector<ThoughtRecord> records,
                                       const Settings& settings);

// Writes corpus_raw.jsonl plus one corpus per (non-raw paradigm x
// composition); returns the written file names.
std::vector<std::string> run_emit(const Settings& settings,
                                  const std::vector<corpus::Document>& documents,
                                  const std::vector<ThoughtRecord>& records);

// Appends one entry to <out_dir>/manifest.json (a JSON array).
void append_manifest(const std::string& out_dir, const json& entry);

struct PipelineResult {
  json manifest_entry;
  std::vector<std::string> output_files;
};

PipelineResult run_pipeline(const Settings& settings);

}  // namespace tow::pipeline
