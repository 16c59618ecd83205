#include "tow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <thread>

#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/sha256.hpp"
#include "tow/text.hpp"
#include "tow/workpool.hpp"

namespace fs = std::filesystem;

namespace tow::pipeline {

int default_jobs() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(8u, hw));
}

json settings_to_json(const Settings& s) {
  return json{{"corpus_path", s.corpus_path},
              {"out_dir", s.out_dir},
              {"seed", s.seed},
              {"per_doc", s.per_doc},
              {"stopwords_path", s.stopwords_path},
              {"fewshot_path", s.fewshot_path},
              {"max_context_chars", s.max_context_chars},
              {"max_output_tokens", s.max_output_tokens},
              {"provider", s.provider},
              {"generator_endpoint", s.generator_endpoint},
              {"judge_endpoint", s.judge_endpoint},
              {"generator_model", s.generator_model},
              {"judge_model", s.judge_model},
              {"cache_dir", s.cache_dir},
              {"max_attempts", s.max_attempts},
              {"backoff_ms", s.backoff_ms},
              {"timeout_sec", s.timeout_sec},
              {"mock_fixtures", s.mock_fixtures},
              {"mock_fault_rate", s.mock_fault_rate},
              {"mock_fallback", s.mock_fallback},
              {"skip_short", s.skip_short},
              {"tag_open", s.tag_open},
              {"tag_close", s.tag_close},
              {"tokenizer", s.tokenizer},
              {"jobs", s.jobs},
              {"strict", s.strict}};
}

std::string config_hash(const Settings& settings) {
  return sha256_hex(jsonio::dump(settings_to_json(settings)));
}

emitter::TagConfig tag_config(const Settings& settings) {
  return {settings.tag_open, settings.tag_close};
}

thoughtgen::GenerationPromptConfig generation_config(const Settings& settings) {
  thoughtgen::GenerationPromptConfig cfg;
  if (settings.fewshot_path.empty()) {
    cfg.fewshot = thoughtgen::default_fewshot();
  } else {
    cfg = thoughtgen::load_fewshot(settings.fewshot_path);
  }
  cfg.max_context_chars = settings.max_context_chars;
  cfg.model = settings.generator_model;
  cfg.max_output_tokens = settings.max_output_tokens;
  return cfg;
}

consistency::JudgeConfig judge_config(const Settings& settings) {
  consistency::JudgeConfig cfg;
  cfg.model = settings.judge_model;
  cfg.max_output_tokens = settings.max_output_tokens;
  return cfg;
}

denoise::DenoiseConfig denoise_config(const Settings& settings) {
  denoise::DenoiseConfig cfg;
  cfg.model = settings.judge_model;
  cfg.max_output_tokens = settings.max_output_tokens;
  cfg.skip_short = settings.skip_short;
  return cfg;
}

const corpus::StopwordList& stopword_list(const Settings& settings) {
  if (settings.stopwords_path.empty()) {
    return corpus::StopwordList::builtin();
  }
  static std::map<std::string, corpus::StopwordList> loaded;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = loaded.find(settings.stopwords_path);
  if (it == loaded.end()) {
    it = loaded
             .emplace(settings.stopwords_path,
                      corpus::StopwordList::from_file(settings.stopwords_path))
             .first;
  }
  return it->second;
}

std::shared_ptr<provider::Provider> make_provider(const Settings& settings,
                                                  const std::string& role) {
  std::shared_ptr<provider::Provider> inner;
  if (settings.provider == "mock") {
    provider::MockOptions opts;
    opts.fixtures_path = settings.mock_fixtures;
    opts.fault_rate = settings.mock_fault_rate;
    opts.refusal_fallback = settings.mock_fallback;
    inner = std::make_shared<provider::MockProvider>(opts);
  } else if (settings.provider == "http") {
    provider::HttpOptions opts;
    opts.endpoint =
        role == "judge" ? settings.judge_endpoint : settings.generator_endpoint;
    opts.api_key = provider::resolve_api_key(role);
    opts.max_attempts = settings.max_attempts;
    opts.backoff_initial_ms = settings.backoff_ms;
    opts.timeout_sec = settings.timeout_sec;
    opts.max_inflight = settings.jobs;
    inner = std::make_shared<provider::HttpProvider>(opts);
  } else {
    throw std::invalid_argument("unknown provider (want http or mock): " +
                                settings.provider);
  }
  std::string cache_dir =
      settings.cache_dir.empty() ? settings.out_dir + "/cache" : settings.cache_dir;
  if (cache_dir == "off") return inner;
  return std::make_shared<provider::CachedProvider>(inner, cache_dir + "/" + role);
}

SampleOutput run_sample(const Settings& settings) {
  SampleOutput out;
  auto loaded = corpus::load_documents(settings.corpus_path);
  out.documents = std::move(loaded.documents);
  out.load_errors = std::move(loaded.errors);
  for (const auto& err : out.load_errors) {
    log::warn("sample", err.message, err.where);
  }

  const auto& stopwords = stopword_list(settings);
  for (const auto& doc : out.documents) {
    auto targets = corpus::sample_targets(doc, stopwords, settings.per_doc,
                                          settings.seed);
    out.targets.insert(out.targets.end(), targets.begin(), targets.end());
  }
  std::sort(out.targets.begin(), out.targets.end(),
            [](const corpus::WordTarget& a, const corpus::WordTarget& b) {
              return std::tie(a.doc_id, a.byte_start) < std::tie(b.doc_id, b.byte_start);
            });
  log::info("sample", "sampled " + std::to_string(out.targets.size()) + " targets from " +
                          std::to_string(out.documents.size()) + " documents");
  return out;
}

void write_targets(const std::string& path, const std::vector<corpus::WordTarget>& targets) {
  std::string body;
  for (const auto& t : targets) {
    body += jsonio::dump(json{{"doc_id", t.doc_id},
                              {"byte_start", t.byte_start},
                              {"byte_end", t.byte_end},
                              {"surface", t.surface}});
    body += '\n';
  }
  jsonio::write_file_atomic(path, body);
}

std::vector<corpus::WordTarget> read_targets(const std::string& path) {
  std::vector<corpus::WordTarget> out;
  std::size_t lineno = 0;
  for (const auto& line : jsonio::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      corpus::WordTarget t;
      t.doc_id = j.at("doc_id").get<std::string>();
      t.byte_start = j.at("byte_start").get<std::size_t>();
      t.byte_end = j.at("byte_end").get<std::size_t>();
      t.surface = j.at("surface").get<std::string>();
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + "#" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ThoughtRecord> run_generate(provider::Provider& prov,
                                        const std::vector<corpus::Document>& documents,
                                        const std::vector<corpus::WordTarget>& targets,
                                        const Settings& settings) {
  auto cfg = generation_config(settings);
  std::map<std::string, const corpus::Document*> doc_by_id;
  for (const auto& doc : documents) doc_by_id[doc.doc_id] = &doc;

  std::vector<ThoughtRecord> records(targets.size());
  workpool::parallel_for(
      static_cast<std::size_t>(settings.jobs), targets.size(), [&](std::size_t i) {
        const auto& target = targets[i];
        auto it = doc_by_id.find(target.doc_id);
        if (it == doc_by_id.end()) {
          throw std::runtime_error("target references unknown document: " + target.doc_id);
        }
        records[i] = thoughtgen::generate_thought(prov, *it->second, target, cfg);
        if (settings.strict && records[i].failed()) {
          throw std::runtime_error("generation failed for record " +
                                   records[i].record_id());
        }
      });

  std::sort(records.begin(), records.end(), [](const ThoughtRecord& a, const ThoughtRecord& b) {
    return std::tie(a.doc_id, a.target.byte_start) < std::tie(b.doc_id, b.target.byte_start);
  });
  return records;
}

std::vector<ThoughtRecord> run_check(provider::Provider& judge,
                                     std::vector<ThoughtRecord> records,
                                     const Settings& settings) {
  auto cfg = judge_config(settings);
  workpool::parallel_for(
      static_cast<std::size_t>(settings.jobs), records.size(), [&](std::size_t i) {
        records[i] = consistency::categorize(judge, std::move(records[i]), cfg);
        if (settings.strict && records[i].has_flag(kFlagJudgeFailed)) {
          throw std::runtime_error("judge failed for record " + records[i].record_id());
        }
      });
  return records;
}

std::vector<ThoughtRecord> run_denoise(provider::Provider& prov,
                                       std::vector<ThoughtRecord> records,
                                       const Settings& settings) {
  auto cfg = denoise_config(settings);
  workpool::parallel_for(
      static_cast<std::size_t>(settings.jobs), records.size(), [&](std::size_t i) {
        records[i] = denoise::denoise_record(prov, std::move(records[i]), cfg);
        if (settings.strict && records[i].has_flag(kFlagNotDenoised)) {
          throw std::runtime_error("denoise failed for record " + records[i].record_id());
        }
      });
  return records;
}

std::vector<std::string> run_emit(const Settings& settings,
                                  const std::vector<corpus::Document>& documents,
                                  const std::vector<ThoughtRecord>& records) {
  auto tags = tag_config(settings);
  std::map<std::string, std::vector<ThoughtRecord>> by_doc;
  for (const auto& record : records) by_doc[record.doc_id].push_back(record);
  for (auto& [_, doc_records] : by_doc) {
    std::sort(doc_records.begin(), doc_records.end(),
              [](const ThoughtRecord& a, const ThoughtRecord& b) {
                return a.target.byte_start < b.target.byte_start;
              });
  }

  fs::create_directories(settings.out_dir);
  std::vector<std::string> files;

  emitter::write_augmented(settings.out_dir + "/corpus_raw.jsonl", documents);
  files.push_back("corpus_raw.jsonl");

  const denoise::Paradigm paradigms[] = {denoise::Paradigm::kNoDeN,
                                         denoise::Paradigm::kPartDeN,
                                         denoise::Paradigm::kTow};
  const emitter::Composition compositions[] = {emitter::Composition::kEmOnly,
                                               emitter::Composition::kWithoutUnpredictable,
                                               emitter::Composition::kFull};
  static const std::vector<ThoughtRecord> kNoRecords;
  for (auto paradigm : paradigms) {
    for (auto composition : compositions) {
      std::vector<corpus::Document> augmented;
      augmented.reserve(documents.size());
      for (const auto& doc : documents) {
        auto it = by_doc.find(doc.doc_id);
        const auto& doc_records = it == by_doc.end() ? kNoRecords : it->second;
        corpus::Document out_doc;
        out_doc.doc_id = doc.doc_id;
        out_doc.text =
            emitter::augment_document(doc, doc_records, paradigm, composition, tags);
        augmented.push_back(std::move(out_doc));
      }
      std::string name = "corpus_" + denoise::paradigm_name(paradigm) + "_" +
                         emitter::composition_name(composition) + ".jsonl";
      emitter::write_augmented(settings.out_dir + "/" + name, augmented);
      files.push_back(name);
    }
  }
  return files;
}

void append_manifest(const std::string& out_dir, const json& entry) {
  fs::create_directories(out_dir);
  std::string path = out_dir + "/manifest.json";
  json manifest = json::array();
  if (fs::exists(path)) {
    try {
      manifest = json::parse(jsonio::read_file(path));
      if (!manifest.is_array()) manifest = json::array();
    } catch (const std::exception& e) {
      log::warn("manifest", std::string("existing manifest unreadable, starting fresh: ") +
                                e.what());
      manifest = json::array();
    }
  }
  manifest.push_back(entry);
  jsonio::write_file_atomic(path, manifest.dump(2, ' ', false,
                                                nlohmann::json::error_handler_t::replace) +
                                      "\n");
}

namespace {

std::int64_t count_flag(const std::vector<ThoughtRecord>& records, const char* flag) {
  return std::count_if(records.begin(), records.end(),
                       [&](const ThoughtRecord& r) { return r.has_flag(flag); });
}

std::int64_t count_category(const std::vector<ThoughtRecord>& records, Category category) {
  return std::count_if(records.begin(), records.end(), [&](const ThoughtRecord& r) {
    return r.category && *r.category == category;
  });
}

struct CacheDelta {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
};

CacheDelta cache_delta(provider::Provider& prov, std::int64_t& last_hits,
                       std::int64_t& last_misses) {
  CacheDelta delta;
  if (auto* cached = dynamic_cast<provider::CachedProvider*>(&prov)) {
    delta.hits = cached->hits() - last_hits;
    delta.misses = cached->misses() - last_misses;
    last_hits = cached->hits();
    last_misses = cached->misses();
  }
  return delta;
}

}  // namespace

PipelineResult run_pipeline(const Settings& settings) {
  auto t0 = std::chrono::steady_clock::now();
  auto generation_cfg = generation_config(settings);

  auto sample = run_sample(settings);
  fs::create_directories(settings.out_dir);
  write_targets(settings.out_dir + "/targets.jsonl", sample.targets);

  auto generator = make_provider(settings, "generator");
  auto judge = make_provider(settings, "judge");
  std::int64_t gen_hits = 0;
  std::int64_t gen_misses = 0;
  std::int64_t judge_hits = 0;
  std::int64_t judge_misses = 0;

  auto records = run_generate(*generator, sample.documents, sample.targets, settings);
  auto gen_cache = cache_delta(*generator, gen_hits, gen_misses);
  std::int64_t generation_failed = count_flag(records, kFlagGenerationFailed);

  records = run_check(*judge, std::move(records), settings);
  auto check_cache = cache_delta(*judge, judge_hits, judge_misses);

  records = run_denoise(*judge, std::move(records), settings);
  auto denoise_cache = cache_delta(*judge, judge_hits, judge_misses);

  write_records(settings.out_dir + "/records.jsonl", records);
  auto files = run_emit(settings, sample.documents, records);

  auto t1 = std::chrono::steady_clock::now();
  double wall_sec = std::chrono::duration<double>(t1 - t0).count();

  json stages;
  stages["sample"] = {{"documents", sample.documents.size()},
                      {"load_errors", sample.load_errors.size()},
                      {"targets", sample.targets.size()}};
  stages["generate"] = {{"records", records.size()},
                        {"failed", generation_failed},
                        {"cache_hits", gen_cache.hits},
                        {"cache_misses", gen_cache.misses}};
  stages["check"] = {{"exact_match", count_category(records, Category::kExactMatch)},
                     {"soft_consistent", count_category(records, Category::kSoftConsistent)},
                     {"unpredictable", count_category(records, Category::kUnpredictable)},
                     {"judge_failed", count_flag(records, kFlagJudgeFailed)},
                     {"cache_hits", check_cache.hits},
                     {"cache_misses", check_cache.misses}};
  stages["denoise"] = {{"truncated", count_flag(records, kFlagTruncated)},
                       {"not_denoised", count_flag(records, kFlagNotDenoised)},
                       {"skipped_short", count_flag(records, kFlagSkippedShort)},
                       {"cache_hits", denoise_cache.hits},
                       {"cache_misses", denoise_cache.misses}};
  stages["emit"] = {{"corpora", files.size()},
                    {"records_included", records.size() - generation_failed},
                    {"records_excluded_failed", generation_failed}};

  PipelineResult result;
  result.output_files = files;
  result.output_files.push_back("targets.jsonl");
  result.output_files.push_back("records.jsonl");

  json entry;
  entry["run_id"] = config_hash(settings).substr(0, 12) + "-" + log::iso8601_now();
  entry["config_hash"] = config_hash(settings);
  entry["corpus_path"] = settings.corpus_path;
  entry["out_dir"] = settings.out_dir;
  entry["output_files"] = result.output_files;
  entry["seed"] = settings.seed;
  entry["jobs"] = settings.jobs;
  entry["stages"] = stages;
  entry["template_version"] = generation_cfg.template_version;
  entry["wall_time_sec"] = wall_sec;
  append_manifest(settings.out_dir, entry);
  result.manifest_entry = entry;

  log::info("pipeline", "finished in " + text::format_sig4(wall_sec) + "s; " +
                            std::to_string(records.size()) + " records, " +
                            std::to_string(generation_failed) + " failed");
  return result;
}

}  // namespace tow::pipeline
