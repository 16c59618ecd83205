#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tow/consistency.hpp"
#include "tow/corpus.hpp"
#include "tow/denoise.hpp"
#include "tow/emitter.hpp"
#include "tow/evalharness.hpp"
#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/pipeline.hpp"
#include "tow/record.hpp"
#include "tow/statkit.hpp"
#include "tow/text.hpp"
#include "tow/workpool.hpp"

namespace fs = std::filesystem;

using tow::ThoughtRecord;
using tow::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerateArgs {
  std::string targets;
  std::string out;
};

struct StageIoArgs {
  std::string in;
  std::string out;
};

struct EmitArgs {
  std::string records;
  std::string paradigm;
  std::string composition;
  std::string out;
};

struct StatsArgs {
  std::string raw;
  std::vector<std::string> augmented;
  bool json_stdout = false;
  std::string json_out;
};

struct EvalArgs {
  std::string bench;
  std::string shots;
  std::string out;
  std::string numeric_pattern;
  std::string mcq_pattern;
};

struct AnalyzeArgs {
  std::vector<std::string> runs;
  std::vector<std::string> tests;
  bool by_correct = false;
  std::string mode = "auto";
};

struct QualityArgs {
  std::string annotations;
};

std::string records_default(const tow::pipeline::Settings& s) {
  return s.out_dir + "/records.jsonl";
}

void require_option(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::vector<tow::corpus::Document> load_corpus_strict(const std::string& path) {
  auto loaded = tow::corpus::load_documents(path);
  for (const auto& err : loaded.errors) {
    tow::log::warn("corpus", err.message, err.where);
  }
  return std::move(loaded.documents);
}

int cmd_sample(const tow::pipeline::Settings& s) {
  auto sample = tow::pipeline::run_sample(s);
  fs::create_directories(s.out_dir);
  std::string path = s.out_dir + "/targets.jsonl";
  tow::pipeline::write_targets(path, sample.targets);
  std::printf("wrote %zu targets from %zu documents to %s\n", sample.targets.size(),
              sample.documents.size(), path.c_str());
  return 0;
}

int cmd_generate(const tow::pipeline::Settings& s, const GenerateArgs& args) {
  auto documents = load_corpus_strict(s.corpus_path);
  std::vector<tow::corpus::WordTarget> targets;
  if (!args.targets.empty()) {
    targets = tow::pipeline::read_targets(args.targets);
  } else {
    const auto& stopwords = tow::pipeline::stopword_list(s);
    for (const auto& doc : documents) {
      auto doc_targets = tow::corpus::sample_targets(doc, stopwords, s.per_doc, s.seed);
      targets.insert(targets.end(), doc_targets.begin(), doc_targets.end());
    }
  }

  auto prov = tow::pipeline::make_provider(s, "generator");
  auto records = tow::pipeline::run_generate(*prov, documents, targets, s);
  std::int64_t failed =
      std::count_if(records.begin(), records.end(),
                    [](const ThoughtRecord& r) { return r.failed(); });

  std::string out = args.out.empty() ? records_default(s) : args.out;
  fs::create_directories(fs::path(out).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(out).parent_path());
  tow::write_records(out, records);
  std::printf("wrote %zu records (%lld failed) to %s\n", records.size(),
              static_cast<long long>(failed), out.c_str());
  return 0;
}

int cmd_check(const tow::pipeline::Settings& s, const StageIoArgs& args) {
  std::string in = args.in.empty() ? records_default(s) : args.in;
  std::string out = args.out.empty() ? in : args.out;
  auto records = tow::read_records(in);
  auto judge = tow::pipeline::make_provider(s, "judge");
  records = tow::pipeline::run_check(*judge, std::move(records), s);

  std::map<std::string, std::int64_t> by_category;
  for (const auto& r : records) {
    if (r.category) ++by_category[tow::category_name(*r.category)];
  }
  tow::write_records(out, records);
  std::string summary;
  for (const auto& [name, count] : by_category) {
    summary += " " + name + "=" + std::to_string(count);
  }
  std::printf("categorized %zu records:%s -> %s\n", records.size(), summary.c_str(),
              out.c_str());
  return 0;
}

int cmd_denoise(const tow::pipeline::Settings& s, const StageIoArgs& args) {
  std::string in = args.in.empty() ? records_default(s) : args.in;
  std::string out = args.out.empty() ? in : args.out;
  auto records = tow::read_records(in);
  auto prov = tow::pipeline::make_provider(s, "judge");
  records = tow::pipeline::run_denoise(*prov, std::move(records), s);

  std::int64_t not_denoised = std::count_if(
      records.begin(), records.end(),
      [](const ThoughtRecord& r) { return r.has_flag(tow::kFlagNotDenoised); });
  tow::write_records(out, records);
  std::printf("denoised %zu records (%lld left raw) -> %s\n", records.size(),
              static_cast<long long>(not_denoised), out.c_str());
  return 0;
}

int cmd_emit(const tow::pipeline::Settings& s, const EmitArgs& args) {
  auto documents = load_corpus_strict(s.corpus_path);
  std::string records_path = args.records.empty() ? records_default(s) : args.records;
  auto records = tow::read_records(records_path);

  if (args.paradigm.empty() != args.composition.empty()) {
    throw UsageError("--paradigm and --composition must be given together");
  }

  if (args.paradigm.empty()) {
    auto files = tow::pipeline::run_emit(s, documents, records);
    std::printf("wrote %zu corpora to %s\n", files.size(), s.out_dir.c_str());
    return 0;
  }

  auto paradigm = tow::denoise::paradigm_from_name(args.paradigm);
  auto composition = tow::emitter::composition_from_name(args.composition);
  auto tags = tow::pipeline::tag_config(s);

  std::map<std::string, std::vector<ThoughtRecord>> by_doc;
  for (const auto& record : records) by_doc[record.doc_id].push_back(record);
  for (auto& [_, doc_records] : by_doc) {
    std::sort(doc_records.begin(), doc_records.end(),
              [](const ThoughtRecord& a, const ThoughtRecord& b) {
                return a.target.byte_start < b.target.byte_start;
              });
  }

  static const std::vector<ThoughtRecord> kNoRecords;
  std::vector<tow::corpus::Document> augmented;
  augmented.reserve(documents.size());
  for (const auto& doc : documents) {
    auto it = by_doc.find(doc.doc_id);
    const auto& doc_records = it == by_doc.end() ? kNoRecords : it->second;
    tow::corpus::Document out_doc;
    out_doc.doc_id = doc.doc_id;
    out_doc.text =
        tow::emitter::augment_document(doc, doc_records, paradigm, composition, tags);
    augmented.push_back(std::move(out_doc));
  }

  std::string out = args.out.empty()
                        ? s.out_dir + "/corpus_" + args.paradigm + "_" + args.composition +
                              ".jsonl"
                        : args.out;
  tow::emitter::write_augmented(out, augmented);
  std::printf("wrote %zu documents (%s, %s) to %s\n", augmented.size(),
              args.paradigm.c_str(), args.composition.c_str(), out.c_str());
  return 0;
}

int cmd_stats(const tow::pipeline::Settings& s, const StatsArgs& args) {
  require_option(args.raw, "--raw");
  auto tags = tow::pipeline::tag_config(s);
  auto tokenizer = tow::emitter::make_tokenizer(s.tokenizer, tags);
  auto raw = tow::emitter::read_augmented(args.raw);

  std::vector<tow::emitter::StatsRow> rows;
  rows.push_back(tow::emitter::corpus_stats(raw, raw, *tokenizer, tags, "raw"));
  for (const auto& path : args.augmented) {
    auto augmented = tow::emitter::read_augmented(path);
    std::string label = fs::path(path).stem().string();
    rows.push_back(tow::emitter::corpus_stats(raw, augmented, *tokenizer, tags, label));
  }

  json report;
  report["tokenizer"] = tokenizer->tag();
  report["rows"] = json::array();
  for (const auto& row : rows) {
    report["rows"].push_back(json{{"label", row.label},
                                  {"total_tokens", row.total_tokens},
                                  {"tow_count", row.tow_count},
                                  {"tokens_per_tow", row.tokens_per_tow}});
  }

  if (args.json_stdout) {
    std::printf("%s\n", report.dump(2, ' ', false,
                                    nlohmann::json::error_handler_t::replace)
                            .c_str());
  } else {
    std::size_t label_width = 5;
    for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
    std::printf("%-*s  %14s  %10s  %14s\n", static_cast<int>(label_width), "label",
                "total_tokens", "tow_count", "tokens_per_tow");
    for (const auto& row : rows) {
      std::printf("%-*s  %14lld  %10lld  %14.2f\n", static_cast<int>(label_width),
                  row.label.c_str(), static_cast<long long>(row.total_tokens),
                  static_cast<long long>(row.tow_count), row.tokens_per_tow);
    }
    std::printf("tokenizer: %s\n", tokenizer->tag().c_str());
  }
  if (!args.json_out.empty()) {
    tow::jsonio::write_file_atomic(
        args.json_out,
        report.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");
  }
  return 0;
}

int cmd_eval(const tow::pipeline::Settings& s, const EvalArgs& args) {
  require_option(args.bench, "--bench");
  auto examples = tow::evalharness::read_bench(args.bench);

  tow::evalharness::EvalRunConfig cfg;
  cfg.model = s.generator_model;
  cfg.max_output_tokens = s.max_output_tokens;
  cfg.shots = args.shots.empty() ? tow::evalharness::default_mcq_shots()
                                 : tow::evalharness::load_mcq_shots(args.shots);
  if (!args.numeric_pattern.empty()) cfg.extract.numeric_pattern = args.numeric_pattern;
  if (!args.mcq_pattern.empty()) cfg.extract.mcq_pattern = args.mcq_pattern;
  cfg.tags = tow::pipeline::tag_config(s);
  cfg.strict = s.strict;

  auto prov = tow::pipeline::make_provider(s, "generator");
  auto tokenizer = tow::emitter::make_tokenizer(s.tokenizer, cfg.tags);

  std::vector<tow::evalharness::EvalRecord> records(examples.size());
  tow::workpool::parallel_for(static_cast<std::size_t>(s.jobs), examples.size(),
                              [&](std::size_t i) {
                                records[i] = tow::evalharness::run_one(
                                    *prov, examples[i], cfg, *tokenizer);
                              });

  std::string out = args.out.empty() ? s.out_dir + "/eval.jsonl" : args.out;
  fs::create_directories(fs::path(out).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(out).parent_path());
  tow::evalharness::write_eval_records(out, records);

  auto result = tow::evalharness::score(records);
  std::printf("n=%zu accuracy=%.4f -> %s\n", result.n, result.accuracy, out.c_str());
  return 0;
}

bool run_has_kind(const std::vector<tow::evalharness::EvalRecord>& records,
                  tow::evalharness::EvalKind kind) {
  return std::any_of(records.begin(), records.end(),
                     [&](const auto& r) { return r.kind == kind; });
}

int cmd_analyze(const tow::pipeline::Settings& s, const AnalyzeArgs& args) {
  (void)s;
  if (args.runs.size() != 2) throw UsageError("--runs takes exactly two run files");
  auto records_a = tow::evalharness::read_eval_records(args.runs[0]);
  auto records_b = tow::evalharness::read_eval_records(args.runs[1]);
  std::string label_a = fs::path(args.runs[0]).stem().string();
  std::string label_b = fs::path(args.runs[1]).stem().string();

  auto score_a = tow::evalharness::score(records_a);
  auto score_b = tow::evalharness::score(records_b);
  std::printf("%s: n=%zu accuracy=%.4f\n", label_a.c_str(), score_a.n, score_a.accuracy);
  std::printf("%s: n=%zu accuracy=%.4f\n", label_b.c_str(), score_b.n, score_b.accuracy);
  std::printf("relative accuracy (%s vs %s): %s points\n", label_a.c_str(),
              label_b.c_str(),
              tow::evalharness::format_points(
                  tow::evalharness::relative_accuracy(score_a.accuracy, score_b.accuracy))
                  .c_str());

  const tow::evalharness::EvalKind kinds[] = {tow::evalharness::EvalKind::kNumeric,
                                              tow::evalharness::EvalKind::kMcq};
  for (auto kind : kinds) {
    if (!run_has_kind(records_a, kind) && !run_has_kind(records_b, kind)) continue;
    std::printf("formatting rate (proxy, %s): %s=%.4f %s=%.4f\n",
                tow::evalharness::kind_name(kind).c_str(), label_a.c_str(),
                tow::evalharness::formatting_rate(records_a, kind), label_b.c_str(),
                tow::evalharness::formatting_rate(records_b, kind));
  }

  const std::pair<std::string, const std::vector<tow::evalharness::EvalRecord>*> run_list[] =
      {{label_a, &records_a}, {label_b, &records_b}};
  for (const auto& [label, records] : run_list) {
    for (const auto& group : tow::evalharness::output_metrics(*records, args.by_correct)) {
      std::printf("%s [%s]: n=%zu mean_tow_count=%.2f mean_output_tokens=%.2f\n",
                  label.c_str(), group.label.c_str(), group.n, group.mean_tow_count,
                  group.mean_output_tokens);
    }
  }

  std::set<std::string> tests(args.tests.begin(), args.tests.end());
  for (const auto& name : tests) {
    if (name != "chi2" && name != "mcnemar") {
      throw UsageError("unknown test (want chi2 or mcnemar): " + name);
    }
  }

  if (tests.count("chi2") != 0) {
    auto correct_count = [](const std::vector<tow::evalharness::EvalRecord>& records) {
      return std::count_if(records.begin(), records.end(),
                           [](const auto& r) { return r.correct; });
    };
    std::int64_t correct_a = correct_count(records_a);
    std::int64_t correct_b = correct_count(records_b);
    tow::statkit::ContingencyTable table;
    table.rows = {{correct_a, static_cast<std::int64_t>(records_a.size()) - correct_a},
                  {correct_b, static_cast<std::int64_t>(records_b.size()) - correct_b}};
    table.row_labels = {label_a, label_b};
    table.col_labels = {"correct", "incorrect"};
    auto result = tow::statkit::chi_square_independence(table);
    std::printf("chi-square (run x correctness): stat=%s df=%d p=%s%s\n",
                tow::text::format_sig4(result.stat).c_str(), result.df,
                tow::text::format_sig4(result.p).c_str(),
                result.expected_below_5 ? " (warning: expected count < 5)" : "");
  }

  if (tests.count("mcnemar") != 0) {
    std::vector<std::pair<std::string, bool>> run_a;
    std::vector<std::pair<std::string, bool>> run_b;
    for (const auto& r : records_a) run_a.emplace_back(r.example_id, r.correct);
    for (const auto& r : records_b) run_b.emplace_back(r.example_id, r.correct);
    auto outcomes = tow::statkit::paired_outcomes(run_a, run_b);
    auto result = tow::statkit::mcnemar(outcomes,
                                        tow::statkit::mcnemar_mode_from_name(args.mode));
    if (result.method_used == "corrected") {
      std::printf("mcnemar (b=%lld c=%lld): method=%s stat=%s p=%s\n",
                  static_cast<long long>(outcomes.b), static_cast<long long>(outcomes.c),
                  result.method_used.c_str(),
                  tow::text::format_sig4(result.stat).c_str(),
                  tow::text::format_sig4(result.p).c_str());
    } else {
      std::printf("mcnemar (b=%lld c=%lld): method=%s p=%s\n",
                  static_cast<long long>(outcomes.b), static_cast<long long>(outcomes.c),
                  result.method_used.c_str(), tow::text::format_sig4(result.p).c_str());
    }
  }
  return 0;
}

int cmd_quality(const QualityArgs& args) {
  require_option(args.annotations, "--annotations");
  std::vector<tow::statkit::AgreementPair> pairs;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  for (const auto& line : tow::jsonio::read_lines(args.annotations)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = args.annotations + "#" + std::to_string(lineno);
    try {
      json j = json::parse(line);
      std::string id = j.at("id").get<std::string>();
      if (!seen.insert(id).second) {
        throw std::runtime_error("duplicate annotation id: " + id);
      }
      pairs.push_back({j.at("human").get<bool>(), j.at("model").get<bool>()});
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  if (pairs.empty()) throw std::runtime_error("no annotations in " + args.annotations);

  auto counts = tow::statkit::count_agreement(pairs);
  double kappa = tow::statkit::cohen_kappa_counts(counts);
  double rate = tow::statkit::non_fp_rate(counts.b, counts.n());
  std::printf("n=%lld (both-consistent=%lld model-only=%lld human-only=%lld both-inconsistent=%lld)\n",
              static_cast<long long>(counts.n()), static_cast<long long>(counts.a),
              static_cast<long long>(counts.b), static_cast<long long>(counts.c),
              static_cast<long long>(counts.d));
  std::printf("Cohen Kappa Score: %.2f\n", kappa * 100.0);
  std::printf("non-False-Positive Rate: %.2f%%\n", rate * 100.0);
  return 0;
}

int cmd_pipeline(const tow::pipeline::Settings& s) {
  auto result = tow::pipeline::run_pipeline(s);
  const auto& stages = result.manifest_entry.at("stages");
  std::printf("pipeline finished: %lld records (%lld generation failures), %zu output files in %s\n",
              stages.at("generate").at("records").get<long long>(),
              stages.at("generate").at("failed").get<long long>(),
              result.output_files.size(), s.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tow::pipeline::Settings settings;
  std::string log_level = "info";
  bool dump_config = false;

  CLI::App app{"Annotate corpora with generated next-word thoughts and evaluate the results"};
  app.name("towforge");
  app.fallthrough(true);
  app.set_config("--config", "", "Read defaults from a TOML file (flags win)");
  app.add_flag("--dump-config", dump_config, "Print the effective config and exit");

  app.add_option("--corpus", settings.corpus_path, "Input corpus: JSONL file or directory");
  app.add_option("--out", settings.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--seed", settings.seed, "Seed for all sampling")->capture_default_str();
  app.add_option("--per-doc", settings.per_doc, "Target words sampled per document")
      ->capture_default_str();
  app.add_option("--stopwords", settings.stopwords_path,
                 "Stopword list file (default: builtin English list)");
  app.add_option("--fewshot", settings.fewshot_path,
                 "Generation few-shot examples JSON (default: bundled)");
  app.add_option("--max-context-chars", settings.max_context_chars,
                 "Left-truncate generation contexts to this many bytes")
      ->capture_default_str();
  app.add_option("--max-output-tokens", settings.max_output_tokens,
                 "Completion token budget per request")
      ->capture_default_str();

  app.add_option("--provider", settings.provider, "Chat completion backend")
      ->check(CLI::IsMember({"http", "mock"}))
      ->capture_default_str();
  app.add_option("--generator-endpoint", settings.generator_endpoint,
                 "Chat completions URL for the generator role")
      ->capture_default_str();
  app.add_option("--judge-endpoint", settings.judge_endpoint,
                 "Chat completions URL for the judge role")
      ->capture_default_str();
  app.add_option("--generator-model", settings.generator_model, "Model for thought generation")
      ->capture_default_str();
  app.add_option("--judge-model", settings.judge_model,
                 "Model for consistency checks and denoising")
      ->capture_default_str();
  app.add_option("--cache-dir", settings.cache_dir,
                 "Response cache directory (default <out>/cache; \"off\" disables)");
  app.add_option("--max-attempts", settings.max_attempts, "HTTP attempts per request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--backoff-ms", settings.backoff_ms, "Initial retry backoff in ms")
      ->capture_default_str();
  app.add_option("--timeout-sec", settings.timeout_sec, "Per-request timeout in seconds")
      ->capture_default_str();

  app.add_option("--mock-fixtures", settings.mock_fixtures,
                 "Fixture file for the mock provider");
  app.add_option("--mock-fault-rate", settings.mock_fault_rate,
                 "Fraction of mock responses replaced with malformed output")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_flag("--mock-fallback", settings.mock_fallback,
               "Mock provider answers unknown requests with a refusal");

  app.add_flag("--skip-short", settings.skip_short,
               "Keep thoughts already within the length budget as-is");
  app.add_option("--tag-open", settings.tag_open, "Opening thought tag")
      ->capture_default_str();
  app.add_option("--tag-close", settings.tag_close, "Closing thought tag")
      ->capture_default_str();
  app.add_option("--tokenizer", settings.tokenizer,
                 "Token counter: ws or cmd:<path>")
      ->capture_default_str();
  app.add_option("--jobs", settings.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--strict", settings.strict, "Treat per-record failures as fatal");
  app.add_option("--log-level", log_level, "Log threshold")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}))
      ->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Pick target words and write targets.jsonl");

  GenerateArgs generate_args;
  auto* generate =
      app.add_subcommand("generate", "Generate a thought for every target word");
  generate->add_option("--targets", generate_args.targets,
                       "Existing targets.jsonl (default: sample in-process)");
  generate->add_option("--out", generate_args.out,
                       "Records output path (default <out>/records.jsonl)");

  StageIoArgs check_args;
  auto* check = app.add_subcommand("check", "Categorize records by thought consistency");
  check->add_option("--in", check_args.in, "Records input (default <out>/records.jsonl)");
  check->add_option("--out", check_args.out, "Records output (default: same as --in)");

  StageIoArgs denoise_args;
  auto* denoise = app.add_subcommand("denoise", "Shorten thoughts to the length budget");
  denoise->add_option("--in", denoise_args.in,
                      "Records input (default <out>/records.jsonl)");
  denoise->add_option("--out", denoise_args.out, "Records output (default: same as --in)");

  EmitArgs emit_args;
  auto* emit = app.add_subcommand(
      "emit", "Inject thoughts into documents as tagged spans");
  emit->add_option("--records", emit_args.records,
                   "Records input (default <out>/records.jsonl)");
  emit->add_option("--paradigm", emit_args.paradigm, "Single corpus: thought variant")
      ->check(CLI::IsMember({"raw", "noden", "partden", "tow"}));
  emit->add_option("--composition", emit_args.composition,
                   "Single corpus: which categories to include")
      ->check(CLI::IsMember({"em-only", "no-unpred", "full"}));
  emit->add_option("--out", emit_args.out, "Single corpus output path");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Token and tag statistics per corpus");
  stats->add_option("--raw", stats_args.raw, "Raw corpus JSONL");
  stats->add_option("--augmented", stats_args.augmented,
                    "Augmented corpus JSONL (repeatable)")
      ->take_all();
  stats->add_flag("--json", stats_args.json_stdout, "Print JSON instead of a table");
  stats->add_option("--json-out", stats_args.json_out, "Also write the JSON report here");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Run a benchmark against a chat endpoint");
  eval->add_option("--bench", eval_args.bench, "Benchmark JSONL ({id, kind, question, options?, gold})");
  eval->add_option("--shots", eval_args.shots,
                   "Multiple-choice shot file (default: bundled 3-shot set)");
  eval->add_option("--endpoint", settings.generator_endpoint, "Chat completions URL");
  eval->add_option("--model", settings.generator_model, "Model under evaluation");
  eval->add_option("--max-tokens", settings.max_output_tokens,
                   "Completion token budget per request");
  eval->add_option("--out", eval_args.out, "Eval records output (default <out>/eval.jsonl)");
  eval->add_option("--numeric-pattern", eval_args.numeric_pattern,
                   "Override the numeric extraction regex");
  eval->add_option("--mcq-pattern", eval_args.mcq_pattern,
                   "Override the choice extraction regex");

  AnalyzeArgs analyze_args;
  auto* analyze =
      app.add_subcommand("analyze", "Compare two eval runs (accuracy, lengths, tests)");
  analyze->add_option("--runs", analyze_args.runs, "Two eval record files")
      ->expected(2);
  analyze->add_option("--tests", analyze_args.tests,
                      "Significance tests to run (chi2, mcnemar)")
      ->delimiter(',');
  analyze->add_flag("--by-correct", analyze_args.by_correct,
                    "Split output metrics by correctness");
  analyze->add_option("--mode", analyze_args.mode, "McNemar variant")
      ->check(CLI::IsMember({"auto", "exact", "corrected"}))
      ->capture_default_str();

  QualityArgs quality_args;
  auto* quality =
      app.add_subcommand("quality", "Agreement metrics for a human-vs-judge annotation file");
  quality->add_option("--annotations", quality_args.annotations,
                      "JSONL with {id, human, model} per line");

  auto* pipeline = app.add_subcommand(
      "pipeline", "Run sample, generate, check, denoise, and emit in one go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "towforge: %s\n", e.what());
    std::fprintf(stderr, "Run with --help for usage.\n");
    return 2;
  }

  tow::log::set_min_level(tow::log::level_from_name(log_level));

  if (dump_config) {
    std::printf("%s", app.config_to_str(true, true).c_str());
    return 0;
  }

  try {
    if (*sample || *pipeline) {
      require_option(settings.corpus_path, "--corpus");
      return *sample ? cmd_sample(settings) : cmd_pipeline(settings);
    }
    if (*generate) {
      require_option(settings.corpus_path, "--corpus");
      return cmd_generate(settings, generate_args);
    }
    if (*check) return cmd_check(settings, check_args);
    if (*denoise) return cmd_denoise(settings, denoise_args);
    if (*emit) {
      require_option(settings.corpus_path, "--corpus");
      return cmd_emit(settings, emit_args);
    }
    if (*stats) return cmd_stats(settings, stats_args);
    if (*eval) return cmd_eval(settings, eval_args);
    if (*analyze) return cmd_analyze(settings, analyze_args);
    if (*quality) return cmd_quality(quality_args);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "towforge: %s\n", e.what());
    std::fprintf(stderr, "Run with --help for usage.\n");
    return 2;
  } catch (const std::exception& e) {
    tow::log::error("cli", e.what());
    return 1;
  }

  std::fprintf(stderr, "towforge: a subcommand is required\n\n%s", app.help().c_str());
  return 2;
}
