#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tow/emitter.hpp"
#include "tow/provider.hpp"

namespace tow::evalharness {

enum class EvalKind { kNumeric, kMcq };

std::string kind_name(EvalKind kind);
EvalKind kind_from_name(const std::string& name);

struct EvalOption {
  std::string letter;
  std::string text;
};

struct EvalExample {
  std::string example_id;
  EvalKind kind = EvalKind::kNumeric;
  std::string question;
  std::vector<EvalOption> options;  // mcq only
  std::string gold;                 // number string or option letter
};

// One few-shot block of the multiple-choice template. Option lines are kept
// pre-rendered so shot files control their own spacing.
struct McqShot {
  std::string question;
  std::vector<std::string> option_lines;
  std::string response;
};

struct EvalRecord {
  std::string example_id;
  EvalKind kind = EvalKind::kNumeric;
  std::string prompt;
  std::string output;
  std::optional<std::string> extracted;
  std::string gold;
  bool correct = false;
  std::int64_t tow_count = 0;
  std::int64_t output_tokens = 0;
};

// Extraction patterns are ordinary config strings so they can be audited or
// overridden per run.
struct ExtractConfig {
  std::string numeric_pattern;
  std::string mcq_pattern;
};

ExtractConfig default_extract_config();

// The bundled 3-shot multiple-choice examples; identical to
// data/mcq_shots_default.json.
const std::vector<McqShot>& default_mcq_shots();
std::vector<McqShot> load_mcq_shots(const std::string& path);

// Template strings with {<question>} / {<choices>} slots in place.
std::string numeric_template();
std::string mcq_final_template();
std::string render_mcq_shot(const McqShot& shot);
std::string mcq_template(const std::vector<McqShot>& shots);

std::string build_eval_prompt(const EvalExample& example, const std::vector<McqShot>& shots);

std::optional<std::string> extract_answer(const std::string& output, EvalKind kind,
                                          const ExtractConfig& cfg = default_extract_config());

// Numeric strings compared as decimals (tolerance 1e-6); letters
// case-insensitively.
bool answers_match(const std::string& extracted, const std::string& gold, EvalKind kind);

struct ScoreResult {
  double accuracy = 0.0;
  std::size_t n = 0;
};

ScoreResult score(const std::vector<EvalRecord>& records);

// (acc - raw_acc) * 100, in percentage points.
double relative_accuracy(double acc, double raw_acc);
std::string format_points(double points);  // "+6.74" / "-1.20"

// Fraction of outputs of the given kind whose answer is locatable: numeric
// needs a final number, mcq needs an explicit "the answer is <L>". This is
// an automatic proxy for manual format annotation and is labeled as such in
// reports.
double formatting_rate(const std::vector<EvalRecord>& records, EvalKind kind,
                       const ExtractConfig& cfg = default_extract_config());

struct MetricsGroup {
  std::string label;
  std::size_t n = 0;
  double mean_tow_count = 0.0;
  double mean_output_tokens = 0.0;
};

std::vector<MetricsGroup> output_metrics(const std::vector<EvalRecord>& records,
                                         bool group_by_correct);

struct EvalRunConfig {
  std::string model = "gpt-4o";
  int max_output_tokens = 512;
  std::vector<McqShot> shots;
  ExtractConfig extract = default_extract_config();
  emitter::TagConfig tags;
  bool strict = false;
};

EvalRecord run_one(provider::Provider& prov, const EvalExample& example,
                   const EvalRunConfig& cfg, emitter::Tokenizer& tokenizer);

json eval_record_to_json(const EvalRecord& record);
EvalRecord eval_record_from_json(const json& j);

std::vector<EvalExample> read_bench(const std::string& path);
std::vector<EvalRecord> read_eval_records(const std::string& path);
void write_eval_records(const std::string& path, const std::vector<EvalRecord>& records);

}  // namespace tow::evalharness
