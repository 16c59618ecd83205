#include "tow/evalharness.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/text.hpp"

namespace tow::evalharness {

namespace {

constexpr const char* kNumericTemplate =
    "Answer the following question.\n"
    "\n"
    "Question: {<question>}\n"
    "Answer: Let's think step by step.";

constexpr const char* kMcqFinalTemplate =
    "Question: {<question>}\n"
    "Options: {<choices>}\n"
    "\n"
    "You should ONLY choose the letter from the options as your final answer.\n"
    "Response: Let's think step by step.";

void replace_slot(std::string& s, const std::string& slot, const std::string& value) {
  auto pos = s.find(slot);
  if (pos != std::string::npos) s.replace(pos, slot.size(), value);
}

bool is_upper_letter(const std::string& s) {
  return s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z';
}

}  // namespace

std::string kind_name(EvalKind kind) {
  return kind == EvalKind::kNumeric ? "numeric" : "mcq";
}

EvalKind kind_from_name(const std::string& name) {
  if (name == "numeric") return EvalKind::kNumeric;
  if (name == "mcq") return EvalKind::kMcq;
  throw std::invalid_argument("unknown eval kind: " + name);
}

ExtractConfig default_extract_config() {
  ExtractConfig cfg;
  cfg.numeric_pattern = R"([-+]?\d{1,3}(?:,\d{3})+(?:\.\d+)?|[-+]?\d+(?:\.\d+)?)";
  cfg.mcq_pattern = R"(the answer is\s*[\*_"'\(\[\{<]*([A-Za-z])(?![A-Za-z0-9]))";
  return cfg;
}

const std::vector<McqShot>& default_mcq_shots() {
  static const std::vector<McqShot> shots = {
      {"Mass-society theory suggests that:",
       {"A. the content of the media is determined by market forces",
        "B. the subordinate classes are dominated by the ideology of the ruling class",
        "C. the media manipulate 'the masses' as vulnerable, passive consumers",
        "D. audiences make selective interpretations of media messages"},
       "Mass-society theory suggests that media content is used to manipulate the masses "
       "as passive consumers, who are vulnerable to external influence. Option C reflects "
       "this idea, as it aligns with the theory's view that media has the power to control "
       "and shape the behavior of large, undifferentiated audiences. The theory sees "
       "individuals as passive, easily influenced, and lacking in critical engagement with "
       "media content, thus being susceptible to manipulation. So the answer is C."},
      {"What was GDP per capita in the United States in 1850 when adjusting for inflation "
       "and PPP in 2011 prices?",
       {"A. About $300", "B. About $3k", "C. About $8k", "D. About $15k"},
       "To estimate GDP per capita in 1850 using inflation-adjusted and PPP-adjusted 2011 "
       "prices, historical economic data suggests that early industrial societies like the "
       "United States had modest per capita income compared to modern standards. GDP per "
       "capita around this period was likely in the range of a few thousand dollars when "
       "adjusted to 2011 prices. Option B,\"About $3k\" aligns with historical estimates "
       "of the U.S. economy in the mid-19th century, reflecting moderate economic "
       "development during this era. So the answer is B."},
      {"Which common public relations tactic involves sending journalists on visits to "
       "appropriate locations?",
       {"A. Media release", "B. Media tour", "C. Press room", "D.Promotional days/weeks"},
       "A media tour involves sending journalists to relevant locations to give them "
       "firsthand experience of a product, service, or event. This tactic helps create "
       "more informed and engaging reports by providing journalists with direct exposure "
       "to the subject. Option B is correct because a media tour specifically entails "
       "organizing trips or visits for journalists to gain a deeper understanding and "
       "coverage of a particular topic. Other options, like media releases, do not involve "
       "physical visits. So the answer is B."},
  };
  return shots;
}

std::vector<McqShot> load_mcq_shots(const std::string& path) {
  std::vector<McqShot> shots;
  json j = json::parse(jsonio::read_file(path));
  for (const auto& s : j.at("shots")) {
    McqShot shot;
    shot.question = s.at("question").get<std::string>();
    shot.option_lines = s.at("option_lines").get<std::vector<std::string>>();
    shot.response = s.at("response").get<std::string>();
    shots.push_back(std::move(shot));
  }
  if (shots.empty()) {
    throw std::runtime_error("shot file has no shots: " + path);
  }
  return shots;
}

std::string numeric_template() { return kNumericTemplate; }
std::string mcq_final_template() { return kMcqFinalTemplate; }

std::string render_mcq_shot(const McqShot& shot) {
  std::string options;
  for (std::size_t i = 0; i < shot.option_lines.size(); ++i) {
    if (i > 0) options += '\n';
    options += shot.option_lines[i];
  }
  return "Question: " + shot.question + "\nOptions: " + options +
         "\n\nYou should ONLY choose the letters from the options as your final answer.\n"
         "Response: Let's think step by step. " +
         shot.response;
}

std::string mcq_template(const std::vector<McqShot>& shots) {
  std::string out;
  for (const auto& shot : shots) {
    out += render_mcq_shot(shot);
    out += "\n\n";
  }
  out += kMcqFinalTemplate;
  return out;
}

std::string build_eval_prompt(const EvalExample& example, const std::vector<McqShot>& shots) {
  if (example.kind == EvalKind::kNumeric) {
    std::string prompt = kNumericTemplate;
    replace_slot(prompt, "{<question>}", example.question);
    return prompt;
  }
  if (example.options.empty()) {
    throw std::invalid_argument("mcq example has no options: " + example.example_id);
  }
  std::string choices;
  for (std::size_t i = 0; i < example.options.size(); ++i) {
    if (i > 0) choices += '\n';
    choices += example.options[i].letter + ". " + example.options[i].text;
  }
  std::string prompt = mcq_template(shots);
  replace_slot(prompt, "{<question>}", example.question);
  replace_slot(prompt, "{<choices>}", choices);
  return prompt;
}

std::optional<std::string> extract_answer(const std::string& output, EvalKind kind,
                                          const ExtractConfig& cfg) {
  if (kind == EvalKind::kNumeric) {
    std::regex pattern(cfg.numeric_pattern);
    std::string last;
    for (auto it = std::sregex_iterator(output.begin(), output.end(), pattern);
         it != std::sregex_iterator(); ++it) {
      last = it->str();
    }
    if (last.empty()) return std::nullopt;
    std::string cleaned;
    for (char c : last) {
      if (c != ',') cleaned.push_back(c);
    }
    return cleaned;
  }

  std::regex pattern(cfg.mcq_pattern, std::regex::icase);
  std::string last;
  for (auto it = std::sregex_iterator(output.begin(), output.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    last = (*it)[1].str();
  }
  if (!last.empty()) {
    return text::to_upper_ascii(last);
  }

  // Fallback: the last decorated option letter anywhere ("B.", "(C)"), or a
  // bare capital letter only when it closes the output. Bare lowercase
  // letters stay articles, never answers.
  auto tokens = text::split_whitespace(output);
  std::optional<std::string> found;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto core = text::strip_edge_punctuation(tokens[i]);
    if (!is_upper_letter(core)) continue;
    if (core == tokens[i] && i + 1 != tokens.size()) continue;
    found = core;
  }
  return found;
}

bool answers_match(const std::string& extracted, const std::string& gold, EvalKind kind) {
  if (kind == EvalKind::kMcq) {
    return text::to_lower_ascii(extracted) == text::to_lower_ascii(gold);
  }
  try {
    double a = std::stod(extracted);
    double b = std::stod(gold);
    return std::fabs(a - b) <= 1e-6;
  } catch (const std::exception&) {
    return extracted == gold;
  }
}

ScoreResult score(const std::vector<EvalRecord>& records) {
  ScoreResult result;
  result.n = records.size();
  if (records.empty()) return result;
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (r.extracted && answers_match(*r.extracted, r.gold, r.kind)) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(result.n);
  return result;
}

double relative_accuracy(double acc, double raw_acc) { return (acc - raw_acc) * 100.0; }

std::string format_points(double points) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", points);
  return buf;
}

double formatting_rate(const std::vector<EvalRecord>& records, EvalKind kind,
                       const ExtractConfig& cfg) {
  std::size_t n = 0;
  std::size_t formatted = 0;
  for (const auto& r : records) {
    if (r.kind != kind) continue;
    ++n;
    if (kind == EvalKind::kNumeric) {
      if (extract_answer(r.output, kind, cfg)) ++formatted;
    } else {
      std::regex pattern(cfg.mcq_pattern, std::regex::icase);
      if (std::regex_search(r.output, pattern)) ++formatted;
    }
  }
  if (n == 0) return 0.0;
  return static_cast<double>(formatted) / static_cast<double>(n);
}

std::vector<MetricsGroup> output_metrics(const std::vector<EvalRecord>& records,
                                         bool group_by_correct) {
  auto summarize = [](const std::string& label,
                      const std::vector<const EvalRecord*>& group) {
    MetricsGroup g;
    g.label = label;
    g.n = group.size();
    if (group.empty()) return g;
    double tows = 0.0;
    double tokens = 0.0;
    for (const auto* r : group) {
      tows += static_cast<double>(r->tow_count);
      tokens += static_cast<double>(r->output_tokens);
    }
    g.mean_tow_count = tows / static_cast<double>(group.size());
    g.mean_output_tokens = tokens / static_cast<double>(group.size());
    return g;
  };

  std::vector<MetricsGroup> out;
  if (!group_by_correct) {
    std::vector<const EvalRecord*> all;
    for (const auto& r : records) all.push_back(&r);
    out.push_back(summarize("all", all));
    return out;
  }
  std::vector<const EvalRecord*> correct;
  std::vector<const EvalRecord*> incorrect;
  for (const auto& r : records) {
    (r.correct ? correct : incorrect).push_back(&r);
  }
  out.push_back(summarize("correct", correct));
  out.push_back(summarize("incorrect", incorrect));
  return out;
}

EvalRecord run_one(provider::Provider& prov, const EvalExample& example,
                   const EvalRunConfig& cfg, emitter::Tokenizer& tokenizer) {
  EvalRecord record;
  record.example_id = example.example_id;
  record.kind = example.kind;
  record.gold = example.gold;
  record.prompt = build_eval_prompt(example, cfg.shots);

  provider::ChatRequest request;
  request.model = cfg.model;
  request.max_output_tokens = cfg.max_output_tokens;
  request.request_tag = "eval:" + example.example_id;
  request.messages.push_back({provider::Role::kUser, record.prompt});

  try {
    auto response = prov.complete(request);
    record.output = response.content;
  } catch (const provider::ProviderError& e) {
    if (cfg.strict) throw;
    log::error("eval", std::string("provider failure: ") + e.what(), example.example_id);
    return record;
  }

  record.extracted = extract_answer(record.output, record.kind, cfg.extract);
  record.correct = record.extracted && answers_match(*record.extracted, record.gold, record.kind);
  record.tow_count =
      static_cast<std::int64_t>(text::count_occurrences(record.output, cfg.tags.open));
  record.output_tokens = static_cast<std::int64_t>(tokenizer.count(record.output));
  return record;
}

json eval_record_to_json(const EvalRecord& record) {
  json j;
  j["example_id"] = record.example_id;
  j["kind"] = kind_name(record.kind);
  j["prompt"] = record.prompt;
  j["output"] = record.output;
  j["extracted"] = record.extracted ? json(*record.extracted) : json(nullptr);
  j["gold"] = record.gold;
  j["correct"] = record.correct;
  j["tow_count"] = record.tow_count;
  j["output_tokens"] = record.output_tokens;
  return j;
}

EvalRecord eval_record_from_json(const json& j) {
  EvalRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.kind = kind_from_name(j.at("kind").get<std::string>());
  r.prompt = j.value("prompt", "");
  r.output = j.at("output").get<std::string>();
  if (j.contains("extracted") && !j["extracted"].is_null()) {
    r.extracted = j["extracted"].get<std::string>();
  }
  r.gold = j.at("gold").get<std::string>();
  r.correct = j.value("correct", false);
  r.tow_count = j.value("tow_count", 0);
  r.output_tokens = j.value("output_tokens", 0);
  return r;
}

std::vector<EvalExample> read_bench(const std::string& path) {
  std::vector<EvalExample> out;
  std::size_t lineno = 0;
  for (const auto& line : jsonio::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + "#" + std::to_string(lineno) + ": " + e.what());
    }
    EvalExample ex;
    ex.example_id = j.at("id").get<std::string>();
    ex.kind = kind_from_name(j.at("kind").get<std::string>());
    ex.question = j.at("question").get<std::string>();
    ex.gold = j.at("gold").get<std::string>();
    if (j.contains("options")) {
      for (const auto& o : j["options"]) {
        ex.options.push_back(
            {o.at("letter").get<std::string>(), o.at("text").get<std::string>()});
      }
    }
    if (ex.kind == EvalKind::kMcq) {
      bool gold_in_options = false;
      for (const auto& o : ex.options) {
        if (text::to_lower_ascii(o.letter) == text::to_lower_ascii(ex.gold)) {
          gold_in_options = true;
        }
      }
      if (!gold_in_options) {
        throw std::runtime_error(path + "#" + std::to_string(lineno) +
                                 ": gold letter not among options");
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<EvalRecord> read_eval_records(const std::string& path) {
  std::vector<EvalRecord> out;
  std::size_t lineno = 0;
  for (const auto& line : jsonio::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(eval_record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + "#" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_eval_records(const std::string& path, const std::vector<EvalRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    body += jsonio::dump(eval_record_to_json(r));
    body += '\n';
  }
  jsonio::write_file_atomic(path, body);
}

}  // namespace tow::evalharness
