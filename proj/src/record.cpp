#include "tow/record.hpp"

#include <algorithm>
#include <stdexcept>

namespace tow {

std::string category_name(Category category) {
  switch (category) {
    case Category::kTrivial:
      return "trivial";
    case Category::kExactMatch:
      return "exact_match";
    case Category::kSoftConsistent:
      return "soft_consistent";
    case Category::kUnpredictable:
      return "unpredictable";
  }
  return "unpredictable";
}

Category category_from_name(const std::string& name) {
  if (name == "trivial") return Category::kTrivial;
  if (name == "exact_match") return Category::kExactMatch;
  if (name == "soft_consistent") return Category::kSoftConsistent;
  if (name == "unpredictable") return Category::kUnpredictable;
  throw std::invalid_argument("unknown category: " + name);
}

bool ThoughtRecord::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void ThoughtRecord::add_flag(const std::string& flag) {
  if (!has_flag(flag)) flags.push_back(flag);
}

json record_to_json(const ThoughtRecord& record) {
  json j;
  j["doc_id"] = record.doc_id;
  j["byte_start"] = record.target.byte_start;
  j["byte_end"] = record.target.byte_end;
  j["surface"] = record.target.surface;
  j["context"] = record.context;
  j["gold_word"] = record.gold_word;
  j["gold_stripped"] = record.gold_stripped;
  j["raw_thought"] = record.raw_thought;
  j["predicted_word"] = record.predicted_word;
  j["category"] = record.category ? json(category_name(*record.category)) : json(nullptr);
  j["final_thought"] = record.final_thought ? json(*record.final_thought) : json(nullptr);
  j["judge_reasoning"] =
      record.judge_reasoning ? json(*record.judge_reasoning) : json(nullptr);
  j["flags"] = record.flags;
  j["usage"] = {{"prompt_tokens", record.usage.prompt_tokens},
                {"completion_tokens", record.usage.completion_tokens}};
  j["template_version"] = record.template_version;
  return j;
}

ThoughtRecord record_from_json(const json& j) {
  ThoughtRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.target.doc_id = r.doc_id;
  r.target.byte_start = j.at("byte_start").get<std::size_t>();
  r.target.byte_end = j.at("byte_end").get<std::size_t>();
  r.target.surface = j.at("surface").get<std::string>();
  r.context = j.at("context").get<std::string>();
  r.gold_word = j.at("gold_word").get<std::string>();
  r.gold_stripped = j.at("gold_stripped").get<std::string>();
  r.raw_thought = j.at("raw_thought").get<std::string>();
  r.predicted_word = j.at("predicted_word").get<std::string>();
  if (j.contains("category") && !j["category"].is_null()) {
    r.category = category_from_name(j["category"].get<std::string>());
  }
  if (j.contains("final_thought") && !j["final_thought"].is_null()) {
    r.final_thought = j["final_thought"].get<std::string>();
  }
  if (j.contains("judge_reasoning") && !j["judge_reasoning"].is_null()) {
    r.judge_reasoning = j["judge_reasoning"].get<std::string>();
  }
  if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
  if (j.contains("usage") && j["usage"].is_object()) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    r.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
  }
  r.template_version = j.value("template_version", "");
  return r;
}

std::vector<ThoughtRecord> read_records(const std::string& path) {
  std::vector<ThoughtRecord> out;
  std::size_t lineno = 0;
  for (const auto& line : jsonio::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + "#" + std::to_string(lineno) +
                               ": bad record: " + e.what());
    }
  }
  return out;
}

void write_records(const std::string& path, const std::vector<ThoughtRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    body += jsonio::dump(record_to_json(r));
    body += '\n';
  }
  jsonio::write_file_atomic(path, body);
}

}  // namespace tow
