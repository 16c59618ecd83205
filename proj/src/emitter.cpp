#include "tow/emitter.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/text.hpp"

namespace fs = std::filesystem;

namespace tow::emitter {

void validate_tags(const TagConfig& tags) {
  if (tags.open.empty() || tags.close.empty()) {
    throw std::invalid_argument("tag strings must be non-empty");
  }
  if (tags.open == tags.close) {
    throw std::invalid_argument("open and close tags must differ");
  }
  if (tags.open.find(tags.close) != std::string::npos ||
      tags.close.find(tags.open) != std::string::npos) {
    throw std::invalid_argument("tag strings must not contain each other");
  }
}

std::string composition_name(Composition composition) {
  switch (composition) {
    case Composition::kEmOnly:
      return "em-only";
    case Composition::kWithoutUnpredictable:
      return "no-unpred";
    case Composition::kFull:
      return "full";
  }
  return "full";
}

Composition composition_from_name(const std::string& name) {
  if (name == "em-only") return Composition::kEmOnly;
  if (name == "no-unpred") return Composition::kWithoutUnpredictable;
  if (name == "full") return Composition::kFull;
  throw std::invalid_argument("unknown composition: " + name);
}

bool composition_includes(Composition composition, Category category) {
  switch (category) {
    case Category::kExactMatch:
      return true;
    case Category::kSoftConsistent:
      return composition != Composition::kEmOnly;
    case Category::kUnpredictable:
      return composition == Composition::kFull;
    case Category::kTrivial:
      return false;
  }
  return false;
}

std::string augment_document(const corpus::Document& doc,
                             const std::vector<ThoughtRecord>& records,
                             denoise::Paradigm paradigm, Composition composition,
                             const TagConfig& tags) {
  validate_tags(tags);
  if (doc.text.find(tags.open) != std::string::npos ||
      doc.text.find(tags.close) != std::string::npos) {
    throw std::invalid_argument("document already contains tag strings: " + doc.doc_id);
  }

  std::string out;
  out.reserve(doc.text.size() + records.size() * 64);
  std::size_t cursor = 0;
  bool have_prev = false;
  std::size_t prev_start = 0;
  std::size_t prev_end = 0;

  for (const auto& record : records) {
    if (record.doc_id != doc.doc_id) {
      throw std::invalid_argument("record " + record.record_id() +
                                  " does not belong to document " + doc.doc_id);
    }
    if (record.failed()) {
      log::debug("emit", "skipping failed record", record.record_id());
      continue;
    }
    if (!record.category) {
      throw std::invalid_argument("uncategorized record: " + record.record_id());
    }
    const auto& t = record.target;
    if (t.byte_end <= t.byte_start || t.byte_end > doc.text.size() ||
        doc.text.compare(t.byte_start, t.byte_end - t.byte_start, t.surface) != 0) {
      throw std::invalid_argument("record span does not match document text: " +
                                  record.record_id());
    }
    if (have_prev) {
      if (t.byte_start == prev_start) {
        throw std::invalid_argument("duplicate target at " + record.record_id());
      }
      if (t.byte_start < prev_end) {
        throw std::invalid_argument("overlapping or unsorted targets at " +
                                    record.record_id());
      }
    }
    have_prev = true;
    prev_start = t.byte_start;
    prev_end = t.byte_end;

    if (paradigm == denoise::Paradigm::kRaw) continue;
    if (!composition_includes(composition, *record.category)) continue;

    auto thought = denoise::thought_text(record, paradigm);
    std::string body = text::trim(thought.value_or(""));
    if (body.empty()) {
      throw std::invalid_argument("empty thought for record " + record.record_id());
    }
    if (body.find(tags.open) != std::string::npos ||
        body.find(tags.close) != std::string::npos) {
      throw std::invalid_argument("thought contains tag strings: " + record.record_id());
    }

    out.append(doc.text, cursor, t.byte_start - cursor);
    out += tags.open;
    out += ' ';
    out += body;
    out += ' ';
    out += tags.close;
    cursor = t.byte_start;
  }

  if (paradigm == denoise::Paradigm::kRaw) return doc.text;
  out.append(doc.text, cursor, doc.text.size() - cursor);
  return out;
}

std::string strip_tow(const std::string& text, const TagConfig& tags) {
  validate_tags(tags);
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open_pos = text.find(tags.open, pos);
    auto close_pos = text.find(tags.close, pos);
    if (open_pos == std::string::npos && close_pos == std::string::npos) {
      out.append(text, pos, text.size() - pos);
      break;
    }
    if (close_pos < open_pos) {
      throw TagError("close tag without matching open tag", close_pos);
    }
    auto body_start = open_pos + tags.open.size();
    auto span_close = text.find(tags.close, body_start);
    if (span_close == std::string::npos) {
      throw TagError("unclosed open tag", open_pos);
    }
    auto nested = text.find(tags.open, body_start);
    if (nested != std::string::npos && nested < span_close) {
      throw TagError("nested open tag", nested);
    }
    out.append(text, pos, open_pos - pos);
    pos = span_close + tags.close.size();
  }
  return out;
}

WhitespaceTokenizer::WhitespaceTokenizer(TagConfig tags) : tags_(std::move(tags)) {
  validate_tags(tags_);
}

std::size_t WhitespaceTokenizer::count(const std::string& text) {
  std::size_t total = 0;
  for (const auto& token : text::split_whitespace(text)) {
    std::size_t pos = 0;
    while (pos < token.size()) {
      auto open_pos = token.find(tags_.open, pos);
      auto close_pos = token.find(tags_.close, pos);
      auto tag_pos = std::min(open_pos, close_pos);
      if (tag_pos == std::string::npos) {
        ++total;  // plain remainder
        break;
      }
      if (tag_pos > pos) ++total;  // text before the tag
      ++total;                     // the tag itself
      pos = tag_pos + (tag_pos == open_pos ? tags_.open.size() : tags_.close.size());
    }
  }
  return total;
}

CommandTokenizer::CommandTokenizer(std::string command) : command_(std::move(command)) {
  if (command_.empty()) {
    throw std::invalid_argument("tokenizer command must be non-empty");
  }
}

std::size_t CommandTokenizer::count(const std::string& text) {
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = fs::temp_directory_path() /
             ("towforge-tok-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter.fetch_add(1)) + ".txt");
  jsonio::write_file_atomic(tmp.string(), text);

  std::string shell = "\"" + command_ + "\" < \"" + tmp.string() + "\"";
  FILE* pipe = ::popen(shell.c_str(), "r");
  if (!pipe) {
    fs::remove(tmp);
    throw std::runtime_error("cannot run tokenizer command: " + command_);
  }
  std::string output;
  char buf[256];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    output.append(buf, n);
  }
  int status = ::pclose(pipe);
  fs::remove(tmp);
  if (status != 0) {
    throw std::runtime_error("tokenizer command failed with status " +
                             std::to_string(status) + ": " + command_);
  }
  try {
    return static_cast<std::size_t>(std::stoull(text::trim(output)));
  } catch (const std::exception&) {
    throw std::runtime_error("tokenizer command did not print an integer: '" +
                             text::trim(output) + "'");
  }
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec, const TagConfig& tags) {
  if (spec == "ws") {
    return std::make_unique<WhitespaceTokenizer>(tags);
  }
  if (spec.rfind("cmd:", 0) == 0) {
    return std::make_unique<CommandTokenizer>(spec.substr(4));
  }
  throw std::invalid_argument("unknown tokenizer spec (want ws or cmd:<path>): " + spec);
}

StatsRow corpus_stats(const std::vector<corpus::Document>& raw,
                      const std::vector<corpus::Document>& augmented, Tokenizer& tokenizer,
                      const TagConfig& tags, const std::string& label) {
  validate_tags(tags);
  std::map<std::string, const std::string*> raw_by_id;
  for (const auto& doc : raw) raw_by_id[doc.doc_id] = &doc.text;
  std::set<std::string> missing;
  std::set<std::string> extra;
  for (const auto& doc : augmented) {
    if (!raw_by_id.count(doc.doc_id)) extra.insert(doc.doc_id);
  }
  {
    std::set<std::string> aug_ids;
    for (const auto& doc : augmented) aug_ids.insert(doc.doc_id);
    for (const auto& [id, _] : raw_by_id) {
      if (!aug_ids.count(id)) missing.insert(id);
    }
    if (augmented.size() != aug_ids.size()) {
      throw std::runtime_error("duplicate doc ids in augmented corpus");
    }
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "raw/augmented doc sets differ;";
    int shown = 0;
    for (const auto& id : missing) {
      if (shown++ >= 10) break;
      msg += " missing:" + id;
    }
    shown = 0;
    for (const auto& id : extra) {
      if (shown++ >= 10) break;
      msg += " extra:" + id;
    }
    throw std::runtime_error(msg);
  }

  StatsRow row;
  row.label = label;
  row.tokenizer_tag = tokenizer.tag();
  std::int64_t raw_tokens = 0;
  for (const auto& doc : augmented) {
    row.total_tokens += static_cast<std::int64_t>(tokenizer.count(doc.text));
    row.tow_count += static_cast<std::int64_t>(text::count_occurrences(doc.text, tags.open));
    raw_tokens += static_cast<std::int64_t>(tokenizer.count(*raw_by_id.at(doc.doc_id)));
  }
  if (row.tow_count > 0) {
    row.tokens_per_tow =
        static_cast<double>(row.total_tokens - raw_tokens) / static_cast<double>(row.tow_count);
  }
  return row;
}

std::vector<corpus::Document> read_augmented(const std::string& path) {
  std::vector<corpus::Document> out;
  std::set<std::string> seen;
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
    corpus::Document doc;
    doc.doc_id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    if (!seen.insert(doc.doc_id).second) {
      throw std::runtime_error(path + "#" + std::to_string(lineno) +
                               ": duplicate doc id " + doc.doc_id);
    }
    out.push_back(std::move(doc));
  }
  return out;
}

void write_augmented(const std::string& path, const std::vector<corpus::Document>& docs) {
  std::string body;
  for (const auto& doc : docs) {
    body += jsonio::dump(json{{"id", doc.doc_id}, {"text", doc.text}});
    body += '\n';
  }
  jsonio::write_file_atomic(path, body);
}

}  // namespace tow::emitter
