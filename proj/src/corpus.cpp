#include "tow/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/text.hpp"

namespace fs = std::filesystem;

namespace tow::corpus {

namespace {

// Frozen builtin stopword list (builtin-en-v1). Kept in sync with
// data/stopwords_en.txt; a unit test compares the two.
constexpr const char* kBuiltinStopwords = R"(
a about above across after afterwards again against all almost alone along
already also although always am among amongst amount an and another any anyhow
anyone anything anyway anywhere are around as at back be became because become
becomes becoming been before beforehand behind being below beside besides
between beyond both bottom but by ca call can cannot could d did do does doing
done down due during each eight either eleven else elsewhere empty enough even
ever every everyone everything everywhere except few fifteen fifty first five
for former formerly forty four from front full further get give go had has
have he hence her here hereafter hereby herein hereupon hers herself him
himself his how however hundred i if in indeed into is it its itself just keep
last latter latterly least less ll m made make many may me meanwhile might
mine more moreover most mostly move much must my myself n't name namely
neither never nevertheless next nine no nobody none noone nor not nothing now
nowhere of off often on once one only onto or other others otherwise our ours
ourselves out over own part per perhaps please put quite rather re really
regarding s same say see seem seemed seeming seems serious seven several she
should show side since six sixty so some somehow someone something sometime
sometimes somewhere still such t take ten than that the their them themselves
then thence there thereafter thereby therefore therein thereupon these they
third this those though three through throughout thru thus to together too top
toward towards twelve twenty two under unless until up upon us used using
various ve very via was we well were what whatever when whence whenever where
whereafter whereas whereby wherein whereupon wherever whether which while
whither who whoever whole whom whose why will with within without would yet
you your yours yourself yourselves
)";

std::uint64_t hash_id(std::string_view doc_id) { return text::fnv1a64(doc_id); }

}  // namespace

std::string source_name(DocSource source) {
  switch (source) {
    case DocSource::kOpenWebMath:
      return "open-web-math";
    case DocSource::kC4:
      return "c4";
    case DocSource::kOther:
      return "other";
  }
  return "other";
}

DocSource source_from_name(const std::string& name) {
  if (name == "open-web-math") return DocSource::kOpenWebMath;
  if (name == "c4") return DocSource::kC4;
  return DocSource::kOther;
}

StopwordList::StopwordList(std::unordered_set<std::string> words, std::string version_tag)
    : words_(std::move(words)), version_tag_(std::move(version_tag)) {}

const StopwordList& StopwordList::builtin() {
  static const StopwordList instance = [] {
    std::unordered_set<std::string> words;
    for (const auto& w : text::split_whitespace(kBuiltinStopwords)) {
      words.insert(std::string(w));
    }
    return StopwordList(std::move(words), "builtin-en-v1");
  }();
  return instance;
}

StopwordList StopwordList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open stopword file: " + path);
  }
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    for (const auto& w : text::split_whitespace(trimmed)) {
      words.insert(text::to_lower_ascii(w));
    }
  }
  return StopwordList(std::move(words), "file:" + fs::path(path).filename().string());
}

bool StopwordList::contains(const std::string& lowercase_word) const {
  return words_.count(lowercase_word) > 0;
}

bool is_trivial_word(const std::string& surface, const StopwordList& stopwords) {
  auto core = text::strip_edge_punctuation(surface);
  if (core.empty()) return true;
  return stopwords.contains(text::to_lower_ascii(core));
}

std::vector<WordTarget> segment_words(const Document& doc, const StopwordList& stopwords) {
  std::vector<WordTarget> out;
  const std::string& s = doc.text;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_ascii_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t start = i;
    while (i < s.size() && !text::is_ascii_space(s[i])) ++i;
    WordTarget t;
    t.doc_id = doc.doc_id;
    t.byte_start = start;
    t.byte_end = i;
    t.surface = s.substr(start, i - start);
    t.is_trivial = is_trivial_word(t.surface, stopwords);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

void load_jsonl_file(const fs::path& path, const std::string& label, LoadResult& result,
                     std::unordered_set<std::string>& seen_ids) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path.string());
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    std::string where = label + "#" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      result.errors.push_back({where, std::string("invalid json: ") + e.what()});
      continue;
    }
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      result.errors.push_back({where, "missing string field 'text'"});
      continue;
    }
    Document doc;
    doc.text = j["text"].get<std::string>();
    if (doc.text.empty()) {
      result.errors.push_back({where, "empty document text"});
      continue;
    }
    if (!text::valid_utf8(doc.text)) {
      result.errors.push_back({where, "document text is not valid utf-8"});
      continue;
    }
    if (j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty()) {
      doc.doc_id = j["id"].get<std::string>();
    } else {
      doc.doc_id = where;
    }
    doc.source = j.contains("source") && j["source"].is_string()
                     ? source_from_name(j["source"].get<std::string>())
                     : DocSource::kOther;
    if (!seen_ids.insert(doc.doc_id).second) {
      result.errors.push_back({where, "duplicate doc id: " + doc.doc_id});
      continue;
    }
    result.documents.push_back(std::move(doc));
  }
}

void load_plain_file(const fs::path& path, const std::string& doc_id, LoadResult& result,
                     std::unordered_set<std::string>& seen_ids) {
  std::string body = jsonio::read_file(path.string());
  if (text::trim(body).empty()) {
    result.errors.push_back({doc_id, "empty document text"});
    return;
  }
  if (!text::valid_utf8(body)) {
    result.errors.push_back({doc_id, "document text is not valid utf-8"});
    return;
  }
  if (!seen_ids.insert(doc_id).second) {
    result.errors.push_back({doc_id, "duplicate doc id: " + doc_id});
    return;
  }
  Document doc;
  doc.doc_id = doc_id;
  doc.text = std::move(body);
  doc.source = DocSource::kOther;
  result.documents.push_back(std::move(doc));
}

}  // namespace

LoadResult load_documents(const std::string& path) {
  LoadResult result;
  std::unordered_set<std::string> seen_ids;
  fs::path root(path);
  if (!fs::exists(root)) {
    throw std::runtime_error("corpus path does not exist: " + path);
  }
  if (fs::is_directory(root)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
      return a.lexically_relative(root).generic_string() <
             b.lexically_relative(root).generic_string();
    });
    for (const auto& file : files) {
      std::string rel = file.lexically_relative(root).generic_string();
      if (file.extension() == ".jsonl") {
        load_jsonl_file(file, rel, result, seen_ids);
      } else {
        load_plain_file(file, rel, result, seen_ids);
      }
    }
  } else {
    load_jsonl_file(root, root.filename().string(), result, seen_ids);
  }
  return result;
}

std::mt19937_64 make_doc_rng(uint64_t seed, const std::string& doc_id) {
  uint64_t h = hash_id(doc_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h & 0xffffffffu),
                    static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound) {
  // Rejection sampling keeps the draw sequence identical across platforms,
  // unlike std::uniform_int_distribution.
  if (bound == 0) throw std::invalid_argument("bounded_rand: bound must be positive");
  uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<WordTarget> sample_targets(const Document& doc, const StopwordList& stopwords,
                                       size_t k, uint64_t seed) {
  auto words = segment_words(doc, stopwords);
  std::vector<WordTarget> eligible;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (!words[i].is_trivial) eligible.push_back(words[i]);
  }
  if (eligible.empty()) {
    log::info("sample", "no eligible target words, skipping document", doc.doc_id);
    return {};
  }
  auto rng = make_doc_rng(seed, doc.doc_id);
  std::size_t take = std::min(k, eligible.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded_rand(rng, eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(take);
  std::sort(eligible.begin(), eligible.end(),
            [](const WordTarget& a, const WordTarget& b) { return a.byte_start < b.byte_start; });
  return eligible;
}

}  // namespace tow::corpus
