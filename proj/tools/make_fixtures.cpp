// Regenerates the bundled fixtures: the 50-document corpus, the mock
// provider's response file (pipeline + eval demo), the demo benchmark, the
// annotation sample, and the stats corpus pair. Deterministic; safe to rerun.
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tow/consistency.hpp"
#include "tow/corpus.hpp"
#include "tow/denoise.hpp"
#include "tow/emitter.hpp"
#include "tow/evalharness.hpp"
#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/pipeline.hpp"
#include "tow/provider.hpp"
#include "tow/record.hpp"
#include "tow/text.hpp"

namespace fs = std::filesystem;

using tow::json;
using tow::ThoughtRecord;

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error("fixture check failed: " + message);
}

// --- corpus -----------------------------------------------------------------

const char* kSentencePool[] = {
    "The survey team measured the canyon walls before the spring flood season began.",
    "Low tide exposed a shelf of barnacles and the crew photographed every pool twice.",
    "A second proofing of the dough gave the loaves a far more open crumb.",
    "The luthier planed the spruce top until tap tones rang evenly across the grain.",
    "Smoke calmed the hive while the keeper lifted each frame toward the light.",
    "Contour lines on the draft map crowded together near the northern ridge.",
    "A cold front stalled over the valley and drizzle continued through the night.",
    "Through the small refractor the double star finally split into amber and blue.",
    "The glaze matured to a deep celadon after nine hours inside the kiln.",
    "Riders regrouped at the pass and shared the last of the dried apricots.",
    "Brittle folders from the estate donation were moved into acid-free boxes.",
    "The lamp rotation was logged at dusk and the lens wiped free of salt spray.",
    "Sediment cores from the lake bed showed thin bands of volcanic ash.",
    "The orchard crew grafted two heritage apple varieties onto hardy rootstock.",
    "A kestrel hovered over the fallow field while the counters marked their sheet.",
    "Careful soldering closed the seam on the weather vane's copper tail.",
    "The printing press needed new rollers before the broadside run could start.",
    "Volunteers raked the oyster beds and recorded spat counts on slate boards.",
    "An unexpected thaw softened the trail and the sledge sank to its rails.",
    "The archivist traced the watermark to a mill operating near Basel in 1782.",
    "Night sampling brought up copepods that glowed faintly against the mesh.",
    "The quartet rehearsed the slow movement until the phrasing settled.",
    "Terraced plots above the river produced the season's densest root crop.",
    "A loose shutter banged through the storm and was wedged with a folded sack.",
    "The foundry poured test ingots and stamped each one with the furnace number.",
    "Milled oats rested overnight before the bakers folded them into the sponge.",
    "The glass floats were numbered, netted, and hung along the pier rail.",
    "Two surveyors checked the benchmark against the older brass disc uphill.",
    "The weaving shed smelled of lanolin after the new fleeces arrived.",
    "A brief aurora washed the ridge in green while the camera shutters clicked.",
    "The crew logged 4,250 meters of shoreline before the fog closed in.",
    "Replacement shingles were split from cedar and stacked beside the ladder.",
    "The tasting notes mentioned bergamot, flint, and a long mineral finish.",
    "Gulls followed the ferry halfway across the strait and then turned back.",
    "The bookbinder sewed the signatures over linen tapes without haste.",
    "Rain gauges along the transect disagreed by less than a millimeter.",
};

constexpr int kDocCount = 50;
constexpr std::size_t kPerDoc = 4;
constexpr std::uint64_t kSeed = 42;

std::string doc_opener(int i) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "Entry-%02d of the field log:", i);
  return buf;
}

std::string unicode_doc_text() {
  return doc_opener(48) +
         std::string(
             " The café near the Zürich archive serves crème pastries beside "
             "naïve watercolors — a “quiet” corner, the curator says, for "
             "reading Māori maps and Δ-shaped charts. Its façade—painted "
             "in ochre—faces the plaza where séance posters and jalapeño "
             "stalls share one crooked awning.");
}

std::string short_doc_text() {
  return doc_opener(49) + std::string(" the café menu lists seven pastries daily.");
}

std::vector<tow::corpus::Document> build_corpus() {
  std::vector<tow::corpus::Document> docs;
  constexpr std::size_t pool = sizeof(kSentencePool) / sizeof(kSentencePool[0]);
  for (int i = 0; i < kDocCount; ++i) {
    tow::corpus::Document doc;
    char id[16];
    std::snprintf(id, sizeof(id), "doc-%02d", i);
    doc.doc_id = id;
    if (i == 48) {
      doc.text = unicode_doc_text();
    } else if (i == 49) {
      doc.text = short_doc_text();
    } else {
      std::mt19937_64 rng(7777 + static_cast<std::uint64_t>(i));
      std::string body = doc_opener(i);
      std::size_t count = 5 + rng() % 4;
      for (std::size_t k = 0; k < count; ++k) {
        body += " ";
        body += kSentencePool[rng() % pool];
      }
      doc.text = body;
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus(const std::string& path, const std::vector<tow::corpus::Document>& docs) {
  std::string body;
  for (const auto& doc : docs) {
    body += tow::jsonio::dump(json{{"id", doc.doc_id}, {"text", doc.text}});
    body += '\n';
  }
  tow::jsonio::write_file_atomic(path, body);
}

// --- per-target response plan ------------------------------------------------

struct PlanEntry {
  tow::Category category = tow::Category::kExactMatch;
  std::string generation;
  std::string judgement;
  std::string shorter;
};

std::string previous_word(const std::string& context) {
  auto words = tow::text::split_whitespace(context);
  if (words.empty()) return "passage";
  std::string stripped = tow::text::strip_edge_punctuation(words.back());
  return stripped.empty() ? "passage" : stripped;
}

PlanEntry plan_for_target(std::size_t index, const std::string& context,
                          const std::string& surface) {
  std::string gold = tow::text::strip_edge_punctuation(surface);
  std::string prev = previous_word(context);
  PlanEntry entry;

  switch (index % 3) {
    case 0: {
      entry.category = tow::Category::kExactMatch;
      entry.generation =
          "Thought: The passage has been describing " + prev +
          " in an even, factual register, and the clause right before the gap "
          "calls for a continuation that completes the established phrase, so "
          "the most natural next word given everything written so far is \"" +
          gold + "\".\nNext Word: " + gold;
      entry.shorter =
          "Shorter Thought: The phrasing around " + prev + " points directly to \"" + gold +
          "\".";
      break;
    }
    case 1: {
      std::string predicted =
          tow::consistency::normalize_word(gold) == "outcome" ? "fragment" : "outcome";
      entry.category = tow::Category::kSoftConsistent;
      entry.generation =
          "Thought: The context centers on " + prev +
          " and the sentence is clearly reaching for a word from the same "
          "semantic field as the surrounding description; several close "
          "candidates would fit the slot, and my best single guess for the "
          "continuation is \"" +
          predicted + "\".\nNext Word: " + predicted;
      entry.judgement =
          "Reasoning: Let's think step by step. The thought narrows the "
          "continuation to the right semantic field around " +
          prev +
          ", which generally entails the gold word even though it names a "
          "different candidate.\nJudgement: True";
      entry.shorter =
          "Shorter Thought: The clause points to a word near " + prev + ".";
      break;
    }
    default: {
      std::string predicted =
          tow::consistency::normalize_word(gold) == "zephyr" ? "quixotic" : "zephyr";
      entry.category = tow::Category::kUnpredictable;
      entry.generation =
          "Thought: Nothing in the clause around " + prev +
          " pins down a specific continuation; the register is neutral, the "
          "syntax admits many unrelated words, and no earlier phrase is being "
          "completed here, so I will guess \"" +
          predicted + "\" with low confidence.\nNext Word: " + predicted;
      entry.judgement =
          "Reasoning: Let's think step by step. The thought admits the "
          "continuation is unconstrained and reasons toward an unrelated word, "
          "so it does not entail the gold word.\nJudgement: False";
      break;
    }
  }
  return entry;
}

// --- demo benchmark -----------------------------------------------------------

struct DemoExample {
  json bench_line;
  std::string question;
  std::string tow_output;
  std::string raw_output;
};

std::vector<DemoExample> demo_examples() {
  std::vector<DemoExample> out;

  auto numeric = [&](const std::string& id, const std::string& q, const std::string& gold,
                     const std::string& tow, const std::string& raw) {
    DemoExample ex;
    ex.bench_line = json{{"id", id}, {"kind", "numeric"}, {"question", q}, {"gold", gold}};
    ex.question = q;
    ex.tow_output = tow;
    ex.raw_output = raw;
    out.push_back(std::move(ex));
  };
  auto mcq = [&](const std::string& id, const std::string& q, const json& options,
                 const std::string& gold, const std::string& tow, const std::string& raw) {
    DemoExample ex;
    ex.bench_line = json{{"id", id}, {"kind", "mcq"}, {"question", q}, {"options", options},
                         {"gold", gold}};
    ex.question = q;
    ex.tow_output = tow;
    ex.raw_output = raw;
    out.push_back(std::move(ex));
  };

  numeric("num-01",
          "A baker sells 12 muffins in the morning and 9 in the afternoon. Each muffin "
          "costs 3 dollars. How much money did the baker make?",
          "63",
          "<ToW> The question combines two batches then applies a unit price. </ToW> The "
          "baker sells 12 + 9 = 21 muffins, and 21 * 3 = 63. So the baker makes 63 dollars.",
          "First, find the total number of muffins sold across the whole day. In the "
          "morning the baker sells 12 muffins, and in the afternoon 9 more, which makes "
          "12 + 9 = 21 muffins in total. Since each muffin costs 3 dollars, the revenue "
          "for the day is 21 * 3 = 63.");
  numeric("num-02",
          "A tank holds 240 liters. A pump drains 15 liters per minute. How many minutes "
          "until the tank is empty?",
          "16",
          "<ToW> Total volume divided by the drain rate gives minutes. </ToW> 240 / 15 = "
          "16. The tank is empty after 16 minutes.",
          "The tank holds 240 liters and the pump removes 15 liters every minute. We can "
          "estimate first: 15 liters per minute is close to 12 liters per minute, and "
          "240 / 12 = 20. Keeping that round figure, the tank should be empty after "
          "about 20 minutes.");
  numeric("num-03",
          "Lena reads 24 pages a day for 5 days and then reads 30 more pages. How many "
          "pages does she read in total?",
          "150",
          "<ToW> Five equal days plus one extra batch of pages. </ToW> 24 * 5 = 120, and "
          "120 + 30 = 150. She reads 150 pages.",
          "Reading 24 pages a day for 5 days gives 24 * 5 = 120 pages over the first "
          "stretch. Adding the final batch of 30 pages gives 120 + 30 = 150, so across "
          "the whole period she reads a total of 150.");
  numeric("num-04",
          "A rope 91 meters long is cut into 7 equal pieces. How long is each piece?",
          "13",
          "<ToW> Equal pieces means dividing the length by the count. </ToW> 91 / 7 = 13. "
          "Each piece is 13 meters long.",
          "A rope of 91 meters cut into 7 equal pieces means each piece has length 91 / "
          "7. Doing the division, 7 goes into 91 exactly 13 times, so each piece "
          "measures 13.");

  json instruments = json::array({json{{"letter", "A"}, {"text", "Thermometer"}},
                                  json{{"letter", "B"}, {"text", "Barometer"}},
                                  json{{"letter", "C"}, {"text", "Hygrometer"}},
                                  json{{"letter", "D"}, {"text", "Anemometer"}}});
  mcq("mcq-01", "Which instrument measures atmospheric pressure?", instruments, "B",
      "<ToW> The device named for pressure measurement is the barometer. </ToW> A "
      "thermometer measures temperature and a hygrometer measures humidity. So the "
      "answer is B.",
      "Temperature is measured with a thermometer, humidity with a hygrometer, and wind "
      "speed with an anemometer. Atmospheric pressure is the remaining quantity, and the "
      "barometer is the instrument built for it. So the answer is B.");

  json planets = json::array({json{{"letter", "A"}, {"text", "Mercury"}},
                              json{{"letter", "B"}, {"text", "Venus"}},
                              json{{"letter", "C"}, {"text", "Mars"}},
                              json{{"letter", "D"}, {"text", "Jupiter"}}});
  mcq("mcq-02", "Which planet has the shortest year?", planets, "A",
      "<ToW> The shortest year belongs to the innermost orbit. </ToW> Mercury circles "
      "the sun fastest. So the answer is A.",
      "A planet's year is the time it takes to complete one orbit, and orbital periods "
      "grow with distance from the sun. Among the options Mercury is the innermost "
      "planet, so it finishes its orbit first. So the answer is A.");

  json metals = json::array({json{{"letter", "A"}, {"text", "Iron"}},
                             json{{"letter", "B"}, {"text", "Mercury"}},
                             json{{"letter", "C"}, {"text", "Zinc"}},
                             json{{"letter", "D"}, {"text", "Copper"}}});
  mcq("mcq-03", "Which metal is liquid at room temperature?", metals, "B",
      "<ToW> One metal is famously liquid at room temperature. </ToW> That metal is "
      "mercury. So the answer is B.",
      "Iron, zinc, and copper are all solid well past ordinary room temperatures, while "
      "mercury stays liquid under the same conditions, which is why it filled older "
      "thermometers. So the answer is B.");

  json oceans = json::array({json{{"letter", "A"}, {"text", "Atlantic"}},
                             json{{"letter", "B"}, {"text", "Indian"}},
                             json{{"letter", "C"}, {"text", "Pacific"}},
                             json{{"letter", "D"}, {"text", "Arctic"}}});
  mcq("mcq-04", "What is the largest ocean on Earth?", oceans, "C",
      "<ToW> The largest ocean spans nearly half the globe. </ToW> So the answer is C.",
      "The Atlantic Ocean is vast and borders many continents, and historically it "
      "carried the heaviest shipping traffic, which suggests it may well be the largest "
      "of the four. So the answer is A.");

  return out;
}

// --- request scripting ---------------------------------------------------------

std::string slice_between(const std::string& content, const std::string& head,
                          const std::string& tail, bool head_from_end) {
  std::size_t start = head_from_end ? content.rfind(head) : content.find(head);
  check(start != std::string::npos, "request missing marker '" + head + "'");
  start += head.size();
  std::size_t end = content.find(tail, start);
  check(end != std::string::npos, "request missing marker '" + tail + "'");
  return content.substr(start, end - start);
}

class ScriptedProvider : public tow::provider::Provider {
 public:
  ScriptedProvider(const std::map<std::string, PlanEntry>& plan,
                   const std::map<std::string, std::string>& eval_plan,
                   std::map<std::string, std::string>& collected)
      : plan_(plan), eval_plan_(eval_plan), collected_(collected) {}

  tow::provider::ChatResponse complete(const tow::provider::ChatRequest& request) override {
    const std::string& content = request.messages.back().content;
    std::string reply = respond(request.model, content);
    std::string digest = tow::provider::cache_key(request);
    auto [it, inserted] = collected_.emplace(digest, reply);
    check(inserted || it->second == reply, "conflicting replies for digest " + digest);
    tow::provider::ChatResponse response;
    response.content = reply;
    return response;
  }

  std::string name() const override { return "scripted"; }

 private:
  const PlanEntry& entry_for_context(const std::string& context) const {
    auto it = plan_.find(context);
    check(it != plan_.end(), "no plan entry for extracted context");
    return it->second;
  }

  std::string respond(const std::string& model, const std::string& content) const {
    if (content.find("you need to predict the next word") != std::string::npos) {
      std::string context = slice_between(content, "based on the following context:\n",
                                          "\n\nThought:\nNext Word:", true);
      return entry_for_context(context).generation;
    }
    if (content.find("you need to judge whether the thought") != std::string::npos) {
      std::string context = slice_between(content, "\n\nContext: ", "\nThought: ", false);
      const PlanEntry& entry = entry_for_context(context);
      check(!entry.judgement.empty(), "judge call for an exact-match record");
      return entry.judgement;
    }
    if (content.find("modify the following thought into a shorter one") != std::string::npos) {
      std::string context = slice_between(content, "\nContext: ", "\nThought: ", false);
      const PlanEntry& entry = entry_for_context(context);
      check(!entry.shorter.empty(), "denoise call for an unpredictable record");
      return entry.shorter;
    }
    // Eval prompt: the final question names the bench example.
    std::string question;
    if (content.find("\nOptions: ") != std::string::npos) {
      question = slice_between(content, "Question: ", "\nOptions: ", true);
    } else {
      question = slice_between(content, "Question: ", "\nAnswer: ", true);
    }
    auto it = eval_plan_.find(model + "|" + question);
    check(it != eval_plan_.end(), "no eval plan for model " + model);
    return it->second;
  }

  const std::map<std::string, PlanEntry>& plan_;
  const std::map<std::string, std::string>& eval_plan_;
  std::map<std::string, std::string>& collected_;
};

// --- auxiliary fixture files ----------------------------------------------------

void write_annotations(const std::string& path) {
  // 135 items: 45 agree-consistent, 34 model-only, 3 human-only, 53 agree-inconsistent.
  std::string body;
  int id = 0;
  auto emit = [&](int count, bool human, bool model) {
    for (int i = 0; i < count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "ann-%03d", ++id);
      body += tow::jsonio::dump(json{{"id", buf}, {"human", human}, {"model", model}});
      body += '\n';
    }
  };
  emit(45, true, true);
  emit(34, false, true);
  emit(3, true, false);
  emit(53, false, false);
  tow::jsonio::write_file_atomic(path, body);
}

// Ten documents; the augmented copy carries three 5-word thoughts per
// document, so (total - raw) / tags = (5 + 2) = 7 tokens per tag.
void write_stats_pair(const std::string& raw_path, const std::string& tow_path) {
  const char* kBases[] = {
      "The kiln crew stacked greenware along the north wall before firing began",
      "Morning fog lifted slowly while the rowers carried their shell to the dock",
      "A narrow path climbs from the orchard gate toward the upper spring",
      "The binder pressed each signature flat before sewing the spine",
      "Heavy rain filled the cistern twice during the final week of harvest",
      "Lantern light crossed the jetty as the last ferry eased into its berth",
      "The apprentice ground fresh pigment while the muralist sketched the arch",
      "Dry leaves gathered against the fence where the survey stakes stood",
      "A brass bell above the chandlery door announced every customer",
      "The night shift logged three small tremors before the gauges settled",
  };
  const char* kThoughts[] = {
      "the crew prepares the kiln",
      "steady morning work continues here",
      "the route climbs higher now",
  };

  std::string raw_body;
  std::string tow_body;
  for (int i = 0; i < 10; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "stat-%02d", i);
    std::string raw_text = kBases[i];
    auto words = tow::text::split_whitespace(raw_text);
    check(words.size() >= 9, "stats base sentence too short");

    // Insert a tagged thought before the 3rd, 6th, and 9th word.
    std::string tow_text;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w > 0) tow_text += ' ';
      if (w == 2 || w == 5 || w == 8) {
        tow_text += "<ToW> ";
        tow_text += kThoughts[(w / 3) % 3];
        tow_text += " </ToW> ";
      }
      tow_text += words[w];
    }
    raw_body += tow::jsonio::dump(json{{"id", id}, {"text", raw_text}});
    raw_body += '\n';
    tow_body += tow::jsonio::dump(json{{"id", id}, {"text", tow_text}});
    tow_body += '\n';
  }
  tow::jsonio::write_file_atomic(raw_path, raw_body);
  tow::jsonio::write_file_atomic(tow_path, tow_body);
}

// --- verification -----------------------------------------------------------------

tow::pipeline::Settings mock_settings(const std::string& fixtures_dir,
                                      const std::string& out_dir) {
  tow::pipeline::Settings s;
  s.corpus_path = fixtures_dir + "/corpus_50.jsonl";
  s.out_dir = out_dir;
  s.seed = kSeed;
  s.per_doc = kPerDoc;
  s.provider = "mock";
  s.mock_fixtures = fixtures_dir + "/mock_fixtures.json";
  s.cache_dir = "off";
  s.jobs = 1;
  return s;
}

void verify_pipeline(const std::string& fixtures_dir) {
  std::string out_dir =
      (fs::temp_directory_path() / "towforge-fixture-verify").string();
  fs::remove_all(out_dir);
  auto result = tow::pipeline::run_pipeline(mock_settings(fixtures_dir, out_dir));
  const auto& generate_stage = result.manifest_entry.at("stages").at("generate");
  check(generate_stage.at("failed").get<std::int64_t>() == 0,
        "scripted pipeline reported generation failures");

  auto records = tow::read_records(out_dir + "/records.jsonl");
  check(records.size() == 200, "expected 200 records, got " + std::to_string(records.size()));
  std::size_t em = 0;
  std::size_t soft = 0;
  std::size_t unpred = 0;
  for (const auto& record : records) {
    check(record.flags.empty(), "record " + record.record_id() + " carries flags");
    check(record.category.has_value(), "record " + record.record_id() + " uncategorized");
    switch (*record.category) {
      case tow::Category::kExactMatch: ++em; break;
      case tow::Category::kSoftConsistent: ++soft; break;
      case tow::Category::kUnpredictable: ++unpred; break;
      default: check(false, "unexpected category");
    }
  }
  check(em == 67 && soft == 67 && unpred == 66,
        "category split " + std::to_string(em) + "/" + std::to_string(soft) + "/" +
            std::to_string(unpred) + " != 67/67/66");
  fs::remove_all(out_dir);
}

void verify_eval(const std::string& fixtures_dir,
                 const std::vector<DemoExample>& examples) {
  tow::provider::MockOptions opts;
  opts.fixtures_path = fixtures_dir + "/mock_fixtures.json";
  tow::provider::MockProvider mock(opts);
  auto bench = tow::evalharness::read_bench(fixtures_dir + "/bench_sample.jsonl");
  check(bench.size() == examples.size(), "bench size mismatch");

  tow::emitter::WhitespaceTokenizer tokenizer;
  for (const auto& [model, want_accuracy] :
       std::map<std::string, double>{{"demo-tow", 1.0}, {"demo-raw", 0.75}}) {
    tow::evalharness::EvalRunConfig cfg;
    cfg.model = model;
    cfg.shots = tow::evalharness::default_mcq_shots();
    std::vector<tow::evalharness::EvalRecord> records;
    for (const auto& example : bench) {
      records.push_back(tow::evalharness::run_one(mock, example, cfg, tokenizer));
    }
    auto result = tow::evalharness::score(records);
    check(result.n == bench.size(), "eval n mismatch for " + model);
    check(result.accuracy == want_accuracy,
          model + " accuracy " + std::to_string(result.accuracy));
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string fixtures_dir = argc > 1 ? argv[1] : "fixtures";
  try {
    fs::create_directories(fixtures_dir);

    auto docs = build_corpus();
    write_corpus(fixtures_dir + "/corpus_50.jsonl", docs);
    docs = tow::corpus::load_documents(fixtures_dir + "/corpus_50.jsonl").documents;
    check(docs.size() == kDocCount, "corpus round-trip lost documents");

    // Plan a scripted response for every request the pipeline will make.
    tow::pipeline::Settings settings = mock_settings(fixtures_dir, "unused");
    auto generation_cfg = tow::pipeline::generation_config(settings);
    const auto& stopwords = tow::corpus::StopwordList::builtin();

    std::map<std::string, PlanEntry> plan;
    std::vector<tow::corpus::WordTarget> targets;
    std::size_t index = 0;
    for (const auto& doc : docs) {
      auto doc_targets = tow::corpus::sample_targets(doc, stopwords, kPerDoc, kSeed);
      for (const auto& target : doc_targets) {
        std::string context = tow::thoughtgen::truncate_context_left(
            doc.text.substr(0, target.byte_start), generation_cfg.max_context_chars);
        auto [it, inserted] =
            plan.emplace(context, plan_for_target(index, context, target.surface));
        check(inserted, "duplicate context for target " + target.doc_id + ":" +
                            std::to_string(target.byte_start));
        targets.push_back(target);
        ++index;
      }
    }
    check(targets.size() == 200,
          "expected 200 targets, got " + std::to_string(targets.size()));

    std::map<std::string, std::string> eval_plan;
    auto examples = demo_examples();
    for (const auto& example : examples) {
      eval_plan["demo-tow|" + example.question] = example.tow_output;
      eval_plan["demo-raw|" + example.question] = example.raw_output;
    }

    // Drive the real stages once; every request that flows past is recorded.
    std::map<std::string, std::string> collected;
    ScriptedProvider scripted(plan, eval_plan, collected);
    auto records = tow::pipeline::run_generate(scripted, docs, targets, settings);
    records = tow::pipeline::run_check(scripted, std::move(records), settings);
    records = tow::pipeline::run_denoise(scripted, std::move(records), settings);
    for (const auto& record : records) {
      check(record.flags.empty() && record.category.has_value(),
            "scripted pipeline produced an imperfect record " + record.record_id());
    }

    std::string bench_body;
    for (const auto& example : examples) {
      bench_body += tow::jsonio::dump(example.bench_line);
      bench_body += '\n';
    }
    tow::jsonio::write_file_atomic(fixtures_dir + "/bench_sample.jsonl", bench_body);

    auto bench = tow::evalharness::read_bench(fixtures_dir + "/bench_sample.jsonl");
    tow::emitter::WhitespaceTokenizer tokenizer;
    for (const std::string model : {"demo-tow", "demo-raw"}) {
      tow::evalharness::EvalRunConfig cfg;
      cfg.model = model;
      cfg.shots = tow::evalharness::default_mcq_shots();
      for (const auto& example : bench) {
        tow::evalharness::run_one(scripted, example, cfg, tokenizer);
      }
    }

    json fixtures = json::object();
    for (const auto& [digest, content] : collected) fixtures[digest] = content;
    tow::jsonio::write_file_atomic(
        fixtures_dir + "/mock_fixtures.json",
        fixtures.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");

    write_annotations(fixtures_dir + "/annotations_sample.jsonl");
    write_stats_pair(fixtures_dir + "/stats_raw.jsonl", fixtures_dir + "/stats_tow.jsonl");

    verify_pipeline(fixtures_dir);
    verify_eval(fixtures_dir, examples);

    std::printf("fixtures written to %s (%zu scripted responses)\n", fixtures_dir.c_str(),
                collected.size());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixtures: %s\n", e.what());
    return 1;
  }
}
