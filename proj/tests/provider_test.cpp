#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "test_util.hpp"
#include "tow/jsonio.hpp"
#include "tow/provider.hpp"
#include "tow/sha256.hpp"

using namespace tow;

namespace {

provider::ChatRequest simple_request(const std::string& content,
                                     const std::string& tag = "") {
  provider::ChatRequest req;
  req.model = "test-model";
  req.messages.push_back({provider::Role::kUser, content});
  req.request_tag = tag;
  return req;
}

// Serves scripted status codes in sequence, then a success body.
class ScriptedServer {
 public:
  explicit ScriptedServer(std::vector<int> statuses)
      : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      auto n = hit_.fetch_add(1);
      last_body_ = req.body;
      if (req.has_header("Authorization")) {
        last_auth_ = req.get_header_value("Authorization");
      }
      int status = n < statuses_.size() ? statuses_[n] : 200;
      if (status != 200) {
        res.status = status;
        res.set_content("busy", "text/plain");
        return;
      }
      json body = {
          {"choices",
           {{{"message", {{"role", "assistant"}, {"content", "scripted reply"}}},
             {"finish_reason", "stop"}}}},
          {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}},
      };
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScriptedServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  std::size_t hits() const { return hit_.load(); }
  const std::string& last_body() const { return last_body_; }
  const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::vector<std::size_t> unused_;
  std::vector<int> statuses_;
  std::atomic<std::size_t> hit_{0};
  std::string last_body_;
  std::string last_auth_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("canonical_request_json is stable and sorted") {
  auto req = simple_request("hello there");
  req.temperature = 0.5;
  req.max_output_tokens = 99;
  auto canonical = provider::canonical_request_json(req);
  CHECK(canonical ==
        R"({"max_output_tokens":99,"messages":[{"content":"hello there","role":"user"}],)"
        R"("model":"test-model","temperature":0.5})");
}

TEST_CASE("cache_key ignores the request tag") {
  auto a = provider::cache_key(simple_request("same content", "tag-one"));
  auto b = provider::cache_key(simple_request("same content", "tag-two"));
  auto c = provider::cache_key(simple_request("different content", "tag-one"));
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 64);
  CHECK(a == sha256_hex(provider::canonical_request_json(simple_request("same content"))));
}

TEST_CASE("validate_request rejects empty or misordered conversations") {
  provider::ChatRequest empty;
  empty.model = "m";
  CHECK_THROWS_AS(provider::validate_request(empty), provider::ProviderError);

  provider::ChatRequest assistant_last;
  assistant_last.model = "m";
  assistant_last.messages.push_back({provider::Role::kUser, "hi"});
  assistant_last.messages.push_back({provider::Role::kAssistant, "hello"});
  CHECK_THROWS_AS(provider::validate_request(assistant_last), provider::ProviderError);

  CHECK_NOTHROW(provider::validate_request(simple_request("ok")));
}

TEST_CASE("mock provider replays string and object fixtures") {
  testutil::ScratchDir scratch("mock");
  auto req1 = simple_request("first question", "t1");
  auto req2 = simple_request("second question", "t2");
  json fixtures;
  fixtures[provider::cache_key(req1)] = "plain string reply";
  fixtures[provider::cache_key(req2)] = {
      {"content", "object reply"},
      {"finish_reason", "length"},
      {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 2}}},
  };
  testutil::write_file(scratch.path() / "fx.json", fixtures.dump());

  provider::MockOptions opts;
  opts.fixtures_path = scratch.str("fx.json");
  provider::MockProvider mock(opts);

  auto r1 = mock.complete(req1);
  CHECK(r1.content == "plain string reply");
  CHECK(r1.finish_reason == provider::FinishReason::kStop);
  auto r2 = mock.complete(req2);
  CHECK(r2.content == "object reply");
  CHECK(r2.finish_reason == provider::FinishReason::kLength);
  CHECK(r2.usage.prompt_tokens == 7);
  CHECK(r2.usage.completion_tokens == 2);

  REQUIRE(mock.call_count() == 2);
  CHECK(mock.calls()[0].request_tag == "t1");
  CHECK(mock.calls()[0].digest == provider::cache_key(req1));
  CHECK(mock.calls()[1].model == "test-model");
}

TEST_CASE("mock provider without a fixture throws or falls back to a refusal") {
  testutil::ScratchDir scratch("mockmiss");
  testutil::write_file(scratch.path() / "fx.json", "{}");

  provider::MockOptions hard;
  hard.fixtures_path = scratch.str("fx.json");
  provider::MockProvider strict(hard);
  CHECK_THROWS_AS(strict.complete(simple_request("unknown")), provider::ProviderError);

  provider::MockOptions soft = hard;
  soft.refusal_fallback = true;
  provider::MockProvider lenient(soft);
  auto r = lenient.complete(simple_request("unknown"));
  CHECK(r.content == provider::MockProvider::refusal_content());
}

TEST_CASE("mock fault injection is deterministic per digest") {
  testutil::ScratchDir scratch("mockfault");
  auto req = simple_request("faulty request");
  json fixtures;
  fixtures[provider::cache_key(req)] = "normal reply";
  testutil::write_file(scratch.path() / "fx.json", fixtures.dump());

  provider::MockOptions all_faults;
  all_faults.fixtures_path = scratch.str("fx.json");
  all_faults.fault_rate = 1.0;
  provider::MockProvider always(all_faults);
  auto first = always.complete(req);
  CHECK(first.content == provider::MockProvider::fault_content());
  CHECK(always.complete(req).content == first.content);  // same digest, same outcome

  provider::MockOptions no_faults = all_faults;
  no_faults.fault_rate = 0.0;
  provider::MockProvider never(no_faults);
  CHECK(never.complete(req).content == "normal reply");
}

TEST_CASE("mock provider rejects malformed fixture files") {
  testutil::ScratchDir scratch("mockbad");
  testutil::write_file(scratch.path() / "fx.json", "[1,2,3]");
  provider::MockOptions opts;
  opts.fixtures_path = scratch.str("fx.json");
  CHECK_THROWS(provider::MockProvider{opts});
}

TEST_CASE("fault and refusal bodies never parse as stage output") {
  // Both simulated failure payloads must stay multi-line and label-free so
  // no downstream parser mistakes them for a usable response.
  for (const auto& body : {provider::MockProvider::fault_content(),
                           provider::MockProvider::refusal_content()}) {
    CHECK(body.find('\n') != std::string::npos);
    CHECK(body.find("Thought:") == std::string::npos);
    CHECK(body.find("Next Word:") == std::string::npos);
    CHECK(body.find("Judgement:") == std::string::npos);
    CHECK(body.find("Shorter Thought:") == std::string::npos);
  }
}

TEST_CASE("cached provider stores entries by digest prefix") {
  testutil::ScratchDir scratch("cache");
  json fixtures;
  std::vector<provider::ChatRequest> requests;
  for (int i = 0; i < 10; ++i) {
    auto req = simple_request("question number " + std::to_string(i));
    fixtures[provider::cache_key(req)] = "answer " + std::to_string(i);
    requests.push_back(req);
  }
  testutil::write_file(scratch.path() / "fx.json", fixtures.dump());

  provider::MockOptions opts;
  opts.fixtures_path = scratch.str("fx.json");
  auto mock = std::make_shared<provider::MockProvider>(opts);
  provider::CachedProvider cached(mock, scratch.str("cache"));

  for (int i = 0; i < 10; ++i) {
    auto r = cached.complete(requests[i]);
    CHECK(r.content == "answer " + std::to_string(i));
    CHECK_FALSE(r.cached);
  }
  CHECK(cached.misses() == 10);
  CHECK(cached.hits() == 0);
  CHECK(mock->call_count() == 10);

  for (int i = 0; i < 10; ++i) {
    auto r = cached.complete(requests[i]);
    CHECK(r.content == "answer " + std::to_string(i));
    CHECK(r.cached);
  }
  CHECK(cached.hits() == 10);
  CHECK(mock->call_count() == 10);  // warm hits never reach the inner provider

  auto digest = provider::cache_key(requests[0]);
  auto entry = scratch.path() / "cache" / digest.substr(0, 2) / (digest + ".json");
  CHECK(std::filesystem::exists(entry));
}

TEST_CASE("cached provider treats corrupt entries as misses") {
  testutil::ScratchDir scratch("cachecorrupt");
  auto req = simple_request("corruptible");
  json fixtures;
  fixtures[provider::cache_key(req)] = "fresh answer";
  testutil::write_file(scratch.path() / "fx.json", fixtures.dump());

  provider::MockOptions opts;
  opts.fixtures_path = scratch.str("fx.json");
  auto mock = std::make_shared<provider::MockProvider>(opts);
  provider::CachedProvider cached(mock, scratch.str("cache"));

  cached.complete(req);
  auto digest = provider::cache_key(req);
  auto entry = scratch.path() / "cache" / digest.substr(0, 2) / (digest + ".json");
  testutil::write_file(entry, "{not valid json");

  auto r = cached.complete(req);
  CHECK(r.content == "fresh answer");
  CHECK(cached.misses() == 2);
  CHECK(mock->call_count() == 2);
  // The rewritten entry is usable again.
  CHECK(cached.complete(req).cached);
}

TEST_CASE("resolve_api_key prefers the role-specific variable") {
  ::unsetenv("TOWFORGE_API_KEY");
  ::unsetenv("TOWFORGE_JUDGE_API_KEY");
  CHECK(provider::resolve_api_key("judge").empty());

  ::setenv("TOWFORGE_API_KEY", "generic-key", 1);
  CHECK(provider::resolve_api_key("judge") == "generic-key");

  ::setenv("TOWFORGE_JUDGE_API_KEY", "judge-key", 1);
  CHECK(provider::resolve_api_key("judge") == "judge-key");
  CHECK(provider::resolve_api_key("generator") == "generic-key");

  ::unsetenv("TOWFORGE_API_KEY");
  ::unsetenv("TOWFORGE_JUDGE_API_KEY");
}

TEST_CASE("http provider retries retryable statuses with backoff") {
  ScriptedServer server({429, 503});

  provider::HttpOptions opts;
  opts.endpoint = server.endpoint();
  opts.api_key = "secret-key";
  opts.max_attempts = 5;
  opts.backoff_initial_ms = 1;
  opts.backoff_max_ms = 4;
  provider::HttpProvider http(opts);

  auto response = http.complete(simple_request("retry me"));
  CHECK(response.content == "scripted reply");
  CHECK(response.finish_reason == provider::FinishReason::kStop);
  CHECK(response.usage.prompt_tokens == 12);
  CHECK(http.total_attempts() == 3);
  CHECK(server.hits() == 3);
  CHECK(server.last_auth() == "Bearer secret-key");

  auto body = json::parse(server.last_body());
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("messages").at(0).at("role") == "user");
  CHECK(body.at("messages").at(0).at("content") == "retry me");
  CHECK(body.at("max_tokens") == 512);
}

TEST_CASE("http provider fails fast on non-retryable statuses") {
  ScriptedServer server({404});
  provider::HttpOptions opts;
  opts.endpoint = server.endpoint();
  opts.max_attempts = 5;
  opts.backoff_initial_ms = 1;
  provider::HttpProvider http(opts);
  CHECK_THROWS_AS(http.complete(simple_request("missing")), provider::ProviderError);
  CHECK(http.total_attempts() == 1);
  CHECK(server.hits() == 1);
}

TEST_CASE("http provider exhausts its attempt budget on persistent errors") {
  ScriptedServer server({500, 500, 500, 500, 500, 500});
  provider::HttpOptions opts;
  opts.endpoint = server.endpoint();
  opts.max_attempts = 2;
  opts.backoff_initial_ms = 1;
  provider::HttpProvider http(opts);
  try {
    http.complete(simple_request("always failing"));
    FAIL("expected budget exhaustion");
  } catch (const provider::ProviderError& e) {
    CHECK(std::string(e.what()).find("attempt budget exhausted") != std::string::npos);
  }
  CHECK(http.total_attempts() == 2);
  CHECK(server.hits() == 2);
}

TEST_CASE("http provider omits the auth header without a key") {
  ScriptedServer server({});
  provider::HttpOptions opts;
  opts.endpoint = server.endpoint();
  provider::HttpProvider http(opts);
  http.complete(simple_request("anonymous"));
  CHECK(server.last_auth().empty());
}

TEST_CASE("http provider rejects endpoints without a scheme") {
  provider::HttpOptions opts;
  opts.endpoint = "localhost:8080/v1/chat";
  provider::HttpProvider http(opts);
  CHECK_THROWS_AS(http.complete(simple_request("x")), std::invalid_argument);
}
