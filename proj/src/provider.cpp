#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "tow/provider.hpp"

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "tow/jsonio.hpp"
#include "tow/log.hpp"
#include "tow/sha256.hpp"
#include "tow/text.hpp"

namespace fs = std::filesystem;

namespace tow::provider {

std::string role_name(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

std::string finish_reason_name(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop:
      return "stop";
    case FinishReason::kLength:
      return "length";
    case FinishReason::kOther:
      return "other";
  }
  return "other";
}

FinishReason finish_reason_from_name(const std::string& name) {
  if (name == "stop") return FinishReason::kStop;
  if (name == "length") return FinishReason::kLength;
  return FinishReason::kOther;
}

std::string canonical_request_json(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"content", m.content}, {"role", role_name(m.role)}});
  }
  json j{{"max_output_tokens", request.max_output_tokens},
         {"messages", std::move(messages)},
         {"model", request.model},
         {"temperature", request.temperature}};
  return jsonio::dump(j);
}

std::string cache_key(const ChatRequest& request) {
  return sha256_hex(canonical_request_json(request));
}

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw ProviderError("request has no messages", request.request_tag);
  }
  if (request.messages.back().role != Role::kUser) {
    throw ProviderError("last message must be a user turn", request.request_tag);
  }
}

// ---------------------------------------------------------------------------
// HttpProvider

namespace {

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint must include scheme: " + endpoint);
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

struct HttpProvider::Impl {
  explicit Impl(int max_inflight) : slots(max_inflight) {}

  std::mutex mutex;
  std::condition_variable cv;
  int slots;
};

HttpProvider::HttpProvider(HttpOptions options)
    : options_(std::move(options)),
      impl_(std::make_unique<Impl>(options_.max_inflight > 0 ? options_.max_inflight : 1)) {}

HttpProvider::~HttpProvider() = default;

ChatResponse HttpProvider::complete(const ChatRequest& request) {
  validate_request(request);
  auto parsed = parse_endpoint(options_.endpoint);

  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  json body{{"model", request.model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens}};
  std::string payload = jsonio::dump(body);

  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  std::unique_lock<std::mutex> gate(impl_->mutex);
  impl_->cv.wait(gate, [&] { return impl_->slots > 0; });
  --impl_->slots;
  gate.unlock();
  struct SlotRelease {
    Impl* impl;
    ~SlotRelease() {
      std::lock_guard<std::mutex> lock(impl->mutex);
      ++impl->slots;
      impl->cv.notify_one();
    }
  } release{impl_.get()};

  std::string last_error;
  double backoff_ms = options_.backoff_initial_ms;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    attempts_.fetch_add(1);
    httplib::Client client(parsed.base);
    client.set_connection_timeout(options_.timeout_sec, 0);
    client.set_read_timeout(options_.timeout_sec, 0);
    client.set_write_timeout(options_.timeout_sec, 0);
    auto res = client.Post(parsed.path, headers, payload, "application/json");

    if (res && res->status == 200) {
      json j;
      try {
        j = json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        ChatResponse out;
        out.content = choice.at("message").at("content").get<std::string>();
        out.finish_reason = finish_reason_from_name(choice.value("finish_reason", "other"));
        if (j.contains("usage") && j["usage"].is_object()) {
          out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
          out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
        }
        return out;
      } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what(),
                            request.request_tag);
      }
    }

    if (res && !retryable_status(res->status)) {
      throw ProviderError("provider returned status " + std::to_string(res->status) + ": " +
                              res->body,
                          request.request_tag);
    }
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error: " + httplib::to_string(res.error());
    if (attempt < options_.max_attempts) {
      log::warn("provider", "retrying after " + last_error + " (attempt " +
                                std::to_string(attempt) + ")",
                request.request_tag);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(backoff_ms)));
      backoff_ms = std::min(backoff_ms * options_.backoff_factor,
                            static_cast<double>(options_.backoff_max_ms));
    }
  }
  throw ProviderError("attempt budget exhausted (" + std::to_string(options_.max_attempts) +
                          " attempts, last: " + last_error + ")",
                      request.request_tag);
}

// ---------------------------------------------------------------------------
// MockProvider

std::string MockProvider::refusal_content() {
  return "I cannot provide a prediction for this request.\n"
         "The content I received does not give me enough grounded context to continue, "
         "so I must decline to guess here.";
}

std::string MockProvider::fault_content() {
  return "@@FAULT@@ upstream response corrupted in transit @@FAULT@@\n"
         "stream barrier dropped mid-frame and the checksum no longer matches the payload\n"
         "retry budget exhausted before completion; only partial bytes were recovered\n"
         "@@FAULT@@ end of corrupted segment @@FAULT@@";
}

MockProvider::MockProvider(MockOptions options) : options_(std::move(options)) {
  if (options_.fixtures_path.empty()) return;
  json j = json::parse(jsonio::read_file(options_.fixtures_path));
  if (!j.is_object()) {
    throw std::runtime_error("mock fixtures must be a json object: " + options_.fixtures_path);
  }
  for (const auto& [digest, value] : j.items()) {
    ChatResponse resp;
    if (value.is_string()) {
      resp.content = value.get<std::string>();
    } else if (value.is_object()) {
      resp.content = value.value("content", "");
      resp.finish_reason = finish_reason_from_name(value.value("finish_reason", "stop"));
      if (value.contains("usage") && value["usage"].is_object()) {
        resp.usage.prompt_tokens = value["usage"].value("prompt_tokens", 0);
        resp.usage.completion_tokens = value["usage"].value("completion_tokens", 0);
      }
    } else {
      throw std::runtime_error("mock fixture value for " + digest +
                               " must be a string or object");
    }
    fixtures_[digest] = std::move(resp);
  }
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
  validate_request(request);
  std::string digest = cache_key(request);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    calls_.push_back({digest, request.request_tag, request.model});
  }
  call_count_.fetch_add(1);

  if (options_.fault_rate > 0.0) {
    auto bucket = text::fnv1a64(digest) % 1000;
    if (static_cast<double>(bucket) < options_.fault_rate * 1000.0) {
      ChatResponse faulty;
      faulty.content = fault_content();
      faulty.finish_reason = FinishReason::kOther;
      return faulty;
    }
  }

  auto it = fixtures_.find(digest);
  if (it != fixtures_.end()) {
    ChatResponse out = it->second;
    out.cached = false;
    return out;
  }
  if (options_.refusal_fallback) {
    ChatResponse out;
    out.content = refusal_content();
    return out;
  }
  throw ProviderError("no mock fixture for digest " + digest, request.request_tag);
}

std::vector<MockCall> MockProvider::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

// ---------------------------------------------------------------------------
// CachedProvider

CachedProvider::CachedProvider(std::shared_ptr<Provider> inner, std::string cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
  fs::create_directories(cache_dir_);
}

std::string CachedProvider::entry_path(const std::string& digest) const {
  return (fs::path(cache_dir_) / digest.substr(0, 2) / (digest + ".json")).string();
}

ChatResponse CachedProvider::complete(const ChatRequest& request) {
  validate_request(request);
  std::string digest = cache_key(request);
  std::string path = entry_path(digest);

  if (fs::exists(path)) {
    try {
      json j = json::parse(jsonio::read_file(path));
      ChatResponse out;
      out.content = j.at("content").get<std::string>();
      out.finish_reason = finish_reason_from_name(j.value("finish_reason", "stop"));
      out.usage.prompt_tokens = j.value("usage", json::object()).value("prompt_tokens", 0);
      out.usage.completion_tokens =
          j.value("usage", json::object()).value("completion_tokens", 0);
      out.cached = true;
      hits_.fetch_add(1);
      return out;
    } catch (const std::exception& e) {
      log::warn("provider", "corrupt cache entry treated as miss: " + std::string(e.what()),
                request.request_tag);
    }
  }

  misses_.fetch_add(1);
  ChatResponse out = inner_->complete(request);
  json entry{{"digest", digest},
             {"content", out.content},
             {"finish_reason", finish_reason_name(out.finish_reason)},
             {"usage",
              {{"prompt_tokens", out.usage.prompt_tokens},
               {"completion_tokens", out.usage.completion_tokens}}},
             {"ts", log::iso8601_now()}};
  jsonio::write_file_atomic(path, jsonio::dump(entry) + "\n");
  out.cached = false;
  return out;
}

std::string resolve_api_key(const std::string& role) {
  std::string upper;
  for (char c : role) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  std::string var = "TOWFORGE_" + upper + "_API_KEY";
  if (const char* v = std::getenv(var.c_str()); v && *v) return v;
  if (const char* v = std::getenv("TOWFORGE_API_KEY"); v && *v) return v;
  return "";
}

}  // namespace tow::provider
