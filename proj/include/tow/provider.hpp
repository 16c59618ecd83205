#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tow::provider {

enum class Role { kSystem, kUser, kAssistant };

std::string role_name(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::string request_tag;  // stage + record id, audit only
};

enum class FinishReason { kStop, kLength, kOther };

std::string finish_reason_name(FinishReason reason);
FinishReason finish_reason_from_name(const std::string& name);

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::kStop;
  Usage usage;
  bool cached = false;
};

class ProviderError : public std::runtime_error {
 public:
  ProviderError(const std::string& message, std::string request_tag)
      : std::runtime_error(message), request_tag_(std::move(request_tag)) {}

  const std::string& request_tag() const { return request_tag_; }

 private:
  std::string request_tag_;
};

// Sorted-key JSON of (model, messages, temperature, max_output_tokens).
// request_tag is deliberately excluded.
std::string canonical_request_json(const ChatRequest& request);

// sha256 hex digest of canonical_request_json.
std::string cache_key(const ChatRequest& request);

// Throws ProviderError unless messages are non-empty and end with a user turn.
void validate_request(const ChatRequest& request);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct HttpOptions {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  int max_attempts = 5;
  int backoff_initial_ms = 250;
  double backoff_factor = 2.0;
  int backoff_max_ms = 30000;
  int timeout_sec = 60;
  int max_inflight = 8;
};

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpOptions options);
  ~HttpProvider() override;

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "http"; }

  // Total HTTP attempts across all requests, retries included.
  std::int64_t total_attempts() const { return attempts_.load(); }

 private:
  struct Impl;
  HttpOptions options_;
  std::atomic<std::int64_t> attempts_{0};
  std::unique_ptr<Impl> impl_;
};

struct MockOptions {
  std::string fixtures_path;
  double fault_rate = 0.0;       // deterministic per-digest corruption
  bool refusal_fallback = false;  // unmatched digest: refusal instead of error
};

struct MockCall {
  std::string digest;
  std::string request_tag;
  std::string model;
};

class MockProvider : public Provider {
 public:
  explicit MockProvider(MockOptions options);

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "mock"; }

  std::vector<MockCall> calls() const;
  std::int64_t call_count() const { return call_count_.load(); }

  static std::string refusal_content();
  static std::string fault_content();

 private:
  MockOptions options_;
  std::unordered_map<std::string, ChatResponse> fixtures_;
  mutable std::mutex mutex_;
  std::vector<MockCall> calls_;
  std::atomic<std::int64_t> call_count_{0};
};

class CachedProvider : public Provider {
 public:
  CachedProvider(std::shared_ptr<Provider> inner, std::string cache_dir);

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return inner_->name() + "+cache"; }

  std::int64_t hits() const { return hits_.load(); }
  std::int64_t misses() const { return misses_.load(); }
  Provider& inner() { return *inner_; }

 private:
  std::string entry_path(const std::string& digest) const;

  std::shared_ptr<Provider> inner_;
  std::string cache_dir_;
  std::atomic<std::int64_t> hits_{0};
  std::atomic<std::int64_t> misses_{0};
};

// Per-role env credential (TOWFORGE_<ROLE>_API_KEY) wins over the generic
// TOWFORGE_API_KEY; empty string when neither is set.
std::string resolve_api_key(const std::string& role);

}  // namespace tow::provider
