#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicllm/error.hpp"

namespace topicllm {

struct ChatRequest {
  std::string model_id;
  std::optional<std::string> system_message;
  std::string user_message;
  double temperature = 0.0;
  std::uint32_t max_output_tokens = 1024;
  std::optional<std::int64_t> seed;

  /// Throws PreconditionViolation on an empty user message, a negative or
  /// non-finite temperature, or a zero token limit.
  void validate() const;
};

enum class FinishReason { complete, truncated, error };
std::string_view to_string(FinishReason reason) noexcept;

struct TokenUsage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::complete;
  TokenUsage usage;
  // Set when finish_reason == error (only complete_many produces these).
  std::optional<ErrorKind> error_kind;
  std::string error_message;
  std::uint32_t attempts = 1;

  bool ok() const noexcept { return finish_reason != FinishReason::error; }
};

enum class BackendKind { http, mock };
std::string_view to_string(BackendKind kind) noexcept;
BackendKind backend_kind_from_string(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string endpoint_url;  // http only, e.g. https://api.openai.com/v1/chat/completions
  std::string api_key_env_var = "OPENAI_API_KEY";
  std::size_t max_concurrent = 4;
  std::size_t max_retries = 3;
  std::vector<std::chrono::milliseconds> retry_backoff{std::chrono::milliseconds(1000),
                                                       std::chrono::milliseconds(2000),
                                                       std::chrono::milliseconds(4000)};
  std::chrono::seconds timeout{120};
  std::optional<std::filesystem::path> run_log;

  void validate() const;
  /// Delay before retry number `retry` (0-based); the last entry repeats.
  std::chrono::milliseconds backoff_for(std::size_t retry) const;
};

/// Raised by backends for failures worth retrying (HTTP 429, 5xx, timeouts).
class TransientError : public Error {
 public:
  using Error::Error;
};

/// One attempt against a backend. Implementations throw TransientError for
/// retryable failures and Error for everything else.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Chat-completions over HTTP(S) with bearer-token auth. The credential is
/// read from the named environment variable on every call and only ever
/// placed in the Authorization header.
class HttpBackend final : public ChatBackend {
 public:
  HttpBackend(std::string endpoint_url, std::string api_key_env_var, std::chrono::seconds timeout);
  ChatResponse send(const ChatRequest& request) override;

  /// The JSON body sent for `request`. Exposed for tests.
  static std::string request_body(const ChatRequest& request);
  /// Parses a chat-completions reply body. Throws MalformedBackendReply.
  static ChatResponse parse_reply(std::string_view body);

 private:
  std::string base_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_env_var_;
  std::chrono::seconds timeout_;
};

// ---- mock backend ---------------------------------------------------------

struct MockRule {
  std::string contains;  // matched against the user message; empty matches everything
  std::string reply;
  FinishReason finish = FinishReason::complete;
  std::optional<ErrorKind> fail_with;  // permanent failure for matching requests
  std::size_t transient_failures = 0;  // TransientError this many times first
};

enum class MockFallback { heuristic, fail };

struct MockScript {
  std::vector<MockRule> rules;
  MockFallback fallback = MockFallback::heuristic;
  std::chrono::milliseconds latency{0};

  /// Reads the JSON script format:
  /// {"rules":[{"contains":"...","reply":"...","finish":"truncated",
  ///   "fail_with":"RateLimited","transient_failures":2}],
  ///  "fallback":"heuristic"|"fail","latency_ms":0}
  static MockScript load(const std::filesystem::path& path);
  static MockScript parse(std::string_view json_text);
};

/// Deterministic stand-in for an LLM. The first rule whose `contains`
/// substring occurs in the user message decides the reply; otherwise the
/// fallback answers. The heuristic fallback reads the prompt (requested
/// topic/word counts, the "# " document lines, any prior "Topic k:" lines)
/// and answers with a format-compliant frequency-based topic list, so
/// pipelines produce meaningful output without a network.
class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockScript script = {});
  ChatResponse send(const ChatRequest& request) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }
  std::vector<std::string> seen_prompts() const;

 private:
  MockScript script_;
  std::vector<std::size_t> transient_seen_;
  mutable std::mutex mutex_;
  std::vector<std::string> prompts_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
};

/// The heuristic reply used by MockBackend's fallback. Pure function.
std::string heuristic_topic_reply(std::string_view prompt);

// ---- gateway --------------------------------------------------------------

/// Appends one JSON object per attempt: {request, response, timestamp, attempt}.
class RunLog {
 public:
  explicit RunLog(std::filesystem::path path);
  void record(const ChatRequest& request, const ChatResponse* response, std::uint32_t attempt,
              const std::string& error);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

class LlmGateway {
 public:
  LlmGateway(BackendConfig config, std::shared_ptr<ChatBackend> backend);

  /// Builds the backend named by `config.kind`.
  static std::unique_ptr<LlmGateway> create(const BackendConfig& config, MockScript mock_script = {});

  /// Retries transient failures up to max_retries with the configured backoff.
  /// Throws AuthError, RateLimited, TransportError, BackendRejected or
  /// MalformedBackendReply. A truncated reply is returned, not thrown.
  ChatResponse complete(const ChatRequest& request);

  /// Responses in request order. At most max_concurrent requests are in
  /// flight; a failing request yields an error slot without affecting others.
  std::vector<ChatResponse> complete_many(std::span<const ChatRequest> requests);

  const BackendConfig& config() const noexcept { return config_; }
  ChatBackend& backend() noexcept { return *backend_; }

 private:
  BackendConfig config_;
  std::shared_ptr<ChatBackend> backend_;
  std::unique_ptr<RunLog> log_;
  std::counting_semaphore<> gate_;
};

}  // namespace topicllm
