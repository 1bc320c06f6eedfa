#include "topicllm/llm_gateway.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace topicllm {

using nlohmann::json;

void ChatRequest::validate() const {
  require(!user_message.empty(), "ChatRequest: user_message must be non-empty");
  require(std::isfinite(temperature) && temperature >= 0.0, "ChatRequest: temperature must be finite and >= 0");
  require(max_output_tokens > 0, "ChatRequest: max_output_tokens must be positive");
}

std::string_view to_string(FinishReason reason) noexcept {
  switch (reason) {
    case FinishReason::complete: return "complete";
    case FinishReason::truncated: return "truncated";
    case FinishReason::error: return "error";
  }
  return "error";
}

std::string_view to_string(BackendKind kind) noexcept {
  return kind == BackendKind::http ? "http" : "mock";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "http") return BackendKind::http;
  if (name == "mock") return BackendKind::mock;
  throw Error(ErrorKind::ConfigError, "unknown backend kind '" + std::string(name) + "'");
}

void BackendConfig::validate() const {
  if (kind == BackendKind::http && endpoint_url.empty()) {
    throw Error(ErrorKind::ConfigError, "http backend requires endpoint_url");
  }
  if (max_concurrent < 1) {
    throw Error(ErrorKind::ConfigError, "max_concurrent must be >= 1");
  }
  if (kind == BackendKind::http && api_key_env_var.empty()) {
    throw Error(ErrorKind::ConfigError, "http backend requires api_key_env_var");
  }
}

std::chrono::milliseconds BackendConfig::backoff_for(std::size_t retry) const {
  if (retry_backoff.empty()) return std::chrono::milliseconds(0);
  return retry_backoff[std::min(retry, retry_backoff.size() - 1)];
}

// ---- run log --------------------------------------------------------------

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

json request_json(const ChatRequest& r) {
  json j{{"model_id", r.model_id},
         {"user_message", r.user_message},
         {"temperature", r.temperature},
         {"max_output_tokens", r.max_output_tokens}};
  if (r.system_message) j["system_message"] = *r.system_message;
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

}  // namespace

RunLog::RunLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void RunLog::record(const ChatRequest& request, const ChatResponse* response, std::uint32_t attempt,
                    const std::string& error) {
  json line{{"request", request_json(request)}, {"timestamp", utc_timestamp()}, {"attempt", attempt}};
  if (response) {
    line["response"] = {{"text", response->text},
                        {"finish_reason", to_string(response->finish_reason)},
                        {"usage",
                         {{"prompt_tokens", response->usage.prompt_tokens},
                          {"completion_tokens", response->usage.completion_tokens}}}};
  } else {
    line["response"] = nullptr;
    line["error"] = error;
  }
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot append to run log " + path_.string());
  }
  out << line.dump() << '\n';
}

// ---- gateway --------------------------------------------------------------

LlmGateway::LlmGateway(BackendConfig config, std::shared_ptr<ChatBackend> backend)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      gate_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(config_.max_concurrent, 1))) {
  config_.validate();
  require(backend_ != nullptr, "LlmGateway: backend must not be null");
  if (config_.run_log) log_ = std::make_unique<RunLog>(*config_.run_log);
}

std::unique_ptr<LlmGateway> LlmGateway::create(const BackendConfig& config, MockScript mock_script) {
  config.validate();
  std::shared_ptr<ChatBackend> backend;
  if (config.kind == BackendKind::http) {
    backend = std::make_shared<HttpBackend>(config.endpoint_url, config.api_key_env_var, config.timeout);
  } else {
    backend = std::make_shared<MockBackend>(std::move(mock_script));
  }
  return std::make_unique<LlmGateway>(config, std::move(backend));
}

namespace {

struct Permit {
  explicit Permit(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~Permit() { sem.release(); }
  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;
  std::counting_semaphore<>& sem;
};

}  // namespace

ChatResponse LlmGateway::complete(const ChatRequest& request) {
  request.validate();
  for (std::uint32_t attempt = 1;; ++attempt) {
    try {
      ChatResponse response;
      {
        Permit permit(gate_);
        response = backend_->send(request);
      }
      response.attempts = attempt;
      if (log_) log_->record(request, &response, attempt, {});
      return response;
    } catch (const TransientError& e) {
      if (log_) log_->record(request, nullptr, attempt, std::string(to_string(e.kind())) + ": " + e.what());
      if (attempt > config_.max_retries) {
        throw Error(e.kind() == ErrorKind::RateLimited ? ErrorKind::RateLimited : ErrorKind::TransportError,
                    "giving up after " + std::to_string(attempt) + " attempts: " + e.what());
      }
      const auto delay = config_.backoff_for(attempt - 1);
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
    } catch (const Error& e) {
      if (log_) log_->record(request, nullptr, attempt, std::string(to_string(e.kind())) + ": " + e.what());
      throw;
    }
  }
}

std::vector<ChatResponse> LlmGateway::complete_many(std::span<const ChatRequest> requests) {
  require(!requests.empty(), "complete_many: requests must be non-empty");
  std::vector<ChatResponse> responses(requests.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        responses[i] = complete(requests[i]);
      } catch (const Error& e) {
        responses[i].finish_reason = FinishReason::error;
        responses[i].error_kind = e.kind();
        responses[i].error_message = e.what();
      } catch (const std::exception& e) {
        responses[i].finish_reason = FinishReason::error;
        responses[i].error_kind = ErrorKind::TransportError;
        responses[i].error_message = e.what();
      }
    }
  };

  const std::size_t workers = std::min(requests.size(), config_.max_concurrent);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return responses;
}

}  // namespace topicllm
