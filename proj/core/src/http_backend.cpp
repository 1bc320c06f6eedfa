#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "topicllm/llm_gateway.hpp"

namespace topicllm {

using nlohmann::json;

namespace {

// Splits "https://host:port/v1/chat/completions" into base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::ConfigError, "endpoint_url must include a scheme: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::ConfigError, "unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

FinishReason finish_from_wire(const std::string& reason) {
  if (reason == "length") return FinishReason::truncated;
  return FinishReason::complete;
}

}  // namespace

HttpBackend::HttpBackend(std::string endpoint_url, std::string api_key_env_var, std::chrono::seconds timeout)
    : api_key_env_var_(std::move(api_key_env_var)), timeout_(timeout) {
  std::tie(base_, path_) = split_url(endpoint_url);
}

std::string HttpBackend::request_body(const ChatRequest& request) {
  json messages = json::array();
  if (request.system_message) {
    messages.push_back({{"role", "system"}, {"content", *request.system_message}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_message}});
  json body{{"model", request.model_id},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

ChatResponse HttpBackend::parse_reply(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::MalformedBackendReply, "reply body is not a JSON object");
  }
  try {
    const auto& choice = j.at("choices").at(0);
    ChatResponse response;
    const auto& content = choice.at("message").at("content");
    response.text = content.is_null() ? std::string{} : content.get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      response.finish_reason = finish_from_wire(choice["finish_reason"].get<std::string>());
    }
    if (j.contains("usage") && j["usage"].is_object()) {
      response.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
      response.usage.completion_tokens = j["usage"].value("completion_tokens", std::uint64_t{0});
    }
    if (response.finish_reason == FinishReason::complete && response.text.empty()) {
      throw Error(ErrorKind::MalformedBackendReply, "complete reply carries no text");
    }
    return response;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedBackendReply, std::string("unexpected reply shape: ") + e.what());
  }
}

ChatResponse HttpBackend::send(const ChatRequest& request) {
  const char* key = std::getenv(api_key_env_var_.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::AuthError, "environment variable " + api_key_env_var_ + " is not set");
  }

  httplib::Client client(base_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

  auto result = client.Post(path_, headers, request_body(request), "application/json");
  if (!result) {
    throw TransientError(ErrorKind::TransportError,
                         "request to " + base_ + path_ + " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorKind::AuthError, "credential rejected (HTTP " + std::to_string(status) + ")");
  }
  if (status == 429) {
    throw TransientError(ErrorKind::RateLimited, "HTTP 429 from backend");
  }
  if (status >= 500) {
    throw TransientError(ErrorKind::TransportError, "HTTP " + std::to_string(status) + " from backend");
  }
  if (status < 200 || status >= 300) {
    throw Error(ErrorKind::BackendRejected, "HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200));
  }
  return parse_reply(result->body);
}

}  // namespace topicllm
