#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topicllm {

// Machine-readable failure classes. The CLI prints the class name verbatim.
enum class ErrorKind {
  PreconditionViolation,
  EmptyCorpus,
  SubsetTooLarge,
  UnknownCategory,
  AuthError,
  RateLimited,
  TransportError,
  BackendRejected,
  MalformedBackendReply,
  Truncated,
  MergeOfOne,
  MissingCategory,
  ContextBudgetExceeded,
  PipelineAborted,
  TemplateError,
  ConfigError,
  IoError,
  FormatError,
  ReportInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Throws PreconditionViolation when `condition` is false.
inline void require(bool condition, const std::string& what) {
  if (!condition) {
    throw Error(ErrorKind::PreconditionViolation, what);
  }
}

}  // namespace topicllm
