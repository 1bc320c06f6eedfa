#include "topicllm/error.hpp"

namespace topicllm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::SubsetTooLarge: return "SubsetTooLarge";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::BackendRejected: return "BackendRejected";
    case ErrorKind::MalformedBackendReply: return "MalformedBackendReply";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::MergeOfOne: return "MergeOfOne";
    case ErrorKind::MissingCategory: return "MissingCategory";
    case ErrorKind::ContextBudgetExceeded: return "ContextBudgetExceeded";
    case ErrorKind::PipelineAborted: return "PipelineAborted";
    case ErrorKind::TemplateError: return "TemplateError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::ReportInvalid: return "ReportInvalid";
  }
  return "Unknown";
}

}  // namespace topicllm
