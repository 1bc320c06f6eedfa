#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topicllm/topic_set.hpp"

namespace topicllm {

enum class ParseStatus { ok, wrong_topic_count, wrong_word_count, format_violation };
std::string_view to_string(ParseStatus status) noexcept;
ParseStatus parse_status_from_string(std::string_view name);

struct ParseReport {
  ParseStatus status = ParseStatus::format_violation;
  std::size_t expected_k = 0;
  std::size_t found_k = 0;
  std::size_t expected_t = 0;
  // Lines that break the contract. Empty when status == ok.
  std::vector<std::string> offending_lines;
  // Non-blank lines that are not "Topic <n>: words" lines (surrounding prose).
  std::vector<std::string> ignored_lines;
  // Soft findings that do not fail the parse, e.g. duplicate words in a topic.
  std::vector<std::string> notes;

  bool ok() const noexcept { return status == ParseStatus::ok; }

  friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

struct ParseResult {
  std::optional<TopicSet> topics;
  ParseReport report;
};

/// Extracts topics from an LLM reply under the "Topic k: word word ..."
/// contract. A topic line is `Topic <int>:` (case-insensitive, leading
/// whitespace allowed) followed by at least one word; words are split on
/// whitespace and commas and lowercased. Succeeds iff exactly `expected_k`
/// topic lines each carry exactly `expected_t` words. Never throws.
ParseResult parse_topics(std::string_view reply, std::size_t expected_k, std::size_t expected_t,
                         TopicSource source = TopicSource::manual) noexcept;

enum class RetryDecision { reprompt_same, abort };

/// reprompt_same while attempt < max_attempts, abort afterwards.
/// Throws PreconditionViolation when `report` is ok.
RetryDecision retry_policy(const ParseReport& report, std::size_t attempt, std::size_t max_attempts);

}  // namespace topicllm
