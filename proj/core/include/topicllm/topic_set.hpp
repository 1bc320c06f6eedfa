#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace topicllm {

enum class TopicSource { llm_parallel, llm_sequential, llm_controlled, lda, manual };

std::string_view to_string(TopicSource source) noexcept;
TopicSource topic_source_from_string(std::string_view name);

using Topic = std::vector<std::string>;

/// K topics of T lowercase words each. Every modeling path (LLM pipelines,
/// LDA, hand-written fixtures) produces one of these.
class TopicSet {
 public:
  TopicSet() = default;

  /// Validates the shape: at least one topic, all topics the same
  /// non-zero length, words lowercase and whitespace-free.
  /// Throws FormatError otherwise.
  TopicSet(std::vector<Topic> topics, TopicSource source);

  const std::vector<Topic>& topics() const noexcept { return topics_; }
  std::size_t k() const noexcept { return topics_.size(); }
  std::size_t t() const noexcept { return topics_.empty() ? 0 : topics_.front().size(); }
  std::size_t slot_count() const noexcept { return k() * t(); }
  TopicSource source() const noexcept { return source_; }
  bool empty() const noexcept { return topics_.empty(); }

  /// Every distinct word across all topics, sorted.
  std::vector<std::string> unique_words() const;

  /// "Topic 1: w w w\nTopic 2: ..." with a trailing newline.
  std::string to_reply_text() const;

  friend bool operator==(const TopicSet&, const TopicSet&) = default;

 private:
  std::vector<Topic> topics_;
  TopicSource source_ = TopicSource::manual;
};

}  // namespace topicllm
