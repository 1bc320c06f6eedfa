#include "topicllm/topic_set.hpp"

#include <algorithm>
#include <cctype>

#include "topicllm/error.hpp"

namespace topicllm {

std::string_view to_string(TopicSource source) noexcept {
  switch (source) {
    case TopicSource::llm_parallel: return "llm_parallel";
    case TopicSource::llm_sequential: return "llm_sequential";
    case TopicSource::llm_controlled: return "llm_controlled";
    case TopicSource::lda: return "lda";
    case TopicSource::manual: return "manual";
  }
  return "manual";
}

TopicSource topic_source_from_string(std::string_view name) {
  for (auto s : {TopicSource::llm_parallel, TopicSource::llm_sequential,
                 TopicSource::llm_controlled, TopicSource::lda, TopicSource::manual}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::FormatError, "unknown topic source '" + std::string(name) + "'");
}

TopicSet::TopicSet(std::vector<Topic> topics, TopicSource source)
    : topics_(std::move(topics)), source_(source) {
  if (topics_.empty()) {
    throw Error(ErrorKind::FormatError, "topic set must contain at least one topic");
  }
  const std::size_t width = topics_.front().size();
  if (width == 0) {
    throw Error(ErrorKind::FormatError, "topics must contain at least one word");
  }
  for (const auto& topic : topics_) {
    if (topic.size() != width) {
      throw Error(ErrorKind::FormatError, "all topics must have the same number of words");
    }
    for (const auto& word : topic) {
      const bool bad = word.empty() || std::any_of(word.begin(), word.end(), [](unsigned char c) {
                         return std::isspace(c) || std::isupper(c);
                       });
      if (bad) {
        throw Error(ErrorKind::FormatError, "invalid topic word '" + word + "'");
      }
    }
  }
}

std::vector<std::string> TopicSet::unique_words() const {
  std::vector<std::string> words;
  for (const auto& topic : topics_) words.insert(words.end(), topic.begin(), topic.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

std::string TopicSet::to_reply_text() const {
  std::string out;
  for (std::size_t i = 0; i < topics_.size(); ++i) {
    out += "Topic " + std::to_string(i + 1) + ":";
    for (const auto& word : topics_[i]) {
      out += ' ';
      out += word;
    }
    out += '\n';
  }
  return out;
}

}  // namespace topicllm
