#pragma once

#include <memory>
#include <string>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/llm_gateway.hpp"

namespace fixture {

inline topicllm::Corpus toy_corpus() {
  const auto raw = topicllm::load_documents(std::string(TOPICLLM_DATA_DIR) + "/toy_1000.txt");
  return topicllm::preprocess(raw);
}

inline topicllm::Corpus labeled_corpus() {
  const auto raw = topicllm::load_documents(std::string(TOPICLLM_DATA_DIR) + "/labeled_news.tsv");
  return topicllm::preprocess(raw);
}

// `per_label` documents for each (label, vocabulary) pair. Document i of a
// label uses a rotating window of its vocabulary plus a shared filler word.
inline topicllm::Corpus labeled_synthetic(const std::vector<std::pair<std::string, std::vector<std::string>>>& labels,
                                          const std::vector<std::size_t>& per_label) {
  std::vector<topicllm::Document> docs;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const auto& vocab = labels[l].second;
    for (std::size_t i = 0; i < per_label[l]; ++i) {
      topicllm::Document d;
      for (std::size_t j = 0; j < 4; ++j) d.tokens.push_back(vocab[(i + j) % vocab.size()]);
      d.tokens.push_back("today");
      d.category = labels[l].first;
      docs.push_back(std::move(d));
    }
  }
  return topicllm::Corpus(std::move(docs));
}

inline std::shared_ptr<topicllm::MockBackend> mock(topicllm::MockScript script = {}) {
  return std::make_shared<topicllm::MockBackend>(std::move(script));
}

inline topicllm::BackendConfig fast_config() {
  topicllm::BackendConfig cfg;
  cfg.retry_backoff = {std::chrono::milliseconds(1)};
  return cfg;
}

inline topicllm::MockRule rule(std::string contains, std::string reply) {
  topicllm::MockRule r;
  r.contains = std::move(contains);
  r.reply = std::move(reply);
  return r;
}

}  // namespace fixture
