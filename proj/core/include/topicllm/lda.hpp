#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/topic_set.hpp"

namespace topicllm {

struct LdaParams {
  std::size_t k = 5;
  std::optional<double> alpha;  // defaults to 50 / k
  double beta = 0.01;
  std::size_t iterations = 200;
  std::uint64_t seed = 1;
  std::size_t likelihood_every = 10;  // sweeps between log-likelihood samples; 0 disables
};

/// Collapsed Gibbs LDA state after training. The vocabulary is sorted, so
/// word ids follow lexicographic order.
class LdaModel {
 public:
  std::size_t k() const noexcept { return k_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::size_t iterations() const noexcept { return iterations_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }
  std::size_t document_count() const noexcept { return doc_topic_.size() / std::max<std::size_t>(k_, 1); }

  std::uint32_t topic_word(std::size_t topic, std::size_t word) const { return topic_word_[topic * vocab_.size() + word]; }
  std::uint32_t doc_topic(std::size_t doc, std::size_t topic) const { return doc_topic_[doc * k_ + topic]; }
  std::uint64_t topic_total(std::size_t topic) const { return topic_totals_[topic]; }
  std::uint64_t token_count() const noexcept { return token_count_; }

  /// (iteration, log p(w, z)) samples recorded during training.
  const std::vector<std::pair<std::size_t, double>>& likelihood_trace() const noexcept { return trace_; }

  /// Joint log-likelihood log p(w | z) + log p(z) of the current state.
  double log_likelihood() const;

  /// True when both count matrices sum to the token count and every
  /// topic total matches its row.
  bool counts_consistent() const;

  /// Text checkpoint: header, vocabulary, then both count matrices.
  void save(const std::filesystem::path& path) const;
  static LdaModel load(const std::filesystem::path& path);

  friend bool operator==(const LdaModel&, const LdaModel&) = default;

 private:
  friend LdaModel train_lda(const Corpus&, const LdaParams&);

  std::size_t k_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::size_t iterations_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t token_count_ = 0;
  std::vector<std::string> vocab_;
  std::vector<std::uint32_t> topic_word_;     // k x V, row-major
  std::vector<std::uint32_t> doc_topic_;      // N x k, row-major
  std::vector<std::uint64_t> topic_totals_;   // k
  std::vector<std::pair<std::size_t, double>> trace_;
};

/// Throws EmptyCorpus; PreconditionViolation for k == 0, iterations == 0,
/// or non-positive priors.
LdaModel train_lda(const Corpus& corpus, const LdaParams& params);

/// Highest (count + beta) words per topic, ties broken lexicographically.
/// Requires t <= vocabulary size.
TopicSet top_words(const LdaModel& model, std::size_t t);

}  // namespace topicllm
