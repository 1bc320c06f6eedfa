#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/topic_set.hpp"

namespace topicllm {

/// Boolean sliding-window counts over a reference corpus. A window of
/// `window_size` tokens slides with stride 1 over each document; documents
/// shorter than the window contribute exactly one window. A word (or pair)
/// is counted at most once per window.
class CooccurrenceIndex {
 public:
  /// `restrict_to`, when given, limits counting to those words; counts for
  /// them are identical to an unrestricted build. Throws EmptyCorpus.
  static CooccurrenceIndex build(const Corpus& reference, std::size_t window_size, double epsilon = 1e-12,
                                 const std::unordered_set<std::string>* restrict_to = nullptr);

  std::size_t window_size() const noexcept { return window_size_; }
  double epsilon() const noexcept { return epsilon_; }
  std::uint64_t total_windows() const noexcept { return total_windows_; }

  std::uint64_t word_count(std::string_view word) const;
  std::uint64_t pair_count(std::string_view a, std::string_view b) const;
  std::size_t indexed_words() const noexcept { return ids_.size(); }

  /// NPMI(a, b) with epsilon smoothing on the joint probability; 1 when
  /// a == b; -1 when either word has no windows at all.
  double npmi(std::string_view a, std::string_view b) const;

 private:
  std::optional<std::uint32_t> id_of(std::string_view word) const;

  std::size_t window_size_ = 0;
  double epsilon_ = 1e-12;
  std::uint64_t total_windows_ = 0;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::uint64_t> word_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_counts_;
};

/// Cv coherence: per topic, each word's NPMI vector against all topic words
/// is compared (cosine) to the topic's summed NPMI vector; the topic score is
/// the mean over its words and Cv is the mean over topics.
double coherence_cv(const TopicSet& topics, const CooccurrenceIndex& index);

/// Per-topic Cv scores (same construction as coherence_cv).
std::vector<double> coherence_cv_per_topic(const TopicSet& topics, const CooccurrenceIndex& index);

/// Mean pairwise NPMI over distinct word pairs within topics (diagnostic).
double npmi_mean(const TopicSet& topics, const CooccurrenceIndex& index);

/// Topic uniqueness: mean over all K*T slots of 1 / (number of topics containing the word).
double diversity_tu(const TopicSet& topics);

/// Fraction of reference documents holding at least one topic word.
double coverage_dc(const TopicSet& topics, const Corpus& reference);

enum class FaMode { slots, unique_words };
std::string_view to_string(FaMode mode) noexcept;
FaMode fa_mode_from_string(std::string_view name);

/// Fraction of topic-word slots (or unique words) present in the reference vocabulary.
double factuality_fa(const TopicSet& topics, const Corpus& reference, FaMode mode = FaMode::slots);

/// DC with the reference restricted to documents labeled `category`.
/// Throws UnknownCategory.
double coverage_by_category(const TopicSet& topics, const Corpus& corpus, std::string_view category);

/// Topic-word slots absent from the reference vocabulary, in slot order.
std::vector<std::string> list_nonfactual_words(const TopicSet& topics, const Corpus& reference);

struct MetricConfig {
  std::size_t window_size = 110;
  double epsilon = 1e-12;
  FaMode fa_mode = FaMode::slots;
  // Categories for DC_[CAT]; empty means none.
  std::vector<std::string> dc_categories;
  // Human-readable name of the Cv reference corpus, echoed in reports.
  std::string reference_name = "self";
};

struct MetricValues {
  double cv = 0.0;
  double tu = 0.0;
  double dc = 0.0;
  double fa = 0.0;
  std::map<std::string, double> dc_by_category;
};

/// All four metrics for one TopicSet. `evaluation` is the DC/Fa reference
/// (and source of category slices); `cv_reference` backs Cv.
MetricValues evaluate_topics(const TopicSet& topics, const Corpus& evaluation, const Corpus& cv_reference,
                             const MetricConfig& config);

}  // namespace topicllm
