#include "topicllm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "topicllm/error.hpp"

namespace topicllm {

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::unordered_set<std::string> word_set(const TopicSet& topics) {
  std::unordered_set<std::string> words;
  for (const auto& topic : topics.topics()) words.insert(topic.begin(), topic.end());
  return words;
}

}  // namespace

CooccurrenceIndex CooccurrenceIndex::build(const Corpus& reference, std::size_t window_size, double epsilon,
                                           const std::unordered_set<std::string>* restrict_to) {
  require(window_size >= 1, "build_index: window_size must be >= 1");
  require(epsilon > 0.0 && std::isfinite(epsilon), "build_index: epsilon must be a small positive number");
  if (reference.size() == 0) throw Error(ErrorKind::EmptyCorpus, "reference corpus is empty");

  CooccurrenceIndex index;
  index.window_size_ = window_size;
  index.epsilon_ = epsilon;
  for (const auto& [word, df] : reference.vocabulary()) {
    if (restrict_to && !restrict_to->count(word)) continue;
    index.ids_.emplace(word, static_cast<std::uint32_t>(index.ids_.size()));
  }
  index.word_counts_.assign(index.ids_.size(), 0);

  std::vector<std::int64_t> ids;
  std::vector<std::uint32_t> window;
  for (const auto& doc : reference.documents()) {
    ids.clear();
    for (const auto& token : doc.tokens) {
      auto it = index.ids_.find(token);
      ids.push_back(it == index.ids_.end() ? -1 : static_cast<std::int64_t>(it->second));
    }
    const std::size_t n = ids.size();
    const std::size_t windows = n <= window_size ? 1 : n - window_size + 1;
    const std::size_t width = std::min(n, window_size);
    for (std::size_t start = 0; start < windows; ++start) {
      ++index.total_windows_;
      window.clear();
      for (std::size_t i = start; i < start + width; ++i) {
        if (ids[i] >= 0) window.push_back(static_cast<std::uint32_t>(ids[i]));
      }
      std::sort(window.begin(), window.end());
      window.erase(std::unique(window.begin(), window.end()), window.end());
      for (std::size_t a = 0; a < window.size(); ++a) {
        ++index.word_counts_[window[a]];
        for (std::size_t b = a + 1; b < window.size(); ++b) ++index.pair_counts_[pair_key(window[a], window[b])];
      }
    }
  }
  return index;
}

std::optional<std::uint32_t> CooccurrenceIndex::id_of(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t CooccurrenceIndex::word_count(std::string_view word) const {
  auto id = id_of(word);
  return id ? word_counts_[*id] : 0;
}

std::uint64_t CooccurrenceIndex::pair_count(std::string_view a, std::string_view b) const {
  auto ia = id_of(a);
  auto ib = id_of(b);
  if (!ia || !ib) return 0;
  if (*ia == *ib) return word_counts_[*ia];
  auto it = pair_counts_.find(pair_key(*ia, *ib));
  return it == pair_counts_.end() ? 0 : it->second;
}

double CooccurrenceIndex::npmi(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  const auto ca = word_count(a);
  const auto cb = word_count(b);
  if (ca == 0 || cb == 0) return -1.0;
  const double n = static_cast<double>(total_windows_);
  const double pa = static_cast<double>(ca) / n;
  const double pb = static_cast<double>(cb) / n;
  const double joint = static_cast<double>(pair_count(a, b)) / n + epsilon_;
  const double denom = -std::log(joint);
  // Both words in every window.
  if (denom <= 0.0) return 1.0;
  return std::log(joint / (pa * pb)) / denom;
}

std::vector<double> coherence_cv_per_topic(const TopicSet& topics, const CooccurrenceIndex& index) {
  std::vector<double> scores;
  scores.reserve(topics.k());
  for (const auto& topic : topics.topics()) {
    const std::size_t t = topic.size();
    std::vector<std::vector<double>> vectors(t, std::vector<double>(t));
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = i; j < t; ++j) {
        const double v = index.npmi(topic[i], topic[j]);
        vectors[i][j] = v;
        vectors[j][i] = v;
      }
    }
    std::vector<double> total(t, 0.0);
    for (const auto& v : vectors) {
      for (std::size_t j = 0; j < t; ++j) total[j] += v[j];
    }
    double sum = 0.0;
    for (const auto& v : vectors) sum += cosine(v, total);
    scores.push_back(sum / static_cast<double>(t));
  }
  return scores;
}

double coherence_cv(const TopicSet& topics, const CooccurrenceIndex& index) {
  require(!topics.empty(), "coherence_cv: empty topic set");
  const auto scores = coherence_cv_per_topic(topics, index);
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double npmi_mean(const TopicSet& topics, const CooccurrenceIndex& index) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& topic : topics.topics()) {
    for (std::size_t i = 0; i < topic.size(); ++i) {
      for (std::size_t j = i + 1; j < topic.size(); ++j) {
        sum += index.npmi(topic[i], topic[j]);
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

double diversity_tu(const TopicSet& topics) {
  require(!topics.empty(), "diversity_tu: empty topic set");
  std::unordered_map<std::string_view, std::size_t> topic_count;
  for (const auto& topic : topics.topics()) {
    std::unordered_set<std::string_view> seen(topic.begin(), topic.end());
    for (auto w : seen) ++topic_count[w];
  }
  // Slots grouped by how many topics hold their word: one division per
  // group keeps the boundary values (1 and 1/K) exact.
  std::map<std::size_t, std::size_t> slots_by_count;
  for (const auto& topic : topics.topics()) {
    for (const auto& w : topic) ++slots_by_count[topic_count[w]];
  }
  const double slots = static_cast<double>(topics.slot_count());
  double total = 0.0;
  for (const auto& [count, n] : slots_by_count) {
    total += static_cast<double>(n) / (static_cast<double>(count) * slots);
  }
  return total;
}

double coverage_dc(const TopicSet& topics, const Corpus& reference) {
  if (reference.size() == 0) throw Error(ErrorKind::EmptyCorpus, "reference corpus is empty");
  const auto words = word_set(topics);
  std::size_t covered = 0;
  for (const auto& doc : reference.documents()) {
    if (std::any_of(doc.tokens.begin(), doc.tokens.end(), [&](const auto& tok) { return words.count(tok) > 0; })) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(reference.size());
}

std::string_view to_string(FaMode mode) noexcept { return mode == FaMode::slots ? "slots" : "unique_words"; }

FaMode fa_mode_from_string(std::string_view name) {
  if (name == "slots") return FaMode::slots;
  if (name == "unique_words" || name == "unique") return FaMode::unique_words;
  throw Error(ErrorKind::ConfigError, "unknown fa mode '" + std::string(name) + "'");
}

double factuality_fa(const TopicSet& topics, const Corpus& reference, FaMode mode) {
  if (reference.size() == 0) throw Error(ErrorKind::EmptyCorpus, "reference corpus is empty");
  require(!topics.empty(), "factuality_fa: empty topic set");
  if (mode == FaMode::unique_words) {
    const auto words = topics.unique_words();
    const auto present = std::count_if(words.begin(), words.end(), [&](const auto& w) { return reference.contains(w); });
    return static_cast<double>(present) / static_cast<double>(words.size());
  }
  std::size_t present = 0;
  for (const auto& topic : topics.topics()) {
    for (const auto& w : topic) present += reference.contains(w) ? 1 : 0;
  }
  return static_cast<double>(present) / static_cast<double>(topics.slot_count());
}

double coverage_by_category(const TopicSet& topics, const Corpus& corpus, std::string_view category) {
  return coverage_dc(topics, filter_by_category(corpus, category));
}

std::vector<std::string> list_nonfactual_words(const TopicSet& topics, const Corpus& reference) {
  std::vector<std::string> missing;
  for (const auto& topic : topics.topics()) {
    for (const auto& w : topic) {
      if (!reference.contains(w)) missing.push_back(w);
    }
  }
  return missing;
}

MetricValues evaluate_topics(const TopicSet& topics, const Corpus& evaluation, const Corpus& cv_reference,
                             const MetricConfig& config) {
  const auto words = word_set(topics);
  const auto index = CooccurrenceIndex::build(cv_reference, config.window_size, config.epsilon, &words);
  MetricValues values;
  values.cv = coherence_cv(topics, index);
  values.tu = diversity_tu(topics);
  values.dc = coverage_dc(topics, evaluation);
  values.fa = factuality_fa(topics, evaluation, config.fa_mode);
  for (const auto& category : config.dc_categories) {
    values.dc_by_category[category] = coverage_by_category(topics, evaluation, category);
  }
  return values;
}

}  // namespace topicllm
