#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicllm {

struct RawDocument {
  std::string text;
  std::optional<std::string> category;
};

struct Document {
  std::vector<std::string> tokens;
  std::optional<std::string> category;

  friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusStats {
  std::size_t document_count = 0;
  double mean_text_length = 0.0;  // tokens per document
  std::size_t vocabulary_size = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// An immutable, ordered collection of preprocessed documents. The vocabulary
/// (with per-word document frequency) is derived from the documents at
/// construction and never drifts from them.
class Corpus {
 public:
  /// Throws EmptyCorpus when `documents` is empty or any document has no tokens.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  std::size_t size() const noexcept { return documents_.size(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

  /// word -> number of documents containing it.
  const std::map<std::string, std::size_t, std::less<>>& vocabulary() const noexcept {
    return vocabulary_;
  }
  bool contains(std::string_view word) const { return vocabulary_.find(word) != vocabulary_.end(); }

  const CorpusStats& stats() const noexcept { return stats_; }

  /// Distinct category labels in first-seen order.
  std::vector<std::string> categories() const;

  /// Recomputes stats from the documents; equal to stats() by construction.
  static CorpusStats compute_stats(std::span<const Document> documents);

 private:
  std::vector<Document> documents_;
  std::map<std::string, std::size_t, std::less<>> vocabulary_;
  CorpusStats stats_;
};

struct PreprocessOptions {
  std::size_t min_freq = 5;      // minimum corpus-wide occurrence count
  std::size_t min_word_len = 3;  // in code points; words of 2 letters or less go
};

/// Lowercases (ASCII), splits on whitespace and strips non-alphanumeric
/// punctuation from both ends of every token. Tokens that are pure
/// punctuation vanish.
std::vector<std::string> tokenize(std::string_view text);

/// Number of UTF-8 code points in `word`.
std::size_t utf8_length(std::string_view word) noexcept;

/// Tokenize, drop short words, drop rare words, drop emptied documents.
/// Throws PreconditionViolation for empty input or zero thresholds, and
/// EmptyCorpus when nothing survives.
Corpus preprocess(std::span<const RawDocument> raw, const PreprocessOptions& options = {});

struct SubsetPlan {
  std::size_t subset_size = 0;
  std::vector<std::vector<std::size_t>> subsets;  // indices into the corpus
  std::vector<std::size_t> truncated;             // shuffled-out remainder
  std::size_t truncated_count() const noexcept { return truncated.size(); }

  friend bool operator==(const SubsetPlan&, const SubsetPlan&) = default;
};

/// Deterministic shuffle by `seed`, then floor(N / subset_size) subsets;
/// the remainder is truncated. Throws SubsetTooLarge if N < subset_size.
SubsetPlan split_subsets(const Corpus& corpus, std::size_t subset_size, std::uint64_t seed);

/// Documents of `plan.subsets[i]` in plan order.
std::vector<Document> subset_documents(const Corpus& corpus, const SubsetPlan& plan, std::size_t i);

/// Throws UnknownCategory when no document carries `category`.
Corpus filter_by_category(const Corpus& corpus, std::string_view category);

/// Same documents, order permuted by `seed`.
Corpus shuffled(const Corpus& corpus, std::uint64_t seed);

enum class CorpusFormat { automatic, plain, tsv };

struct LoadOptions {
  CorpusFormat format = CorpusFormat::automatic;
  std::optional<std::filesystem::path> labels_path;  // one label per line, parallel to plain text
};

/// Reads a one-document-per-line file (optionally `label<TAB>text`).
/// Blank lines are skipped. `automatic` picks tsv when every non-blank line
/// contains a tab. Throws IoError / FormatError.
std::vector<RawDocument> load_documents(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes `corpus` back out as space-joined token lines (tsv when labeled).
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace topicllm
