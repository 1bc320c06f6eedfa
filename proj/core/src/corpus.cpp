#include "topicllm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "topicllm/error.hpp"

namespace topicllm {

namespace {

bool is_edge_punct(unsigned char c) {
  // Bytes >= 0x80 belong to multibyte UTF-8 sequences and are kept.
  return c < 0x80 && !std::isalnum(c);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  if (documents_.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "corpus has no documents");
  }
  for (const auto& doc : documents_) {
    if (doc.tokens.empty()) {
      throw Error(ErrorKind::FormatError, "corpus documents must contain at least one token");
    }
    std::set<std::string_view> seen(doc.tokens.begin(), doc.tokens.end());
    for (auto word : seen) {
      auto it = vocabulary_.find(word);
      if (it == vocabulary_.end()) {
        vocabulary_.emplace(std::string(word), 1);
      } else {
        ++it->second;
      }
    }
  }
  stats_ = compute_stats(documents_);
}

std::vector<std::string> Corpus::categories() const {
  std::vector<std::string> labels;
  for (const auto& doc : documents_) {
    if (doc.category && std::find(labels.begin(), labels.end(), *doc.category) == labels.end()) {
      labels.push_back(*doc.category);
    }
  }
  return labels;
}

CorpusStats Corpus::compute_stats(std::span<const Document> documents) {
  CorpusStats stats;
  stats.document_count = documents.size();
  std::set<std::string_view> vocab;
  std::size_t total = 0;
  for (const auto& doc : documents) {
    total += doc.tokens.size();
    vocab.insert(doc.tokens.begin(), doc.tokens.end());
  }
  stats.vocabulary_size = vocab.size();
  stats.mean_text_length =
      documents.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents.size());
  return stats;
}

std::size_t utf8_length(std::string_view word) noexcept {
  return static_cast<std::size_t>(std::count_if(word.begin(), word.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view raw = text.substr(i, j - i);
    while (!raw.empty() && is_edge_punct(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && is_edge_punct(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (!raw.empty()) {
      std::string token(raw);
      for (auto& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

Corpus preprocess(std::span<const RawDocument> raw, const PreprocessOptions& options) {
  require(!raw.empty(), "preprocess: no input documents");
  require(options.min_freq >= 1, "preprocess: min_freq must be >= 1");
  require(options.min_word_len >= 1, "preprocess: min_word_len must be >= 1");

  std::vector<Document> docs;
  docs.reserve(raw.size());
  std::unordered_map<std::string, std::size_t> occurrences;
  for (const auto& r : raw) {
    Document doc{{}, r.category};
    for (auto& token : tokenize(r.text)) {
      if (utf8_length(token) < options.min_word_len) continue;
      ++occurrences[token];
      doc.tokens.push_back(std::move(token));
    }
    docs.push_back(std::move(doc));
  }

  // Length and frequency filters commute: a word's occurrence count does not
  // depend on which other words were removed.
  std::vector<Document> kept;
  for (auto& doc : docs) {
    std::erase_if(doc.tokens, [&](const std::string& w) { return occurrences[w] < options.min_freq; });
    if (!doc.tokens.empty()) kept.push_back(std::move(doc));
  }
  if (kept.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "every document became empty after preprocessing");
  }
  return Corpus(std::move(kept));
}

SubsetPlan split_subsets(const Corpus& corpus, std::size_t subset_size, std::uint64_t seed) {
  require(subset_size >= 1, "split_subsets: subset_size must be >= 1");
  const std::size_t n = corpus.size();
  if (n < subset_size) {
    throw Error(ErrorKind::SubsetTooLarge, "corpus has " + std::to_string(n) +
                                               " documents, fewer than subset size " +
                                               std::to_string(subset_size));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SubsetPlan plan;
  plan.subset_size = subset_size;
  const std::size_t count = n / subset_size;
  for (std::size_t s = 0; s < count; ++s) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(s * subset_size);
    plan.subsets.emplace_back(first, first + static_cast<std::ptrdiff_t>(subset_size));
  }
  plan.truncated.assign(order.begin() + static_cast<std::ptrdiff_t>(count * subset_size), order.end());
  return plan;
}

std::vector<Document> subset_documents(const Corpus& corpus, const SubsetPlan& plan, std::size_t i) {
  require(i < plan.subsets.size(), "subset_documents: subset index out of range");
  std::vector<Document> docs;
  docs.reserve(plan.subsets[i].size());
  for (auto idx : plan.subsets[i]) docs.push_back(corpus[idx]);
  return docs;
}

Corpus filter_by_category(const Corpus& corpus, std::string_view category) {
  std::vector<Document> docs;
  for (const auto& doc : corpus.documents()) {
    if (doc.category && *doc.category == category) docs.push_back(doc);
  }
  if (docs.empty()) {
    throw Error(ErrorKind::UnknownCategory, "no document carries category '" + std::string(category) + "'");
  }
  return Corpus(std::move(docs));
}

Corpus shuffled(const Corpus& corpus, std::uint64_t seed) {
  std::vector<Document> docs = corpus.documents();
  std::mt19937_64 rng(seed);
  std::shuffle(docs.begin(), docs.end(), rng);
  return Corpus(std::move(docs));
}

std::vector<RawDocument> load_documents(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open corpus file " + path.string());
  }
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }

  std::vector<std::string> labels;
  if (options.labels_path) {
    std::ifstream lab(*options.labels_path);
    if (!lab) {
      throw Error(ErrorKind::IoError, "cannot open label file " + options.labels_path->string());
    }
    for (std::string line; std::getline(lab, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      labels.push_back(std::string(trim(line)));
    }
    // Labels align either with every corpus line or with the non-blank ones.
    std::size_t non_blank = 0;
    for (const auto& line : lines) non_blank += trim(line).empty() ? 0 : 1;
    while (labels.size() > non_blank && labels.size() != lines.size() && labels.back().empty()) labels.pop_back();
    if (labels.size() != lines.size()) {
      if (labels.size() != non_blank) {
        throw Error(ErrorKind::FormatError, "label file has " + std::to_string(labels.size()) +
                                                " lines but corpus has " + std::to_string(lines.size()) + " lines (" +
                                                std::to_string(non_blank) + " non-blank)");
      }
      std::vector<std::string> by_line(lines.size());
      for (std::size_t i = 0, next = 0; i < lines.size(); ++i) {
        if (!trim(lines[i]).empty()) by_line[i] = labels[next++];
      }
      labels = std::move(by_line);
    }
  }

  CorpusFormat format = options.format;
  if (format == CorpusFormat::automatic) {
    bool any = false;
    bool all_tab = true;
    for (const auto& line : lines) {
      if (trim(line).empty()) continue;
      any = true;
      all_tab = all_tab && line.find('\t') != std::string::npos;
    }
    format = (any && all_tab && !options.labels_path) ? CorpusFormat::tsv : CorpusFormat::plain;
  }

  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    RawDocument doc;
    if (format == CorpusFormat::tsv) {
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) {
        if (trim(line).empty()) continue;
        throw Error(ErrorKind::FormatError,
                    path.string() + ":" + std::to_string(i + 1) + ": expected label<TAB>text");
      }
      auto label = trim(line.substr(0, tab));
      if (!label.empty()) doc.category = std::string(label);
      line = line.substr(tab + 1);
    } else if (options.labels_path && !labels[i].empty()) {
      doc.category = labels[i];
    }
    auto text = trim(line);
    if (text.empty()) continue;
    doc.text = std::string(text);
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "corpus file " + path.string() + " has no documents");
  }
  return docs;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  const bool labeled = std::any_of(corpus.documents().begin(), corpus.documents().end(),
                                   [](const Document& d) { return d.category.has_value(); });
  for (const auto& doc : corpus.documents()) {
    if (labeled) out << doc.category.value_or("") << '\t';
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << doc.tokens[i];
    }
    out << '\n';
  }
}

}  // namespace topicllm
