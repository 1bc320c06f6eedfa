#include "topicllm/lda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "topicllm/error.hpp"

namespace topicllm {

LdaModel train_lda(const Corpus& corpus, const LdaParams& params) {
  if (corpus.size() == 0) throw Error(ErrorKind::EmptyCorpus, "cannot train LDA on an empty corpus");
  require(params.k >= 1, "train_lda: k must be >= 1");
  require(params.iterations >= 1, "train_lda: iterations must be >= 1");
  const double alpha = params.alpha.value_or(50.0 / static_cast<double>(params.k));
  require(alpha > 0.0 && params.beta > 0.0, "train_lda: alpha and beta must be positive");

  LdaModel m;
  m.k_ = params.k;
  m.alpha_ = alpha;
  m.beta_ = params.beta;
  m.iterations_ = params.iterations;
  m.seed_ = params.seed;
  for (const auto& [word, df] : corpus.vocabulary()) m.vocab_.push_back(word);

  const std::size_t K = m.k_;
  const std::size_t V = m.vocab_.size();
  const std::size_t N = corpus.size();
  m.topic_word_.assign(K * V, 0);
  m.doc_topic_.assign(N * K, 0);
  m.topic_totals_.assign(K, 0);

  std::vector<std::vector<std::uint32_t>> words(N);
  std::vector<std::vector<std::uint32_t>> z(N);
  for (std::size_t d = 0; d < N; ++d) {
    for (const auto& tok : corpus[d].tokens) {
      const auto it = std::lower_bound(m.vocab_.begin(), m.vocab_.end(), tok);
      words[d].push_back(static_cast<std::uint32_t>(it - m.vocab_.begin()));
    }
    m.token_count_ += words[d].size();
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::uint32_t> pick_topic(0, static_cast<std::uint32_t>(K - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t d = 0; d < N; ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const auto topic = pick_topic(rng);
      z[d][i] = topic;
      ++m.topic_word_[topic * V + words[d][i]];
      ++m.doc_topic_[d * K + topic];
      ++m.topic_totals_[topic];
    }
  }

  const double vbeta = static_cast<double>(V) * m.beta_;
  std::vector<double> cumulative(K);
  for (std::size_t iter = 1; iter <= params.iterations; ++iter) {
    for (std::size_t d = 0; d < N; ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::uint32_t w = words[d][i];
        std::uint32_t topic = z[d][i];
        --m.topic_word_[topic * V + w];
        --m.doc_topic_[d * K + topic];
        --m.topic_totals_[topic];

        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (m.doc_topic_[d * K + t] + alpha) * (m.topic_word_[t * V + w] + m.beta_) /
                   (static_cast<double>(m.topic_totals_[t]) + vbeta);
          cumulative[t] = total;
        }
        const double u = unit(rng) * total;
        topic = static_cast<std::uint32_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                           cumulative.begin());
        if (topic >= K) topic = static_cast<std::uint32_t>(K - 1);

        z[d][i] = topic;
        ++m.topic_word_[topic * V + w];
        ++m.doc_topic_[d * K + topic];
        ++m.topic_totals_[topic];
      }
    }
    if (params.likelihood_every > 0 && iter % params.likelihood_every == 0) {
      m.trace_.emplace_back(iter, m.log_likelihood());
    }
  }
  return m;
}

double LdaModel::log_likelihood() const {
  const std::size_t V = vocab_.size();
  const std::size_t N = document_count();
  const double K = static_cast<double>(k_);
  double ll = 0.0;
  ll += K * (std::lgamma(static_cast<double>(V) * beta_) - static_cast<double>(V) * std::lgamma(beta_));
  for (std::size_t t = 0; t < k_; ++t) {
    for (std::size_t w = 0; w < V; ++w) ll += std::lgamma(topic_word(t, w) + beta_);
    ll -= std::lgamma(static_cast<double>(topic_totals_[t]) + static_cast<double>(V) * beta_);
  }
  ll += static_cast<double>(N) * (std::lgamma(K * alpha_) - K * std::lgamma(alpha_));
  for (std::size_t d = 0; d < N; ++d) {
    std::uint64_t len = 0;
    for (std::size_t t = 0; t < k_; ++t) {
      ll += std::lgamma(doc_topic(d, t) + alpha_);
      len += doc_topic(d, t);
    }
    ll -= std::lgamma(static_cast<double>(len) + K * alpha_);
  }
  return ll;
}

bool LdaModel::counts_consistent() const {
  const std::uint64_t tw = std::accumulate(topic_word_.begin(), topic_word_.end(), std::uint64_t{0});
  const std::uint64_t dt = std::accumulate(doc_topic_.begin(), doc_topic_.end(), std::uint64_t{0});
  if (tw != token_count_ || dt != token_count_) return false;
  const std::size_t V = vocab_.size();
  for (std::size_t t = 0; t < k_; ++t) {
    std::uint64_t row = 0;
    for (std::size_t w = 0; w < V; ++w) row += topic_word(t, w);
    if (row != topic_totals_[t]) return false;
  }
  return true;
}

TopicSet top_words(const LdaModel& model, std::size_t t) {
  require(t >= 1 && t <= model.vocabulary_size(), "top_words: t must be in [1, vocabulary size]");
  std::vector<Topic> topics;
  std::vector<std::size_t> order(model.vocabulary_size());
  for (std::size_t topic = 0; topic < model.k(); ++topic) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // (count + beta) / (total + V beta) is monotone in count within a topic;
    // ids are lexicographic, so the stable sort settles ties by word.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return model.topic_word(topic, a) > model.topic_word(topic, b);
    });
    Topic words;
    for (std::size_t i = 0; i < t; ++i) words.push_back(model.vocabulary()[order[i]]);
    topics.push_back(std::move(words));
  }
  return TopicSet(std::move(topics), TopicSource::lda);
}

void LdaModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write LDA checkpoint " + path.string());
  out << std::setprecision(17);
  out << "topicllm-lda 1\n";
  out << "k " << k_ << "\nalpha " << alpha_ << "\nbeta " << beta_ << "\niterations " << iterations_
      << "\nseed " << seed_ << "\ntokens " << token_count_ << '\n';
  out << "vocabulary " << vocab_.size() << '\n';
  for (const auto& w : vocab_) out << w << '\n';
  const std::size_t V = vocab_.size();
  out << "topic_word " << k_ << ' ' << V << '\n';
  for (std::size_t t = 0; t < k_; ++t) {
    for (std::size_t w = 0; w < V; ++w) out << (w ? " " : "") << topic_word(t, w);
    out << '\n';
  }
  const std::size_t N = document_count();
  out << "doc_topic " << N << ' ' << k_ << '\n';
  for (std::size_t d = 0; d < N; ++d) {
    for (std::size_t t = 0; t < k_; ++t) out << (t ? " " : "") << doc_topic(d, t);
    out << '\n';
  }
  out << "trace " << trace_.size() << '\n';
  for (const auto& [iter, ll] : trace_) out << iter << ' ' << ll << '\n';
}

LdaModel LdaModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read LDA checkpoint " + path.string());
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorKind::FormatError, path.string() + ": " + what);
  };
  auto expect = [&](const char* key) {
    std::string got;
    if (!(in >> got) || got != key) throw fail(std::string("expected '") + key + "'");
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "topicllm-lda" || version != 1) throw fail("not an LDA checkpoint");

  LdaModel m;
  expect("k");
  in >> m.k_;
  expect("alpha");
  in >> m.alpha_;
  expect("beta");
  in >> m.beta_;
  expect("iterations");
  in >> m.iterations_;
  expect("seed");
  in >> m.seed_;
  expect("tokens");
  in >> m.token_count_;
  std::size_t V = 0;
  expect("vocabulary");
  in >> V;
  m.vocab_.resize(V);
  for (auto& w : m.vocab_) in >> w;
  std::size_t rows = 0, cols = 0;
  expect("topic_word");
  in >> rows >> cols;
  if (rows != m.k_ || cols != V) throw fail("topic_word shape mismatch");
  m.topic_word_.resize(rows * cols);
  for (auto& c : m.topic_word_) in >> c;
  expect("doc_topic");
  std::size_t N = 0;
  in >> N >> cols;
  if (cols != m.k_) throw fail("doc_topic shape mismatch");
  m.doc_topic_.resize(N * cols);
  for (auto& c : m.doc_topic_) in >> c;
  m.topic_totals_.assign(m.k_, 0);
  for (std::size_t t = 0; t < m.k_; ++t) {
    for (std::size_t w = 0; w < V; ++w) m.topic_totals_[t] += m.topic_word(t, w);
  }
  expect("trace");
  std::size_t n = 0;
  in >> n;
  m.trace_.resize(n);
  for (auto& [iter, ll] : m.trace_) in >> iter >> ll;
  if (!in) throw fail("truncated checkpoint");
  if (!m.counts_consistent()) throw fail("count matrices are inconsistent");
  return m;
}

}  // namespace topicllm
