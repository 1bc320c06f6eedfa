#pragma once

// Slow, direct implementations of the metric definitions. They share no code
// with the library: windows are materialized explicitly and every count is a
// nested loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/topic_set.hpp"

namespace oracle {

using Doc = std::vector<std::string>;
using Topics = std::vector<std::vector<std::string>>;

inline std::vector<std::set<std::string>> windows_of(const Doc& doc, std::size_t window) {
  std::vector<std::set<std::string>> out;
  if (doc.size() <= window) {
    out.emplace_back(doc.begin(), doc.end());
    return out;
  }
  for (std::size_t start = 0; start + window <= doc.size(); ++start) {
    out.emplace_back(doc.begin() + static_cast<std::ptrdiff_t>(start),
                     doc.begin() + static_cast<std::ptrdiff_t>(start + window));
  }
  return out;
}

inline std::vector<std::set<std::string>> all_windows(const std::vector<Doc>& docs, std::size_t window) {
  std::vector<std::set<std::string>> out;
  for (const auto& d : docs) {
    for (auto& w : windows_of(d, window)) out.push_back(std::move(w));
  }
  return out;
}

inline std::size_t count_windows_with(const std::vector<std::set<std::string>>& windows, const std::string& a) {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.count(a) ? 1 : 0;
  return n;
}

inline std::size_t count_windows_with(const std::vector<std::set<std::string>>& windows, const std::string& a,
                                      const std::string& b) {
  std::size_t n = 0;
  for (const auto& w : windows) n += (w.count(a) && w.count(b)) ? 1 : 0;
  return n;
}

inline double npmi(const std::vector<std::set<std::string>>& windows, const std::string& a, const std::string& b,
                   double eps) {
  if (a == b) return 1.0;
  const double n = static_cast<double>(windows.size());
  const double ca = static_cast<double>(count_windows_with(windows, a));
  const double cb = static_cast<double>(count_windows_with(windows, b));
  if (ca == 0.0 || cb == 0.0) return -1.0;
  const double pab = static_cast<double>(count_windows_with(windows, a, b)) / n + eps;
  const double pmi = std::log(pab) - std::log(ca / n) - std::log(cb / n);
  const double norm = -std::log(pab);
  if (norm <= 0.0) return 1.0;
  return pmi / norm;
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline double cv(const Topics& topics, const std::vector<Doc>& reference, std::size_t window, double eps) {
  const auto windows = all_windows(reference, window);
  const double n = static_cast<double>(windows.size());
  double total = 0.0;
  for (const auto& topic : topics) {
    const std::size_t t = topic.size();
    std::vector<double> single(t);
    for (std::size_t i = 0; i < t; ++i) single[i] = static_cast<double>(count_windows_with(windows, topic[i]));
    std::vector<std::vector<double>> vec(t, std::vector<double>(t));
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < t; ++j) {
        if (topic[i] == topic[j]) {
          vec[i][j] = 1.0;
        } else if (single[i] == 0.0 || single[j] == 0.0) {
          vec[i][j] = -1.0;
        } else {
          const double pab = static_cast<double>(count_windows_with(windows, topic[i], topic[j])) / n + eps;
          const double norm = -std::log(pab);
          vec[i][j] = norm <= 0.0 ? 1.0 : (std::log(pab) - std::log(single[i] / n) - std::log(single[j] / n)) / norm;
        }
      }
    }
    std::vector<double> sum(t, 0.0);
    for (const auto& row : vec) {
      for (std::size_t j = 0; j < t; ++j) sum[j] += row[j];
    }
    double topic_score = 0.0;
    for (const auto& row : vec) topic_score += cosine(row, sum);
    total += topic_score / static_cast<double>(t);
  }
  return total / static_cast<double>(topics.size());
}

inline double tu(const Topics& topics) {
  double total = 0.0;
  std::size_t slots = 0;
  for (const auto& topic : topics) {
    for (const auto& w : topic) {
      std::size_t cnt = 0;
      for (const auto& other : topics) cnt += std::count(other.begin(), other.end(), w) > 0 ? 1 : 0;
      total += 1.0 / static_cast<double>(cnt);
      ++slots;
    }
  }
  return total / static_cast<double>(slots);
}

inline double dc(const Topics& topics, const std::vector<Doc>& reference) {
  std::size_t covered = 0;
  for (const auto& doc : reference) {
    bool hit = false;
    for (const auto& topic : topics) {
      for (const auto& w : topic) {
        for (const auto& tok : doc) hit = hit || tok == w;
      }
    }
    covered += hit ? 1 : 0;
  }
  return static_cast<double>(covered) / static_cast<double>(reference.size());
}

inline double fa(const Topics& topics, const std::vector<Doc>& reference) {
  std::size_t present = 0, slots = 0;
  for (const auto& topic : topics) {
    for (const auto& w : topic) {
      ++slots;
      bool found = false;
      for (const auto& doc : reference) {
        for (const auto& tok : doc) found = found || tok == w;
      }
      present += found ? 1 : 0;
    }
  }
  return static_cast<double>(present) / static_cast<double>(slots);
}

// ---- random instances -------------------------------------------------------

inline std::string word(std::size_t id) {
  static const char* syllables[] = {"ka", "lo", "mi", "ren", "tus", "bo", "zel", "fa", "qui", "dor"};
  std::string w = "w";
  do {
    w += syllables[id % 10];
    id /= 10;
  } while (id > 0);
  return w;
}

inline std::vector<Doc> random_docs(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_len,
                                    std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> ndocs(1, max_docs);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
  std::vector<Doc> docs(ndocs(rng));
  for (auto& d : docs) {
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) d.push_back(word(pick(rng)));
  }
  return docs;
}

// Topics over a vocabulary slightly larger than the corpus one, so some
// words are absent from the reference.
inline Topics random_topics(std::mt19937_64& rng, std::size_t max_k, std::size_t max_t, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> kd(1, max_k);
  std::uniform_int_distribution<std::size_t> td(1, max_t);
  std::uniform_int_distribution<std::size_t> pick(0, vocab + vocab / 4);
  Topics topics(kd(rng));
  const auto t = td(rng);
  for (auto& topic : topics) {
    for (std::size_t i = 0; i < t; ++i) topic.push_back(word(pick(rng)));
  }
  return topics;
}

inline topicllm::Corpus to_corpus(const std::vector<Doc>& docs) {
  std::vector<topicllm::Document> out;
  for (const auto& d : docs) out.push_back({d, std::nullopt});
  return topicllm::Corpus(std::move(out));
}

inline topicllm::TopicSet to_set(const Topics& topics) {
  return topicllm::TopicSet(topics, topicllm::TopicSource::manual);
}

}  // namespace oracle
