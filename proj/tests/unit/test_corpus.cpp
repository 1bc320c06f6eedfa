#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "topicllm/corpus.hpp"
#include "topicllm/error.hpp"

using namespace topicllm;

namespace {

std::vector<RawDocument> raw(std::initializer_list<const char*> texts) {
  std::vector<RawDocument> out;
  for (const auto* t : texts) out.push_back({t, std::nullopt});
  return out;
}

Corpus numbered_corpus(std::size_t n) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back({{"doc" + std::to_string(i)}, std::nullopt});
  return Corpus(std::move(docs));
}

// Independent restatement of the three preprocessing rules.
std::vector<std::vector<std::string>> brute_preprocess(const std::vector<std::string>& texts, std::size_t min_freq,
                                                       std::size_t min_len) {
  std::vector<std::vector<std::string>> toks;
  for (const auto& t : texts) toks.push_back(tokenize(t));
  std::map<std::string, std::size_t> counts;
  for (const auto& d : toks) {
    for (const auto& w : d) ++counts[w];
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& d : toks) {
    std::vector<std::string> kept;
    for (const auto& w : d) {
      if (utf8_length(w) >= min_len && counts[w] >= min_freq) kept.push_back(w);
    }
    if (!kept.empty()) out.push_back(kept);
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("topicllm_corpus_" + name);
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Tokenize, LowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(tokenize("Hello, World! (NLP)"), (std::vector<std::string>{"hello", "world", "nlp"}));
  EXPECT_EQ(tokenize("  ... -- "), std::vector<std::string>{});
  EXPECT_EQ(tokenize("don't c++"), (std::vector<std::string>{"don't", "c"}));
}

TEST(Utf8Length, CountsCodePoints) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("\xc3\xa9t\xc3\xa9"), 3u);  // "été"
  EXPECT_EQ(utf8_length(""), 0u);
}

TEST(Preprocess, WorkedExample) {
  const auto corpus = preprocess(raw({"I am an NLP researcher", "NLP NLP NLP NLP is fun fun fun fun"}), {5, 3});
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].tokens, (std::vector<std::string>{"nlp"}));
  EXPECT_EQ(corpus[1].tokens, (std::vector<std::string>{"nlp", "nlp", "nlp", "nlp"}));
  const auto oracle = brute_preprocess({"I am an NLP researcher", "NLP NLP NLP NLP is fun fun fun fun"}, 5, 3);
  EXPECT_EQ(oracle, (std::vector<std::vector<std::string>>{{"nlp"}, {"nlp", "nlp", "nlp", "nlp"}}));
}

TEST(Preprocess, DisabledFiltersOnlyLowercase) {
  const auto corpus = preprocess(raw({"A b C", "d E"}), {1, 1});
  EXPECT_EQ(corpus[0].tokens, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(corpus[1].tokens, (std::vector<std::string>{"d", "e"}));
}

TEST(Preprocess, AllCatCorpus) {
  const auto corpus = preprocess(raw({"cat cat cat", "cat cat"}), {5, 3});
  EXPECT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.vocabulary().size(), 1u);
  EXPECT_TRUE(corpus.contains("cat"));
}

TEST(Preprocess, EmptyAfterFilteringThrows) {
  try {
    preprocess(raw({"a b", "c d"}), {1, 3});
    FAIL() << "expected EmptyCorpus";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
}

TEST(Preprocess, DropsEmptiedDocsAndKeepsCategories) {
  std::vector<RawDocument> docs{{"alpha alpha", std::string("x")}, {"zz", std::string("y")}, {"alpha", std::string("z")}};
  const auto corpus = preprocess(docs, {1, 3});
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].category, std::optional<std::string>("x"));
  EXPECT_EQ(corpus[1].category, std::optional<std::string>("z"));
}

TEST(Preprocess, MatchesBruteForceOnRandomText) {
  std::mt19937_64 rng(7);
  const char* words[] = {"ab", "abc", "Abcd", "xyz", "Q", "lorem", "ipsum", "dolor", "sit", "amet", "ok"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> texts(1 + rng() % 12);
    for (auto& t : texts) {
      const auto n = 1 + rng() % 10;
      for (std::size_t i = 0; i < n; ++i) t += std::string(words[rng() % 11]) + (rng() % 5 == 0 ? ", " : " ");
    }
    const std::size_t min_freq = 1 + rng() % 4;
    const std::size_t min_len = 1 + rng() % 4;
    const auto expected = brute_preprocess(texts, min_freq, min_len);
    std::vector<RawDocument> in;
    for (const auto& t : texts) in.push_back({t, std::nullopt});
    if (expected.empty()) {
      EXPECT_THROW(preprocess(in, {min_freq, min_len}), Error);
      continue;
    }
    const auto corpus = preprocess(in, {min_freq, min_len});
    std::vector<std::vector<std::string>> got;
    for (const auto& d : corpus.documents()) got.push_back(d.tokens);
    EXPECT_EQ(got, expected);
  }
}

TEST(Preprocess, IdempotentWithMinFreqOne) {
  const auto once = preprocess(raw({"The quick brown fox", "the lazy dog and the fox", "quick quick fox the"}), {2, 3});
  std::vector<RawDocument> again;
  for (const auto& d : once.documents()) {
    std::string text;
    for (const auto& w : d.tokens) text += w + " ";
    again.push_back({text, d.category});
  }
  const auto twice = preprocess(again, {1, 3});
  EXPECT_EQ(once.documents(), twice.documents());
}

TEST(Preprocess, VocabularyMonotoneInThresholds) {
  std::mt19937_64 rng(11);
  const char* words[] = {"ab", "abc", "abcd", "abcde", "xy", "xyz", "lorem", "ipsum"};
  std::vector<RawDocument> in;
  for (int i = 0; i < 40; ++i) {
    std::string t;
    for (int j = 0; j < 8; ++j) t += std::string(words[rng() % 8]) + " ";
    in.push_back({t, std::nullopt});
  }
  std::size_t previous = SIZE_MAX;
  for (std::size_t f = 1; f <= 60; f += 5) {
    std::size_t size = 0;
    try {
      size = preprocess(in, {f, 1}).vocabulary().size();
    } catch (const Error&) {
      size = 0;
    }
    EXPECT_LE(size, previous);
    previous = size;
  }
  previous = SIZE_MAX;
  for (std::size_t len = 1; len <= 6; ++len) {
    std::size_t size = 0;
    try {
      size = preprocess(in, {1, len}).vocabulary().size();
    } catch (const Error&) {
      size = 0;
    }
    EXPECT_LE(size, previous);
    previous = size;
  }
}

TEST(Corpus, RejectsEmptyInput) {
  EXPECT_THROW(Corpus({}), Error);
  EXPECT_THROW(Corpus({Document{{}, std::nullopt}}), Error);
}

TEST(Corpus, VocabularyAndStats) {
  const Corpus c({{{"cat", "dog", "cat"}, std::nullopt}, {{"fish"}, std::nullopt}});
  EXPECT_EQ(c.vocabulary().at("cat"), 1u);
  EXPECT_EQ(c.vocabulary().size(), 3u);
  EXPECT_EQ(c.stats().document_count, 2u);
  EXPECT_DOUBLE_EQ(c.stats().mean_text_length, 2.0);
  EXPECT_EQ(c.stats(), Corpus::compute_stats(c.documents()));
}

TEST(SplitSubsets, Arithmetic) {
  const auto plan = split_subsets(numbered_corpus(2500), 1000, 1);
  EXPECT_EQ(plan.subsets.size(), 2u);
  EXPECT_EQ(plan.truncated_count(), 500u);
  EXPECT_EQ(split_subsets(numbered_corpus(1000), 1000, 1).subsets.size(), 1u);
  EXPECT_EQ(split_subsets(numbered_corpus(1000), 1000, 1).truncated_count(), 0u);
  EXPECT_EQ(split_subsets(numbered_corpus(11000), 1000, 3).subsets.size(), 11u);
}

TEST(SplitSubsets, TooLarge) {
  try {
    split_subsets(numbered_corpus(10), 11, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SubsetTooLarge);
  }
}

TEST(SplitSubsets, CoversEachDocumentOnceAndIsSeedDeterministic) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const std::size_t size = 1 + rng() % n;
    const auto corpus = numbered_corpus(n);
    const auto seed = rng();
    const auto plan = split_subsets(corpus, size, seed);
    EXPECT_EQ(plan, split_subsets(corpus, size, seed));
    EXPECT_EQ(plan.subsets.size() * size + plan.truncated_count(), n);
    EXPECT_EQ(plan.truncated_count(), n % size);
    std::multiset<std::size_t> seen;
    for (const auto& s : plan.subsets) {
      EXPECT_EQ(s.size(), size);
      seen.insert(s.begin(), s.end());
    }
    seen.insert(plan.truncated.begin(), plan.truncated.end());
    ASSERT_EQ(seen.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen.count(i), 1u);
  }
}

TEST(SplitSubsets, DifferentSeedsReorder) {
  const auto corpus = numbered_corpus(200);
  EXPECT_NE(split_subsets(corpus, 100, 1).subsets, split_subsets(corpus, 100, 2).subsets);
}

TEST(FilterByCategory, SelectsLabeledDocuments) {
  std::vector<Document> docs;
  for (int i = 0; i < 500; ++i) {
    docs.push_back({{"w" + std::to_string(i % 7), "shared"}, std::string(i < 126 ? "computer" : "other")});
  }
  const Corpus corpus(docs);
  const auto filtered = filter_by_category(corpus, "computer");
  EXPECT_EQ(filtered.size(), 126u);
  for (const auto& [w, df] : filtered.vocabulary()) EXPECT_TRUE(corpus.contains(w));
  for (const auto& d : filtered.documents()) EXPECT_EQ(d.category, std::optional<std::string>("computer"));
}

TEST(FilterByCategory, AllAndAbsent) {
  const Corpus corpus({{{"a"}, std::string("x")}, {{"b"}, std::string("x")}});
  EXPECT_EQ(filter_by_category(corpus, "x").documents(), corpus.documents());
  try {
    filter_by_category(corpus, "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCategory);
  }
}

TEST(Shuffled, PermutesDocuments) {
  const auto corpus = numbered_corpus(50);
  const auto s = shuffled(corpus, 9);
  EXPECT_EQ(s.documents(), shuffled(corpus, 9).documents());
  auto a = corpus.documents();
  auto b = s.documents();
  EXPECT_NE(a, b);
  auto by_token = [](const Document& x, const Document& y) { return x.tokens < y.tokens; };
  std::sort(a.begin(), a.end(), by_token);
  std::sort(b.begin(), b.end(), by_token);
  EXPECT_EQ(a, b);
}

TEST(LoadDocuments, PlainTsvAndLabels) {
  const auto plain = temp_file("plain.txt", "first doc\n\nsecond doc\n");
  auto docs = load_documents(plain);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_FALSE(docs[0].category);

  const auto tsv = temp_file("labeled.tsv", "sports\tgame team\npolitics\tvote law\n");
  docs = load_documents(tsv);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[1].category, std::optional<std::string>("politics"));
  EXPECT_EQ(docs[1].text, "vote law");

  const auto labels = temp_file("labels.txt", "a\nb\n");
  docs = load_documents(plain, {CorpusFormat::plain, labels});
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[1].category, std::optional<std::string>("b"));

  const auto short_labels = temp_file("short_labels.txt", "a\n");
  EXPECT_THROW(load_documents(plain, {CorpusFormat::plain, short_labels}), Error);
  EXPECT_THROW(load_documents("/nonexistent/corpus.txt"), Error);
}

TEST(SaveCorpus, RoundTrips) {
  const Corpus labeled({{{"alpha", "beta"}, std::string("x")}, {{"gamma"}, std::nullopt}});
  const auto path = std::filesystem::temp_directory_path() / "topicllm_corpus_roundtrip.tsv";
  save_corpus(labeled, path);
  const auto back = preprocess(load_documents(path, {CorpusFormat::tsv, std::nullopt}), {1, 1});
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], labeled[0]);
  EXPECT_EQ(back[1].tokens, labeled[1].tokens);
}

TEST(BundledData, ToyCorpusLoads) {
  const auto corpus = preprocess(load_documents(std::string(TOPICLLM_DATA_DIR) + "/toy_1000.txt"));
  EXPECT_EQ(corpus.size(), 1000u);
  const auto labeled = preprocess(load_documents(std::string(TOPICLLM_DATA_DIR) + "/labeled_news.tsv"));
  EXPECT_EQ(labeled.categories().size(), 5u);
}
