#include <benchmark/benchmark.h>

#include <algorithm>

#include "fixtures.hpp"
#include "topicllm/metrics.hpp"

using namespace topicllm;

namespace {

const Corpus& toy() {
  static const Corpus c = fixture::toy_corpus();
  return c;
}

TopicSet toy_topics(std::size_t k, std::size_t t) {
  t = std::min(t, toy().vocabulary().size() / k);
  std::vector<Topic> topics(k);
  std::size_t i = 0;
  for (const auto& [word, df] : toy().vocabulary()) {
    topics[i % k].push_back(word);
    if (++i == k * t) break;
  }
  return TopicSet(topics, TopicSource::manual);
}

void BM_IndexBuild(benchmark::State& state) {
  const auto window = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(CooccurrenceIndex::build(toy(), window));
}
BENCHMARK(BM_IndexBuild)->Arg(10)->Arg(110)->Unit(benchmark::kMillisecond);

void BM_IndexBuildRestricted(benchmark::State& state) {
  const auto topics = toy_topics(20, 10);
  const auto words = topics.unique_words();
  const std::unordered_set<std::string> keep(words.begin(), words.end());
  for (auto _ : state) benchmark::DoNotOptimize(CooccurrenceIndex::build(toy(), 110, 1e-12, &keep));
}
BENCHMARK(BM_IndexBuildRestricted)->Unit(benchmark::kMillisecond);

void BM_CoherenceCv(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto index = CooccurrenceIndex::build(toy(), 110);
  const auto topics = toy_topics(k, 10);
  for (auto _ : state) benchmark::DoNotOptimize(coherence_cv(topics, index));
}
BENCHMARK(BM_CoherenceCv)->Arg(5)->Arg(20);

void BM_CoverageDc(benchmark::State& state) {
  const auto topics = toy_topics(20, 10);
  for (auto _ : state) benchmark::DoNotOptimize(coverage_dc(topics, toy()));
}
BENCHMARK(BM_CoverageDc);

}  // namespace
