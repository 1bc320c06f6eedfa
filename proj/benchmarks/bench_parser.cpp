#include <benchmark/benchmark.h>

#include <string>

#include "topicllm/topic_parser.hpp"

using namespace topicllm;

namespace {

std::string reply(std::size_t k, std::size_t t) {
  std::string s = "Here are the topics:\n";
  for (std::size_t i = 1; i <= k; ++i) {
    s += "Topic " + std::to_string(i) + ":";
    for (std::size_t j = 0; j < t; ++j) s += " word" + std::to_string(i * 100 + j);
    s += "\n";
  }
  return s;
}

void BM_ParseTopics(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto text = reply(k, 10);
  for (auto _ : state) benchmark::DoNotOptimize(parse_topics(text, k, 10));
  state.SetBytesProcessed(static_cast<std::int64_t>(text.size() * state.iterations()));
}
BENCHMARK(BM_ParseTopics)->Arg(5)->Arg(50);

}  // namespace
