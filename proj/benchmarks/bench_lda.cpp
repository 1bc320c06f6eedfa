#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "topicllm/lda.hpp"

using namespace topicllm;

namespace {

// Cost of Gibbs sweeps over the bundled 1000-document corpus.
void BM_LdaSweeps(benchmark::State& state) {
  static const Corpus corpus = fixture::toy_corpus();
  LdaParams p;
  p.k = static_cast<std::size_t>(state.range(0));
  p.iterations = 20;
  p.likelihood_every = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_lda(corpus, p));
  state.counters["sweeps/s"] =
      benchmark::Counter(static_cast<double>(p.iterations * state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_LdaSweeps)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
