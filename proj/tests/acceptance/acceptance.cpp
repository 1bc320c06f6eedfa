// Acceptance checks: one PASS / FAIL / SKIP line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "topicllm/error.hpp"
#include "topicllm/lda.hpp"
#include "topicllm/metrics.hpp"
#include "topicllm/orchestrator.hpp"
#include "topicllm/topic_parser.hpp"
#include "transcripts.hpp"

#ifdef TOPICLLM_HAVE_CLI
#include "cli.hpp"
#endif

using namespace topicllm;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }
Outcome pass(std::string detail) { return {Status::pass, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Every metric agrees with the brute-force oracle.
Outcome metric_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  const int instances = 600;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const std::size_t vocab = 10 + rng() % 60;
    const auto docs = oracle::random_docs(rng, 200, 12, vocab);
    const auto topics = oracle::random_topics(rng, 15, 10, vocab);
    const std::size_t window = 1 + rng() % 20;
    const auto corpus = oracle::to_corpus(docs);
    const auto set = oracle::to_set(topics);
    const auto index = CooccurrenceIndex::build(corpus, window);
    const double diffs[] = {
        std::abs(coverage_dc(set, corpus) - oracle::dc(topics, docs)),
        std::abs(factuality_fa(set, corpus) - oracle::fa(topics, docs)),
        std::abs(diversity_tu(set) - oracle::tu(topics)),
        std::abs(coherence_cv(set, index) - oracle::cv(topics, docs, window, 1e-12)),
    };
    for (double d : diffs) worst = std::max(worst, d);
    if (worst > 1e-9) return fail("instance " + std::to_string(i) + " differs by " + sci(worst));
  }
  const double secs = seconds_since(start);
  const std::string detail = std::to_string(instances) + " instances, max diff " + sci(worst) + ", " + fmt(secs) + " s";
  return secs < 60.0 ? pass(detail) : fail(detail + " (over 60 s)");
}

// 2. LDA topic words always come from the corpus.
Outcome lda_factuality() {
  std::mt19937_64 rng(7);
  const int corpora = 120;
  for (int i = 0; i < corpora; ++i) {
    const auto corpus = oracle::to_corpus(oracle::random_docs(rng, 60, 25, 20 + rng() % 80));
    LdaParams p;
    p.k = 1 + rng() % 10;
    p.iterations = 20;
    p.seed = rng();
    const auto model = train_lda(corpus, p);
    const std::size_t t = 1 + rng() % std::min<std::size_t>(10, model.vocabulary_size());
    const double fa = factuality_fa(top_words(model, t), corpus);
    if (fa != 1.0) return fail("corpus " + std::to_string(i) + " Fa=" + fmt(fa));
  }
  return pass(std::to_string(corpora) + " corpora, Fa=1.000 exactly");
}

// 3. TU at its boundaries.
Outcome tu_boundaries() {
  for (std::size_t k = 1; k <= 15; ++k) {
    oracle::Topics distinct, same;
    for (std::size_t i = 0; i < k; ++i) {
      distinct.push_back({oracle::word(3 * i), oracle::word(3 * i + 1), oracle::word(3 * i + 2)});
      same.push_back({"alpha", "beta", "gamma"});
    }
    if (diversity_tu(oracle::to_set(distinct)) != 1.0) return fail("distinct topics, K=" + std::to_string(k));
    if (diversity_tu(oracle::to_set(same)) != 1.0 / static_cast<double>(k)) {
      return fail("identical topics, K=" + std::to_string(k));
    }
  }
  return pass("K=1..15: distinct -> 1, identical -> 1/K");
}

// 4. Mock-backed runs are bit-identical across repetitions.
Outcome determinism() {
  const auto corpus = fixture::toy_corpus();
  for (const auto mode : {PipelineMode::parallel, PipelineMode::sequential}) {
    std::vector<std::vector<RunRecord>> records(3);
    std::vector<std::string> tables(3);
    for (int rep = 0; rep < 3; ++rep) {
      LlmGateway gw(fixture::fast_config(), fixture::mock());
      Orchestrator orch(gw);
      PipelineConfig cfg;
      cfg.mode = mode;
      cfg.subset_size = 250;
      cfg.runs = 3;
      cfg.seeds = {1, 2, 3};
      cfg.keep_before_merge = true;
      const auto report = orch.run_experiment(corpus, cfg, MetricConfig{}, "toy", nullptr, &records[rep]);
      tables[rep] = render_csv(report) + render_markdown(report);
    }
    if (!(records[0] == records[1] && records[1] == records[2])) {
      return fail(std::string(to_string(mode)) + " RunRecords differ");
    }
    if (tables[0] != tables[1] || tables[1] != tables[2]) {
      return fail(std::string(to_string(mode)) + " EvalReports differ");
    }
  }
  return pass("parallel and sequential, 3 seeds x 3 repetitions identical");
}

// 5. Parser fuzzing, round trips, and the two Llama-2 transcripts.
Outcome parser_robustness() {
  std::mt19937_64 rng(99);
  std::string alphabet = "Topic 0123456789:,.;-*\n\t\r #abcdefXYZ\"'\xc3\xa9\xe2\x80\x94\xff";
  alphabet += '\0';
  for (int i = 0; i < 10000; ++i) {
    std::string s(rng() % 300, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    if (i % 3 == 0) s = "Topic " + std::to_string(1 + rng() % 3) + ": " + s;
    const std::size_t k = 1 + rng() % 6, t = 1 + rng() % 6;
    try {
      const auto r = parse_topics(s, k, t);
      if (r.report.ok() != static_cast<bool>(r.topics)) return fail("inconsistent result for fuzz input " + std::to_string(i));
      if (r.topics && (r.topics->k() != k || r.topics->t() != t)) return fail("wrong shape accepted");
    } catch (const std::exception& e) {
      return fail(std::string("fuzz input threw: ") + e.what());
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const TopicSet set(oracle::random_topics(rng, 15, 10, 300), TopicSource::manual);
    const auto r = parse_topics(set.to_reply_text(), set.k(), set.t());
    if (!r.topics || !(*r.topics == set)) return fail("round trip " + std::to_string(i) + " changed the topics");
  }
  const auto l7 = parse_topics(transcripts::kLlama7b, 5, 5);
  const auto l13 = parse_topics(transcripts::kLlama13b, 5, 5);
  if (l7.report.status != ParseStatus::format_violation) {
    return fail("Llama-2 7B classified as " + std::string(to_string(l7.report.status)));
  }
  if (l13.report.status != ParseStatus::wrong_word_count) {
    return fail("Llama-2 13B classified as " + std::string(to_string(l13.report.status)));
  }
  return pass("10000 fuzz inputs, 1000 round trips, 7B=format_violation, 13B=wrong_word_count");
}

// 6. LDA recovers two planted topics.
Outcome lda_recovery() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 19);
  std::vector<oracle::Doc> docs;
  for (int d = 0; d < 500; ++d) {
    const char theme = d % 2 ? 'b' : 'a';
    oracle::Doc doc;
    for (int i = 0; i < 30; ++i) doc.push_back(std::string(1, theme) + "word" + std::to_string(pick(rng)));
    docs.push_back(doc);
  }
  const auto corpus = oracle::to_corpus(docs);
  int good = 0;
  std::string purities;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LdaParams p;
    p.k = 2;
    p.iterations = 200;
    p.seed = seed;
    const auto topics = top_words(train_lda(corpus, p), 5);
    std::size_t majority = 0;
    for (const auto& topic : topics.topics()) {
      std::map<char, std::size_t> counts;
      for (const auto& w : topic) ++counts[w[0]];
      std::size_t best = 0;
      for (const auto& [theme, n] : counts) best = std::max(best, n);
      majority += best;
    }
    const double purity = static_cast<double>(majority) / static_cast<double>(topics.slot_count());
    purities += (purities.empty() ? "" : " ") + fmt(purity);
    good += purity >= 0.9 ? 1 : 0;
  }
  const double secs = seconds_since(start);
  const std::string detail = "purity " + purities + ", " + std::to_string(good) + "/5 seeds, " + fmt(secs) + " s";
  return good >= 4 && secs < 30.0 ? pass(detail) : fail(detail);
}

// 7. Clique-aligned topics are more coherent than mixed ones.
Outcome coherence_ordering() {
  std::mt19937_64 rng(17);
  const oracle::Doc a{"apple", "banana", "cherry", "grape", "melon", "peach"};
  const oracle::Doc b{"engine", "wheel", "brake", "piston", "clutch", "gear"};
  std::vector<oracle::Doc> docs;
  for (int i = 0; i < 200; ++i) {
    auto d = i % 2 ? a : b;
    std::shuffle(d.begin(), d.end(), rng);
    d.resize(3 + rng() % 3);
    d.push_back("the");
    docs.push_back(d);
  }
  const auto index = CooccurrenceIndex::build(oracle::to_corpus(docs), 110);
  const double aligned = coherence_cv(oracle::to_set({a, b}), index);
  oracle::Doc pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  int wins = 0, mixes = 0;
  while (mixes < 100) {
    std::shuffle(pool.begin(), pool.end(), rng);
    oracle::Doc x(pool.begin(), pool.begin() + 6), y(pool.begin() + 6, pool.end());
    if (std::is_permutation(x.begin(), x.end(), a.begin()) || std::is_permutation(x.begin(), x.end(), b.begin())) {
      continue;
    }
    ++mixes;
    wins += aligned > coherence_cv(oracle::to_set({x, y}), index) ? 1 : 0;
  }
  const std::string detail = "aligned Cv " + fmt(aligned) + " beats " + std::to_string(wins) + "/100 mixes";
  return wins == 100 ? pass(detail) : fail(detail);
}

// 8. Scripted controlled scenario: DC_cat(Orcl) >= DC_cat(Ctrl) >= DC_cat(Base).
Outcome controlled_ordering() {
  const auto corpus = fixture::labeled_synthetic(
      {{"health", {"doctor", "patient", "hospital", "nurse", "vaccine", "clinic"}},
       {"sports", {"game", "team", "coach", "touchdown", "league", "stadium"}},
       {"business", {"market", "stock", "profit", "bank", "merger", "trade"}}},
      {60, 60, 60});
  MockScript script;
  // Ctrl: asked for health topics, the reply mentions health only once.
  script.rules.push_back(fixture::rule("specifically related to health",
                                       "Topic 1: doctor game team coach league\n"
                                       "Topic 2: market stock profit bank trade\n"));
  // Base sees the full sample (sports docs present) and picks up the dominant generic themes.
  script.rules.push_back(fixture::rule("touchdown", "Topic 1: game team coach touchdown league\n"
                                                    "Topic 2: market stock profit bank merger\n"));
  // Orcl sees only health documents.
  script.rules.push_back(fixture::rule("", "Topic 1: doctor patient hospital nurse vaccine\n"
                                           "Topic 2: clinic doctor nurse patient hospital\n"));
  script.fallback = MockFallback::fail;
  LlmGateway gw(fixture::fast_config(), fixture::mock(script));
  Orchestrator orch(gw);
  MetricConfig metrics;
  metrics.dc_categories = {"health"};
  std::map<ControlMode, double> dc;
  for (const auto mode : {ControlMode::Base, ControlMode::Orcl, ControlMode::Ctrl}) {
    PipelineConfig cfg;
    cfg.mode = PipelineMode::controlled;
    cfg.control_mode = mode;
    if (mode != ControlMode::Base) cfg.category = "health";
    cfg.k = 2;
    cfg.runs = 3;
    cfg.seeds = {1, 2, 3};
    const auto report = orch.run_experiment(corpus, cfg, metrics, "fixture");
    const auto agg = report.aggregates();
    if (agg.size() != 1 || !agg[0].summary) return fail(std::string(to_string(mode)) + " runs failed");
    dc[mode] = agg[0].summary->mean.dc_by_category.at("health");
  }
  std::string detail = "DC_health Orcl=" + fmt(dc[ControlMode::Orcl]) + " Ctrl=" + fmt(dc[ControlMode::Ctrl]) +
                       " Base=" + fmt(dc[ControlMode::Base]);

  // The same protocol with the heuristic mock on the bundled labeled corpus.
  const auto news = fixture::labeled_corpus();
  LlmGateway heuristic(fixture::fast_config(), fixture::mock());
  Orchestrator horch(heuristic);
  std::map<ControlMode, double> hdc;
  for (const auto mode : {ControlMode::Base, ControlMode::Orcl, ControlMode::Ctrl}) {
    PipelineConfig cfg;
    cfg.mode = PipelineMode::controlled;
    cfg.control_mode = mode;
    if (mode != ControlMode::Base) cfg.category = "health";
    cfg.runs = 3;
    cfg.seeds = {1, 2, 3};
    const auto agg = horch.run_experiment(news, cfg, metrics, "labeled_news").aggregates();
    if (!agg[0].summary) return fail(std::string(to_string(mode)) + " heuristic runs failed");
    hdc[mode] = agg[0].summary->mean.dc_by_category.at("health");
  }
  detail += "; heuristic mock Orcl=" + fmt(hdc[ControlMode::Orcl]) + " Ctrl=" + fmt(hdc[ControlMode::Ctrl]) +
            " Base=" + fmt(hdc[ControlMode::Base]);
  const bool ordered = dc[ControlMode::Orcl] >= dc[ControlMode::Ctrl] && dc[ControlMode::Ctrl] >= dc[ControlMode::Base] &&
                       hdc[ControlMode::Orcl] >= hdc[ControlMode::Ctrl] && hdc[ControlMode::Ctrl] >= hdc[ControlMode::Base];
  return ordered ? pass(detail) : fail(detail);
}

// 9. Live backend smoke test; needs a credential.
Outcome live_smoke() {
  const char* key_env = std::getenv("TOPICLLM_LIVE_KEY_ENV");
  const std::string key_var = key_env && *key_env ? key_env : "OPENAI_API_KEY";
  const char* key = std::getenv(key_var.c_str());
  if (key == nullptr || *key == '\0') return {Status::skip, key_var + " is not set"};
  const char* endpoint = std::getenv("TOPICLLM_LIVE_ENDPOINT");
  const char* model = std::getenv("TOPICLLM_LIVE_MODEL");

  BackendConfig backend;
  backend.kind = BackendKind::http;
  backend.endpoint_url = endpoint && *endpoint ? endpoint : "https://api.openai.com/v1/chat/completions";
  backend.api_key_env_var = key_var;
  auto gw = LlmGateway::create(backend);
  Orchestrator orch(*gw);
  const auto corpus = fixture::toy_corpus();
  std::string detail;
  for (const auto mode : {PipelineMode::parallel, PipelineMode::sequential}) {
    PipelineConfig cfg;
    if (model && *model) cfg.model_id = model;
    cfg.mode = mode;
    cfg.subset_size = 500;
    cfg.runs = 1;
    cfg.seeds = {1};
    cfg.max_attempts = 3;
    const auto record = orch.run_once(corpus, cfg, 1);
    const double fa = factuality_fa(record.final_topics, corpus);
    detail += std::string(to_string(mode)) + " Fa=" + fmt(fa) + " ";
    if (fa < 0.9) return fail(detail);
  }
  return pass(detail);
}

// 10. sweep-k reports exact topic counts for a format-compliant backend.
Outcome sweep_compliance() {
#ifdef TOPICLLM_HAVE_CLI
  std::ostringstream out, err;
  const int code = cli::run_cli({"sweep-k", "--corpus", std::string(TOPICLLM_DATA_DIR) + "/toy_1000.txt", "--ks",
                                 "5,10,15,20", "--trials", "10"},
                                out, err);
  if (code != 0) return fail("sweep-k exited " + std::to_string(code) + ": " + err.str());
  const auto text = out.str();
  for (const char* k : {"5", "10", "15", "20"}) {
    if (text.find(std::string("\n") + k + ",10,10,1.000,") == std::string::npos) return fail("k=" + std::string(k) + "\n" + text);
  }
  if (text.find("# exact topic count in all trials: yes") == std::string::npos) return fail(text);
  return pass("sweep-k k=5,10,15,20: 10/10 exact each");
#else
  LlmGateway gw(fixture::fast_config(), fixture::mock());
  Orchestrator orch(gw);
  const std::vector<std::size_t> ks{5, 10, 15, 20};
  for (const auto& row : orch.sweep_topic_count(fixture::toy_corpus(), PipelineConfig{}, ks, 10)) {
    if (row.exact != row.trials) return fail("k=" + std::to_string(row.requested_k));
  }
  return pass("k=5,10,15,20: 10/10 exact each");
#endif
}

}  // namespace

int main() {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracles},
      {"LDA factuality is exact", lda_factuality},
      {"TU boundary cases", tu_boundaries},
      {"pipeline determinism", determinism},
      {"parser robustness", parser_robustness},
      {"LDA planted-topic recovery", lda_recovery},
      {"Cv clique ordering", coherence_ordering},
      {"controlled-protocol DC ordering", controlled_ordering},
      {"live smoke test", live_smoke},
      {"sweep-k compliance", sweep_compliance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* label = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail ? 1 : 0;
    std::cout << label << ' ' << (i + 1) << ' ' << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
