#include "topicllm/orchestrator.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "topicllm/version.hpp"

namespace topicllm {

std::string_view to_string(PipelineMode mode) noexcept {
  switch (mode) {
    case PipelineMode::parallel: return "parallel";
    case PipelineMode::sequential: return "sequential";
    case PipelineMode::controlled: return "controlled";
    case PipelineMode::lda: return "lda";
  }
  return "parallel";
}

PipelineMode pipeline_mode_from_string(std::string_view name) {
  for (auto m : {PipelineMode::parallel, PipelineMode::sequential, PipelineMode::controlled, PipelineMode::lda}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::ConfigError, "unknown pipeline mode '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (k < 1 || t < 1) fail("k and t must be positive");
  if (subset_size < 1) fail("subset_size must be positive");
  if (runs < 1) fail("runs must be positive");
  if (seeds.size() != runs) fail("runs (" + std::to_string(runs) + ") must equal the number of seeds (" +
                                 std::to_string(seeds.size()) + ")");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds must be distinct");
  if (max_attempts < 1) fail("max_attempts must be positive");
  if (mode == PipelineMode::controlled) {
    if (!control_mode) fail("controlled mode requires control_mode");
    if (*control_mode != ControlMode::Base && (!category || category->empty())) {
      throw Error(ErrorKind::MissingCategory, std::string(to_string(*control_mode)) + " requires a category");
    }
  }
}

std::string PipelineConfig::mode_label() const {
  if (mode == PipelineMode::controlled && control_mode) return std::string(to_string(*control_mode));
  return std::string(to_string(mode));
}

std::string RunRecord::mode_label() const {
  if (mode == PipelineMode::controlled && control_mode) return std::string(to_string(*control_mode));
  return std::string(to_string(mode));
}

Orchestrator::Orchestrator(LlmGateway& gateway, const TemplateCatalog& catalog)
    : gateway_(gateway), catalog_(catalog) {}

ChatRequest Orchestrator::make_request(const PipelineConfig& cfg, const PromptSpec& prompt) const {
  ChatRequest request;
  request.model_id = cfg.model_id;
  request.system_message = cfg.system_message;
  request.user_message = prompt.rendered_text;
  request.temperature = cfg.temperature;
  request.max_output_tokens = cfg.max_output_tokens;
  return request;
}

void Orchestrator::check_budget(const PipelineConfig& cfg, const PromptSpec& prompt) const {
  if (prompt.estimated_tokens > cfg.context_budget_tokens) {
    throw Error(ErrorKind::ContextBudgetExceeded,
                std::string(to_string(prompt.template_id)) + " prompt needs ~" +
                    std::to_string(prompt.estimated_tokens) + " tokens, budget is " +
                    std::to_string(cfg.context_budget_tokens));
  }
}

namespace {

std::string abort_message(std::optional<std::size_t> subset, const ParseReport& report, std::size_t attempts) {
  std::string where = subset ? "subset " + std::to_string(*subset) : std::string("final prompt");
  return where + " failed to parse after " + std::to_string(attempts) + " attempts (" +
         std::string(to_string(report.status)) + ", expected " + std::to_string(report.expected_k) +
         " topics, found " + std::to_string(report.found_k) + ")";
}

void throw_slot_error(const ChatResponse& response) {
  throw Error(response.error_kind.value_or(ErrorKind::TransportError), response.error_message);
}

}  // namespace

TopicSet Orchestrator::model_one(const PipelineConfig& cfg, const PromptSpec& prompt, TopicSource source,
                                 std::optional<std::size_t> subset_index, RunRecord& record) {
  check_budget(cfg, prompt);
  record.prompts.push_back(prompt);
  const auto request = make_request(cfg, prompt);
  for (std::size_t attempt = 1;; ++attempt) {
    const auto response = gateway_.complete(request);
    ++record.llm_calls;
    auto parsed = parse_topics(response.text, cfg.k, cfg.t, source);
    record.parse_reports.push_back(parsed.report);
    if (parsed.topics) return std::move(*parsed.topics);
    if (retry_policy(parsed.report, attempt, cfg.max_attempts) == RetryDecision::abort) {
      throw PipelineAborted(subset_index, parsed.report, abort_message(subset_index, parsed.report, attempt));
    }
  }
}

RunRecord Orchestrator::run_parallel(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed) {
  require(cfg.mode == PipelineMode::parallel, "run_parallel: config mode is not parallel");
  cfg.validate();
  RunRecord record;
  record.model_id = cfg.model_id;
  record.mode = cfg.mode;
  record.k = cfg.k;
  record.t = cfg.t;
  record.seed = seed;

  const auto plan = split_subsets(corpus, cfg.subset_size, seed);
  const std::size_t n = plan.subsets.size();
  std::vector<PromptSpec> prompts;
  std::vector<ChatRequest> requests;
  for (std::size_t i = 0; i < n; ++i) {
    const auto docs = subset_documents(corpus, plan, i);
    prompts.push_back(catalog_.render_par_tm(docs, cfg.k, cfg.t, cfg.par_tm_phrases));
    check_budget(cfg, prompts.back());
    requests.push_back(make_request(cfg, prompts.back()));
  }
  record.prompts = prompts;

  std::vector<std::optional<TopicSet>> results(n);
  std::vector<std::size_t> pending(n);
  std::iota(pending.begin(), pending.end(), std::size_t{0});
  for (std::size_t attempt = 1; !pending.empty(); ++attempt) {
    std::vector<ChatRequest> batch;
    for (auto i : pending) batch.push_back(requests[i]);
    const auto responses = gateway_.complete_many(batch);
    record.llm_calls += responses.size();
    std::vector<std::size_t> still_pending;
    for (std::size_t j = 0; j < pending.size(); ++j) {
      const std::size_t i = pending[j];
      if (!responses[j].ok()) throw_slot_error(responses[j]);
      auto parsed = parse_topics(responses[j].text, cfg.k, cfg.t, TopicSource::llm_parallel);
      record.parse_reports.push_back(parsed.report);
      if (parsed.topics) {
        results[i] = std::move(parsed.topics);
      } else if (retry_policy(parsed.report, attempt, cfg.max_attempts) == RetryDecision::abort) {
        throw PipelineAborted(i, parsed.report, abort_message(i, parsed.report, attempt));
      } else {
        still_pending.push_back(i);
      }
    }
    pending = std::move(still_pending);
  }

  std::vector<TopicSet> subset_sets;
  for (auto& r : results) subset_sets.push_back(std::move(*r));

  if (n == 1) {
    record.final_topics = subset_sets.front();
  } else {
    const auto merge = catalog_.render_par_mrg(subset_sets, cfg.k, cfg.t, cfg.par_mrg_phrases);
    record.final_topics = model_one(cfg, merge, TopicSource::llm_parallel, std::nullopt, record);
  }
  if (cfg.keep_before_merge) record.subset_topic_sets = std::move(subset_sets);
  return record;
}

RunRecord Orchestrator::run_sequential(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed) {
  require(cfg.mode == PipelineMode::sequential, "run_sequential: config mode is not sequential");
  cfg.validate();
  RunRecord record;
  record.model_id = cfg.model_id;
  record.mode = cfg.mode;
  record.k = cfg.k;
  record.t = cfg.t;
  record.seed = seed;

  const auto plan = split_subsets(corpus, cfg.subset_size, seed);
  for (std::size_t i = 0; i < plan.subsets.size(); ++i) {
    const auto docs = subset_documents(corpus, plan, i);
    const auto prompt = record.subset_topic_sets.empty()
                            ? catalog_.render_par_tm(docs, cfg.k, cfg.t, cfg.par_tm_phrases)
                            : catalog_.render_seq_tm(docs, record.subset_topic_sets.back(), cfg.k, cfg.t,
                                                     cfg.seq_tm_phrases);
    record.subset_topic_sets.push_back(model_one(cfg, prompt, TopicSource::llm_sequential, i, record));
  }
  record.final_topics = record.subset_topic_sets.back();
  return record;
}

RunRecord Orchestrator::run_controlled(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed) {
  require(cfg.mode == PipelineMode::controlled, "run_controlled: config mode is not controlled");
  cfg.validate();
  RunRecord record;
  record.model_id = cfg.model_id;
  record.mode = cfg.mode;
  record.control_mode = cfg.control_mode;
  record.category = cfg.category;
  record.k = cfg.k;
  record.t = cfg.t;
  record.seed = seed;

  const ControlMode mode = *cfg.control_mode;
  const Corpus docs = mode == ControlMode::Orcl ? shuffled(filter_by_category(corpus, *cfg.category), seed)
                                                : shuffled(corpus, seed);
  const auto prompt =
      catalog_.render_controlled(docs.documents(), cfg.k, cfg.t, mode, cfg.category, cfg.controlled_phrases);
  record.final_topics = model_one(cfg, prompt, TopicSource::llm_controlled, std::nullopt, record);
  return record;
}

RunRecord Orchestrator::run_lda(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed) {
  require(cfg.mode == PipelineMode::lda, "run_lda: config mode is not lda");
  cfg.validate();
  RunRecord record;
  record.model_id = cfg.model_id;
  record.mode = cfg.mode;
  record.k = cfg.k;
  record.t = cfg.t;
  record.seed = seed;

  std::vector<Document> docs;
  if (corpus.size() >= cfg.subset_size) {
    const auto plan = split_subsets(corpus, cfg.subset_size, seed);
    for (std::size_t i = 0; i < plan.subsets.size(); ++i) {
      auto part = subset_documents(corpus, plan, i);
      docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  } else {
    docs = shuffled(corpus, seed).documents();
  }
  LdaParams params = cfg.lda;
  params.k = cfg.k;
  params.seed = seed;
  const auto model = train_lda(Corpus(std::move(docs)), params);
  record.final_topics = top_words(model, cfg.t);
  return record;
}

RunRecord Orchestrator::run_once(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed) {
  switch (cfg.mode) {
    case PipelineMode::parallel: return run_parallel(corpus, cfg, seed);
    case PipelineMode::sequential: return run_sequential(corpus, cfg, seed);
    case PipelineMode::controlled: return run_controlled(corpus, cfg, seed);
    case PipelineMode::lda: return run_lda(corpus, cfg, seed);
  }
  throw Error(ErrorKind::ConfigError, "unknown pipeline mode");
}

namespace {

MetricConfig metrics_for(const RunRecord& record, const MetricConfig& metrics) {
  MetricConfig effective = metrics;
  if (effective.dc_categories.empty() && record.category) effective.dc_categories = {*record.category};
  return effective;
}

ReportRow row_skeleton(const RunRecord& record, RowKind kind) {
  ReportRow row;
  row.dataset = record.dataset;
  row.model = record.model_id;
  row.mode = record.mode_label();
  row.category = record.category.value_or("");
  row.k = record.k;
  row.seed = record.seed;
  row.kind = kind;
  return row;
}

// Evaluation rows for one record: the final topics, then (optionally) the
// mean over the pre-merge subset topic sets of a parallel run.
std::vector<ReportRow> rows_for_record(const RunRecord& record, const Corpus& evaluation, const Corpus& cv_reference,
                                       const MetricConfig& metrics, bool include_before_merge) {
  const auto effective = metrics_for(record, metrics);
  std::vector<ReportRow> rows;
  auto row = row_skeleton(record, RowKind::run);
  row.values = evaluate_topics(record.final_topics, evaluation, cv_reference, effective);
  rows.push_back(std::move(row));

  if (include_before_merge && record.mode == PipelineMode::parallel && !record.subset_topic_sets.empty()) {
    auto before = row_skeleton(record, RowKind::before_merge);
    const double n = static_cast<double>(record.subset_topic_sets.size());
    for (const auto& set : record.subset_topic_sets) {
      const auto v = evaluate_topics(set, evaluation, cv_reference, effective);
      before.values.cv += v.cv / n;
      before.values.tu += v.tu / n;
      before.values.dc += v.dc / n;
      before.values.fa += v.fa / n;
      for (const auto& [cat, dc] : v.dc_by_category) before.values.dc_by_category[cat] += dc / n;
    }
    rows.push_back(std::move(before));
  }
  return rows;
}

}  // namespace

EvalReport Orchestrator::run_experiment(const Corpus& corpus, const PipelineConfig& cfg, const MetricConfig& metrics,
                                        const std::string& dataset, const Corpus* cv_reference,
                                        std::vector<RunRecord>* records) {
  cfg.validate();
  EvalReport report;
  report.provenance = make_provenance(gateway_.config(), cfg, metrics, catalog_);
  const Corpus& reference = cv_reference ? *cv_reference : corpus;

  for (const auto seed : cfg.seeds) {
    try {
      auto record = run_once(corpus, cfg, seed);
      record.dataset = dataset;
      auto rows = rows_for_record(record, corpus, reference, metrics, cfg.keep_before_merge);
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      if (records) records->push_back(std::move(record));
    } catch (const Error& e) {
      ReportRow row;
      row.dataset = dataset;
      row.model = cfg.model_id;
      row.mode = cfg.mode_label();
      row.category = cfg.category.value_or("");
      row.k = cfg.k;
      row.seed = seed;
      row.completed = false;
      row.error = std::string(to_string(e.kind())) + ": " + e.what();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<SweepRow> Orchestrator::sweep_topic_count(const Corpus& corpus, const PipelineConfig& cfg,
                                                      std::span<const std::size_t> ks, std::size_t trials) {
  require(!ks.empty() && trials >= 1, "sweep_topic_count: need at least one k and one trial");
  std::vector<SweepRow> rows;
  for (const auto k : ks) {
    require(k >= 1, "sweep_topic_count: k must be positive");
    SweepRow row;
    row.requested_k = k;
    row.trials = trials;
    std::vector<ChatRequest> requests;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const auto docs = shuffled(corpus, cfg.seeds.empty() ? trial : cfg.seeds.front() + trial);
      auto prompt = catalog_.render_controlled(docs.documents(), k, cfg.t, ControlMode::Base, std::nullopt,
                                               cfg.controlled_phrases);
      check_budget(cfg, prompt);
      requests.push_back(make_request(cfg, prompt));
    }
    const auto responses = gateway_.complete_many(requests);
    for (const auto& response : responses) {
      if (!response.ok()) throw_slot_error(response);
      const auto parsed = parse_topics(response.text, k, cfg.t);
      row.produced_counts.push_back(parsed.report.found_k);
      if (parsed.report.found_k == k) ++row.exact;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Provenance make_provenance(const BackendConfig& backend, const PipelineConfig& cfg, const MetricConfig& metrics,
                           const TemplateCatalog& catalog) {
  Provenance p;
  p.tool_version = std::string(kVersion);
  p.template_version = catalog.version();
  p.backend_kind = cfg.mode == PipelineMode::lda ? "none" : std::string(to_string(backend.kind));
  p.model_ids = {cfg.model_id};
  p.temperature = cfg.temperature;
  p.max_output_tokens = cfg.max_output_tokens;
  p.max_attempts = cfg.max_attempts;
  p.window_size = metrics.window_size;
  p.epsilon = metrics.epsilon;
  p.cv_reference = metrics.reference_name;
  p.fa_mode = std::string(to_string(metrics.fa_mode));
  p.timestamp = report_timestamp();
  return p;
}

EvalReport evaluate_records(std::span<const RunRecord> records, const Corpus& evaluation, const MetricConfig& metrics,
                            const Corpus* cv_reference, bool include_before_merge) {
  EvalReport report;
  const Corpus& reference = cv_reference ? *cv_reference : evaluation;
  std::vector<std::string> models;
  for (const auto& record : records) {
    auto rows = rows_for_record(record, evaluation, reference, metrics, include_before_merge);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    if (std::find(models.begin(), models.end(), record.model_id) == models.end()) models.push_back(record.model_id);
  }
  report.provenance.tool_version = std::string(kVersion);
  report.provenance.backend_kind = "archive";
  report.provenance.model_ids = std::move(models);
  report.provenance.window_size = metrics.window_size;
  report.provenance.epsilon = metrics.epsilon;
  report.provenance.cv_reference = metrics.reference_name;
  report.provenance.fa_mode = std::string(to_string(metrics.fa_mode));
  report.provenance.timestamp = report_timestamp();
  return report;
}

}  // namespace topicllm
