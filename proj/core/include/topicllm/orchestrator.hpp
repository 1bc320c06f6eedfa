#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/lda.hpp"
#include "topicllm/llm_gateway.hpp"
#include "topicllm/metrics.hpp"
#include "topicllm/prompting.hpp"
#include "topicllm/report.hpp"
#include "topicllm/topic_parser.hpp"

namespace topicllm {

enum class PipelineMode { parallel, sequential, controlled, lda };
std::string_view to_string(PipelineMode mode) noexcept;
PipelineMode pipeline_mode_from_string(std::string_view name);

struct PipelineConfig {
  std::string model_id = "gpt-4-0125-preview";
  PipelineMode mode = PipelineMode::parallel;
  std::size_t k = 5;
  std::size_t t = 5;
  std::size_t subset_size = 1000;
  std::size_t runs = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::optional<ControlMode> control_mode;
  std::optional<std::string> category;
  bool keep_before_merge = false;

  std::size_t max_attempts = 3;  // per prompt, identical re-prompts
  std::size_t context_budget_tokens = 128000;
  double temperature = 0.0;
  std::uint32_t max_output_tokens = 1024;
  std::optional<std::string> system_message;

  PhraseSet par_tm_phrases = PhraseSet::defaults_for(TemplateId::ParTM);
  PhraseSet par_mrg_phrases = PhraseSet::defaults_for(TemplateId::ParMrg);
  PhraseSet seq_tm_phrases = PhraseSet::defaults_for(TemplateId::SeqTM);
  PhraseSet controlled_phrases = PhraseSet::defaults_for(TemplateId::Base);

  LdaParams lda;  // lda mode only; k and seed come from this config

  /// Throws ConfigError / MissingCategory.
  void validate() const;
  /// Row label: parallel, sequential, lda, or the control mode name.
  std::string mode_label() const;
};

struct RunRecord {
  std::string dataset;
  std::string model_id;
  PipelineMode mode = PipelineMode::parallel;
  std::optional<ControlMode> control_mode;
  std::optional<std::string> category;
  std::size_t k = 0;
  std::size_t t = 0;
  std::uint64_t seed = 0;
  // parallel: one per subset; sequential: the chain of intermediate sets.
  std::vector<TopicSet> subset_topic_sets;
  TopicSet final_topics;
  std::vector<PromptSpec> prompts;
  std::vector<ParseReport> parse_reports;
  std::size_t llm_calls = 0;

  std::string mode_label() const;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// JSON-lines archive of RunRecords.
std::string to_json_line(const RunRecord& record);
RunRecord run_record_from_json(std::string_view line);
void append_run_records(const std::filesystem::path& path, std::span<const RunRecord> records);
std::vector<RunRecord> load_run_records(const std::filesystem::path& path);

/// Raised when a prompt keeps failing to parse after max_attempts.
class PipelineAborted : public Error {
 public:
  PipelineAborted(std::optional<std::size_t> subset_index, ParseReport report, const std::string& message)
      : Error(ErrorKind::PipelineAborted, message), subset_index_(subset_index), report_(std::move(report)) {}

  /// Failing subset, or nullopt for the merge / controlled prompt.
  std::optional<std::size_t> subset_index() const noexcept { return subset_index_; }
  const ParseReport& report() const noexcept { return report_; }

 private:
  std::optional<std::size_t> subset_index_;
  ParseReport report_;
};

struct SweepRow {
  std::size_t requested_k = 0;
  std::size_t trials = 0;
  std::size_t exact = 0;                     // trials with found_k == requested_k
  std::vector<std::size_t> produced_counts;  // found_k per trial
  double compliance() const { return trials == 0 ? 0.0 : static_cast<double>(exact) / static_cast<double>(trials); }
};

class Orchestrator {
 public:
  explicit Orchestrator(LlmGateway& gateway, const TemplateCatalog& catalog = TemplateCatalog::builtin());

  RunRecord run_parallel(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed);
  RunRecord run_sequential(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed);
  RunRecord run_controlled(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed);
  /// LDA over the union of the seed's subsets (the whole corpus when it is
  /// smaller than one subset).
  RunRecord run_lda(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed);

  /// Dispatches on cfg.mode.
  RunRecord run_once(const Corpus& corpus, const PipelineConfig& cfg, std::uint64_t seed);

  /// One run per seed, metrics per run, plus before-merge rows when
  /// cfg.keep_before_merge. Failed runs become rows with completed=false.
  /// `cv_reference` defaults to `corpus`. Records are appended to
  /// `records` when given.
  EvalReport run_experiment(const Corpus& corpus, const PipelineConfig& cfg, const MetricConfig& metrics,
                            const std::string& dataset, const Corpus* cv_reference = nullptr,
                            std::vector<RunRecord>* records = nullptr);

  /// Topic-count controllability: `trials` Base prompts per requested k,
  /// each over a freshly shuffled document order, no re-prompting.
  std::vector<SweepRow> sweep_topic_count(const Corpus& corpus, const PipelineConfig& cfg,
                                          std::span<const std::size_t> ks, std::size_t trials);

 private:
  ChatRequest make_request(const PipelineConfig& cfg, const PromptSpec& prompt) const;
  void check_budget(const PipelineConfig& cfg, const PromptSpec& prompt) const;
  TopicSet model_one(const PipelineConfig& cfg, const PromptSpec& prompt, TopicSource source,
                     std::optional<std::size_t> subset_index, RunRecord& record);

  LlmGateway& gateway_;
  const TemplateCatalog& catalog_;
};

/// Provenance for reports produced from `cfg` and `metrics`.
Provenance make_provenance(const BackendConfig& backend, const PipelineConfig& cfg, const MetricConfig& metrics,
                           const TemplateCatalog& catalog = TemplateCatalog::builtin());

/// Recomputes report rows from archived records (offline evaluation).
EvalReport evaluate_records(std::span<const RunRecord> records, const Corpus& evaluation, const MetricConfig& metrics,
                            const Corpus* cv_reference = nullptr, bool include_before_merge = true);

}  // namespace topicllm
