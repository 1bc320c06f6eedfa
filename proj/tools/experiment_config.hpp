#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topicllm/corpus.hpp"
#include "topicllm/llm_gateway.hpp"
#include "topicllm/metrics.hpp"
#include "topicllm/orchestrator.hpp"

namespace topicllm::cli {

struct DatasetSpec {
  std::string name;
  std::filesystem::path path;
  LoadOptions load;
  bool preprocess = true;
  PreprocessOptions preprocess_options;
  std::optional<std::filesystem::path> cv_reference;  // defaults to the dataset itself
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  BackendConfig backend;
  std::optional<std::filesystem::path> mock_script;
  std::optional<std::filesystem::path> templates_dir;
  std::vector<PipelineConfig> pipelines;  // one per (model, mode, k) cell
  MetricConfig metrics;
  std::filesystem::path output_dir = "out";
  bool allow_partial = false;
};

/// Parses the JSON experiment format. Relative paths resolve against
/// `base_dir`. A pipeline whose "k" is a list expands into one cell per k.
/// Throws ConfigError.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Reads and parses `path`, then checks that every referenced input exists.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first missing input file.
void check_paths(const ExperimentConfig& config);

/// Loads and (unless disabled) preprocesses one dataset.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& load, bool preprocess_enabled,
                   const PreprocessOptions& options);
Corpus load_corpus(const DatasetSpec& spec);

}  // namespace topicllm::cli
