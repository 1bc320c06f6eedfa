#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topicllm/metrics.hpp"

namespace topicllm {

enum class RowKind { run, before_merge };
std::string_view to_string(RowKind kind) noexcept;

/// One pipeline run (or the averaged pre-merge subsets of one run).
struct ReportRow {
  std::string dataset;
  std::string model;
  std::string mode;  // parallel | sequential | lda | Base | Orcl | Ctrl
  std::string category;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  RowKind kind = RowKind::run;
  bool completed = true;
  std::string error;  // "<ErrorClass>: message" for failed runs
  MetricValues values;
};

struct MetricSummary {
  MetricValues mean;
  MetricValues stddev;  // sample standard deviation; 0 for a single run
};

struct AggregateRow {
  std::string dataset;
  std::string model;
  std::string mode;
  std::string category;
  std::size_t k = 0;
  RowKind kind = RowKind::run;
  std::size_t completed = 0;
  std::size_t failed = 0;
  // Absent when runs failed and partial aggregation was not requested.
  std::optional<MetricSummary> summary;
};

struct Provenance {
  std::string tool_version;
  std::string template_version;
  std::string backend_kind;
  std::vector<std::string> model_ids;
  double temperature = 0.0;
  std::uint32_t max_output_tokens = 0;
  std::size_t max_attempts = 0;
  std::size_t window_size = 0;
  double epsilon = 0.0;
  std::string cv_reference;
  std::string fa_mode;
  std::string timestamp;
};

struct EvalReport {
  Provenance provenance;
  std::vector<ReportRow> rows;
  bool allow_partial = false;

  /// Groups rows by (dataset, model, mode, category, k, kind) in first-seen
  /// order and averages the completed runs.
  std::vector<AggregateRow> aggregates() const;

  bool has_failures() const;
  void append(const EvalReport& other);
};

enum class TableFormat { csv, markdown };

/// Writes report.csv and/or report.md into `out_dir` and returns the paths.
/// Throws PreconditionViolation for an empty report and ReportInvalid when
/// provenance lacks a model id.
std::vector<std::filesystem::path> emit_tables(const EvalReport& report, const std::set<TableFormat>& formats,
                                               const std::filesystem::path& out_dir);

std::string render_csv(const EvalReport& report);
std::string render_markdown(const EvalReport& report);

/// Current UTC time, or SOURCE_DATE_EPOCH when that variable is set.
std::string report_timestamp();

}  // namespace topicllm
