#include "experiment_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace topicllm::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

CorpusFormat format_from(const std::string& name) {
  if (name == "auto") return CorpusFormat::automatic;
  if (name == "plain") return CorpusFormat::plain;
  if (name == "tsv") return CorpusFormat::tsv;
  bad("unknown corpus format '" + name + "' (auto, plain, tsv)");
}

Phrase phrase_from(const std::string& name) {
  if (name == "goal") return Phrase::Goal;
  if (name == "detail") return Phrase::Detail;
  if (name == "cv_note") return Phrase::CvNote;
  if (name == "tu_note") return Phrase::TuNote;
  if (name == "dc_note") return Phrase::DcNote;
  bad("unknown phrase '" + name + "' (goal, detail, cv_note, tu_note, dc_note)");
}

PhraseSet phrases_from(const json& j) {
  PhraseSet set;
  for (const auto& p : j) set = set.with(phrase_from(p.get<std::string>()));
  return set;
}

DatasetSpec dataset_from(const json& j, const std::filesystem::path& base) {
  DatasetSpec d;
  d.path = resolve(base, j.at("path").get<std::string>());
  d.name = get_or<std::string>(j, "name", d.path.stem().string());
  d.load.format = format_from(get_or<std::string>(j, "format", "auto"));
  if (auto labels = get_or<std::string>(j, "labels", ""); !labels.empty()) d.load.labels_path = resolve(base, labels);
  d.preprocess = get_or<bool>(j, "preprocess", true);
  d.preprocess_options.min_freq = get_or<std::size_t>(j, "min_freq", d.preprocess_options.min_freq);
  d.preprocess_options.min_word_len = get_or<std::size_t>(j, "min_word_len", d.preprocess_options.min_word_len);
  if (auto ref = get_or<std::string>(j, "cv_reference", ""); !ref.empty()) d.cv_reference = resolve(base, ref);
  return d;
}

std::vector<PipelineConfig> pipelines_from(const json& j) {
  PipelineConfig p;
  p.model_id = get_or<std::string>(j, "model", p.model_id);
  p.mode = pipeline_mode_from_string(get_or<std::string>(j, "mode", "parallel"));
  p.t = get_or<std::size_t>(j, "t", p.t);
  p.subset_size = get_or<std::size_t>(j, "subset_size", p.subset_size);
  if (j.contains("seeds")) {
    p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    p.runs = p.seeds.size();
  } else if (j.contains("runs")) {
    p.runs = j.at("runs").get<std::size_t>();
    p.seeds.clear();
    for (std::size_t i = 1; i <= p.runs; ++i) p.seeds.push_back(i);
  }
  if (auto cm = get_or<std::string>(j, "control_mode", ""); !cm.empty()) p.control_mode = control_mode_from_string(cm);
  if (auto cat = get_or<std::string>(j, "category", ""); !cat.empty()) p.category = cat;
  p.keep_before_merge = get_or<bool>(j, "keep_before_merge", p.keep_before_merge);
  p.max_attempts = get_or<std::size_t>(j, "max_attempts", p.max_attempts);
  p.context_budget_tokens = get_or<std::size_t>(j, "context_budget_tokens", p.context_budget_tokens);
  p.temperature = get_or<double>(j, "temperature", p.temperature);
  p.max_output_tokens = get_or<std::uint32_t>(j, "max_output_tokens", p.max_output_tokens);
  if (auto sys = get_or<std::string>(j, "system_message", ""); !sys.empty()) p.system_message = sys;
  if (j.contains("phrases")) {
    const auto& ph = j.at("phrases");
    if (ph.contains("par_tm")) p.par_tm_phrases = phrases_from(ph.at("par_tm"));
    if (ph.contains("par_mrg")) p.par_mrg_phrases = phrases_from(ph.at("par_mrg"));
    if (ph.contains("seq_tm")) p.seq_tm_phrases = phrases_from(ph.at("seq_tm"));
    if (ph.contains("controlled")) p.controlled_phrases = phrases_from(ph.at("controlled"));
  }
  if (j.contains("lda")) {
    const auto& l = j.at("lda");
    if (l.contains("alpha")) p.lda.alpha = l.at("alpha").get<double>();
    p.lda.beta = get_or<double>(l, "beta", p.lda.beta);
    p.lda.iterations = get_or<std::size_t>(l, "iterations", p.lda.iterations);
  }
  if (p.mode == PipelineMode::lda && !j.contains("model")) p.model_id = "lda";

  std::vector<std::size_t> ks;
  if (!j.contains("k")) {
    ks.push_back(p.k);
  } else if (j.at("k").is_array()) {
    ks = j.at("k").get<std::vector<std::size_t>>();
  } else {
    ks.push_back(j.at("k").get<std::size_t>());
  }
  if (ks.empty()) bad("pipeline has an empty k list");
  std::vector<PipelineConfig> out;
  for (const auto k : ks) {
    if (k == 0) bad("k values must be positive");
    p.k = k;
    p.validate();
    out.push_back(p);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("experiment config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    if (!j.contains("datasets") || j.at("datasets").empty()) bad("experiment config needs at least one dataset");
    for (const auto& d : j.at("datasets")) cfg.datasets.push_back(dataset_from(d, base_dir));
    if (!j.contains("pipelines") || j.at("pipelines").empty()) bad("experiment config needs at least one pipeline");
    for (const auto& p : j.at("pipelines")) {
      auto cells = pipelines_from(p);
      cfg.pipelines.insert(cfg.pipelines.end(), cells.begin(), cells.end());
    }

    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      cfg.backend.kind = backend_kind_from_string(get_or<std::string>(b, "kind", "mock"));
      cfg.backend.endpoint_url = get_or<std::string>(b, "endpoint", cfg.backend.endpoint_url);
      cfg.backend.api_key_env_var = get_or<std::string>(b, "api_key_env", cfg.backend.api_key_env_var);
      cfg.backend.max_concurrent = get_or<std::size_t>(b, "max_concurrent", cfg.backend.max_concurrent);
      cfg.backend.max_retries = get_or<std::size_t>(b, "max_retries", cfg.backend.max_retries);
      if (b.contains("retry_backoff_ms")) {
        cfg.backend.retry_backoff.clear();
        for (const auto ms : b.at("retry_backoff_ms").get<std::vector<long>>()) {
          cfg.backend.retry_backoff.emplace_back(ms);
        }
      }
      cfg.backend.timeout = std::chrono::seconds(get_or<long>(b, "timeout_s", cfg.backend.timeout.count()));
      if (auto s = get_or<std::string>(b, "mock_script", ""); !s.empty()) cfg.mock_script = resolve(base_dir, s);
      if (auto log = get_or<std::string>(b, "run_log", ""); !log.empty()) cfg.backend.run_log = resolve(base_dir, log);
    }
    cfg.backend.validate();

    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      cfg.metrics.window_size = get_or<std::size_t>(m, "window_size", cfg.metrics.window_size);
      cfg.metrics.epsilon = get_or<double>(m, "epsilon", cfg.metrics.epsilon);
      cfg.metrics.fa_mode = fa_mode_from_string(get_or<std::string>(m, "fa_mode", "slots"));
      cfg.metrics.dc_categories = get_or<std::vector<std::string>>(m, "dc_categories", {});
      cfg.metrics.reference_name = get_or<std::string>(m, "reference_name", cfg.metrics.reference_name);
    }
    if (cfg.metrics.window_size == 0) bad("metrics.window_size must be positive");

    if (auto out = get_or<std::string>(j, "output_dir", ""); !out.empty()) cfg.output_dir = resolve(base_dir, out);
    if (auto t = get_or<std::string>(j, "templates_dir", ""); !t.empty()) cfg.templates_dir = resolve(base_dir, t);
    cfg.allow_partial = get_or<bool>(j, "allow_partial", false);
    return cfg;
  } catch (const json::exception& e) {
    bad(std::string("experiment config: ") + e.what());
  }
}

void check_paths(const ExperimentConfig& config) {
  auto need = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) bad(std::string(what) + " not found: " + p.string());
  };
  for (const auto& d : config.datasets) {
    need(d.path, "dataset");
    if (d.load.labels_path) need(*d.load.labels_path, "labels file");
    if (d.cv_reference) need(*d.cv_reference, "cv reference corpus");
  }
  if (config.mock_script) need(*config.mock_script, "mock script");
  if (config.templates_dir) need(*config.templates_dir, "templates directory");
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read experiment config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_experiment_config(buf.str(), path.parent_path());
  check_paths(cfg);
  return cfg;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& load, bool preprocess_enabled,
                   const PreprocessOptions& options) {
  const auto raw = load_documents(path, load);
  if (preprocess_enabled) return preprocess(raw, options);
  std::vector<Document> docs;
  for (const auto& r : raw) {
    auto tokens = tokenize(r.text);
    if (!tokens.empty()) docs.push_back({std::move(tokens), r.category});
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const DatasetSpec& spec) {
  return load_corpus(spec.path, spec.load, spec.preprocess, spec.preprocess_options);
}

}  // namespace topicllm::cli
