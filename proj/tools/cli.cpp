#include "cli.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "experiment_config.hpp"
#include "topicllm/orchestrator.hpp"
#include "topicllm/report.hpp"
#include "topicllm/topic_parser.hpp"
#include "topicllm/version.hpp"

namespace topicllm::cli {

namespace {

struct CorpusFlags {
  std::string path;
  std::string labels;
  std::string format = "auto";
  std::size_t min_freq = PreprocessOptions{}.min_freq;
  std::size_t min_word_len = PreprocessOptions{}.min_word_len;
  bool raw = false;

  void add_to(CLI::App& app, bool required = true) {
    auto* opt = app.add_option("--corpus", path, "One document per line (or label<TAB>text)");
    if (required) opt->required();
    app.add_option("--labels", labels, "Category labels, one per line, parallel to --corpus");
    app.add_option("--format", format, "auto, plain or tsv")->check(CLI::IsMember({"auto", "plain", "tsv"}));
    app.add_option("--min-freq", min_freq, "Drop words occurring fewer times in the corpus");
    app.add_option("--min-word-len", min_word_len, "Drop words shorter than this many characters");
    app.add_flag("--raw", raw, "Tokenize only, skip the length and frequency filters");
  }

  Corpus load() const {
    LoadOptions load;
    load.format = format == "plain" ? CorpusFormat::plain : format == "tsv" ? CorpusFormat::tsv : CorpusFormat::automatic;
    if (!labels.empty()) load.labels_path = labels;
    return load_corpus(path, load, !raw, PreprocessOptions{min_freq, min_word_len});
  }
};

struct BackendFlags {
  std::string kind = "mock";
  std::string mock_script;
  std::string endpoint;
  std::string api_key_env;
  std::size_t max_concurrent = 0;
  std::size_t max_retries = 0;
  std::string run_log;

  void add_to(CLI::App& app) {
    app.add_option("--backend", kind, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    app.add_option("--mock-script", mock_script, "JSON rules for the mock backend");
    app.add_option("--endpoint", endpoint, "Chat-completions URL for the http backend");
    app.add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
    app.add_option("--max-concurrent", max_concurrent, "Concurrent request cap");
    app.add_option("--max-retries", max_retries, "Retries for transient backend failures");
    app.add_option("--run-log", run_log, "Append every request and reply here (JSONL)");
  }

  void apply(BackendConfig& cfg, std::optional<std::filesystem::path>& script, const CLI::App& app) const {
    if (app.count("--backend")) cfg.kind = backend_kind_from_string(kind);
    if (!mock_script.empty()) script = mock_script;
    if (!endpoint.empty()) cfg.endpoint_url = endpoint;
    if (!api_key_env.empty()) cfg.api_key_env_var = api_key_env;
    if (max_concurrent) cfg.max_concurrent = max_concurrent;
    if (app.count("--max-retries")) cfg.max_retries = max_retries;
    if (!run_log.empty()) cfg.run_log = run_log;
    cfg.validate();
  }
};

std::unique_ptr<LlmGateway> make_gateway(const BackendConfig& cfg, const std::optional<std::filesystem::path>& script) {
  return LlmGateway::create(cfg, script ? MockScript::load(*script) : MockScript{});
}

std::set<TableFormat> formats_from(const std::vector<std::string>& names) {
  std::set<TableFormat> out;
  for (const auto& n : names) out.insert(n == "csv" ? TableFormat::csv : TableFormat::markdown);
  return out;
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

// ---- model ----------------------------------------------------------------

struct ModelCmd {
  CorpusFlags corpus;
  BackendFlags backend;
  std::string model = PipelineConfig{}.model_id;
  std::string mode = "parallel";
  std::size_t k = 5;
  std::size_t t = 5;
  std::size_t subset_size = 1000;
  std::vector<std::uint64_t> seeds{1};
  std::string control_mode;
  std::string category;
  std::size_t max_attempts = 3;
  std::string templates_dir;
  std::string dataset;
  std::string out_path = "runs/records.jsonl";

  CLI::App* sub = nullptr;

  void add_to(CLI::App& app) {
    sub = app.add_subcommand("model", "Run one pipeline and archive its RunRecords");
    corpus.add_to(*sub);
    backend.add_to(*sub);
    sub->add_option("--model", model, "Backend model id");
    sub->add_option("--mode", mode, "parallel, sequential, controlled or lda")
        ->check(CLI::IsMember({"parallel", "sequential", "controlled", "lda"}));
    sub->add_option("-k,--topics", k, "Number of topics");
    sub->add_option("-t,--words", t, "Words per topic");
    sub->add_option("--subset-size", subset_size, "Documents per prompt");
    sub->add_option("--seed", seeds, "Run seed (repeatable)");
    sub->add_option("--control-mode", control_mode, "Base, Orcl or Ctrl")
        ->check(CLI::IsMember({"Base", "Orcl", "Ctrl"}));
    sub->add_option("--category", category, "Category for Orcl/Ctrl");
    sub->add_option("--max-attempts", max_attempts, "Identical re-prompts per prompt");
    sub->add_option("--templates", templates_dir, "Directory of template overrides");
    sub->add_option("--dataset", dataset, "Dataset name recorded in the archive");
    sub->add_option("-o,--out", out_path, "RunRecord archive to append to");
  }

  int run(std::ostream& out) const {
    const auto docs = corpus.load();
    PipelineConfig cfg;
    cfg.model_id = model;
    cfg.mode = pipeline_mode_from_string(mode);
    cfg.k = k;
    cfg.t = t;
    cfg.subset_size = subset_size;
    cfg.seeds = seeds;
    cfg.runs = seeds.size();
    if (!control_mode.empty()) cfg.control_mode = control_mode_from_string(control_mode);
    if (!category.empty()) cfg.category = category;
    cfg.max_attempts = max_attempts;
    cfg.keep_before_merge = true;
    cfg.validate();

    BackendConfig bcfg;
    std::optional<std::filesystem::path> script;
    backend.apply(bcfg, script, *sub);
    auto gateway = make_gateway(bcfg, script);
    const auto catalog = templates_dir.empty() ? TemplateCatalog::builtin() : TemplateCatalog::from_directory(templates_dir);
    Orchestrator orchestrator(*gateway, catalog);

    std::vector<RunRecord> records;
    for (const auto seed : cfg.seeds) {
      auto record = orchestrator.run_once(docs, cfg, seed);
      record.dataset = dataset.empty() ? std::filesystem::path(corpus.path).stem().string() : dataset;
      out << "# seed " << seed << " (" << record.llm_calls << " LLM calls)\n" << record.final_topics.to_reply_text();
      records.push_back(std::move(record));
    }
    append_run_records(out_path, records);
    out << "wrote " << records.size() << " record(s) to " << out_path << '\n';
    return 0;
  }
};

// ---- evaluate -------------------------------------------------------------

struct MetricFlags {
  std::size_t window = MetricConfig{}.window_size;
  double epsilon = MetricConfig{}.epsilon;
  std::string fa_mode = "slots";
  std::vector<std::string> dc_categories;
  std::string cv_reference;

  void add_to(CLI::App& app) {
    app.add_option("--window", window, "Cv sliding window size");
    app.add_option("--epsilon", epsilon, "NPMI smoothing");
    app.add_option("--fa-mode", fa_mode, "slots or unique_words")->check(CLI::IsMember({"slots", "unique_words"}));
    app.add_option("--dc-category", dc_categories, "Report DC restricted to this category (repeatable)");
    app.add_option("--cv-reference", cv_reference, "Reference corpus for Cv (defaults to --corpus)");
  }

  void apply(MetricConfig& m, const CLI::App& app) const {
    if (app.count("--window")) m.window_size = window;
    if (app.count("--epsilon")) m.epsilon = epsilon;
    if (app.count("--fa-mode")) m.fa_mode = fa_mode_from_string(fa_mode);
    if (!dc_categories.empty()) m.dc_categories = dc_categories;
    if (!cv_reference.empty()) m.reference_name = std::filesystem::path(cv_reference).stem().string();
    require(m.window_size > 0, "--window must be positive");
  }
};

struct EvaluateCmd {
  CorpusFlags corpus;
  MetricFlags metrics;
  std::vector<std::string> records;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "md"};
  bool before_merge = true;
  CLI::App* sub = nullptr;

  void add_to(CLI::App& app) {
    sub = app.add_subcommand("evaluate", "Recompute metrics from archived RunRecords");
    corpus.add_to(*sub);
    metrics.add_to(*sub);
    sub->add_option("--records", records, "RunRecord archive(s)")->required();
    sub->add_option("-o,--out", out_dir, "Output directory for report.csv / report.md");
    sub->add_option("--formats", formats, "csv and/or md")->delimiter(',')->check(CLI::IsMember({"csv", "md"}));
    sub->add_flag("!--no-before-merge", before_merge, "Skip pre-merge rows");
  }

  int run(std::ostream& out) const {
    const auto docs = corpus.load();
    MetricConfig m;
    metrics.apply(m, *sub);
    std::optional<Corpus> reference;
    if (!metrics.cv_reference.empty()) {
      reference = load_corpus(metrics.cv_reference, {}, !corpus.raw, PreprocessOptions{corpus.min_freq, corpus.min_word_len});
    }
    std::vector<RunRecord> all;
    for (const auto& path : records) {
      auto part = load_run_records(path);
      all.insert(all.end(), part.begin(), part.end());
    }
    require(!all.empty(), "no RunRecords found in the given archives");
    const auto report = evaluate_records(all, docs, m, reference ? &*reference : nullptr, before_merge);
    for (const auto& p : emit_tables(report, formats_from(formats), out_dir)) out << "wrote " << p.string() << '\n';
    return 0;
  }
};

// ---- experiment -----------------------------------------------------------

struct ExperimentCmd {
  std::string config_path;
  BackendFlags backend;
  MetricFlags metrics;
  std::string out_dir;
  std::string templates_dir;
  bool allow_partial = false;
  CLI::App* sub = nullptr;

  void add_to(CLI::App& app) {
    sub = app.add_subcommand("experiment", "Run the full multi-run grid and write report tables");
    sub->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    backend.add_to(*sub);
    metrics.add_to(*sub);
    sub->add_option("-o,--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--templates", templates_dir, "Directory of template overrides");
    sub->add_flag("--allow-partial", allow_partial, "Aggregate the completed runs of cells with failures");
  }

  int run(std::ostream& out, std::ostream& err) const {
    auto cfg = load_experiment_config(config_path);
    backend.apply(cfg.backend, cfg.mock_script, *sub);
    metrics.apply(cfg.metrics, *sub);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!templates_dir.empty()) cfg.templates_dir = templates_dir;
    if (allow_partial) cfg.allow_partial = true;
    check_paths(cfg);

    auto gateway = make_gateway(cfg.backend, cfg.mock_script);
    const auto catalog =
        cfg.templates_dir ? TemplateCatalog::from_directory(*cfg.templates_dir) : TemplateCatalog::builtin();
    Orchestrator orchestrator(*gateway, catalog);

    const auto runs_dir = cfg.output_dir / "runs";
    std::filesystem::create_directories(runs_dir);
    EvalReport report;
    report.allow_partial = cfg.allow_partial;
    for (const auto& dataset : cfg.datasets) {
      const auto docs = load_corpus(dataset);
      std::optional<Corpus> reference;
      if (dataset.cv_reference) reference = load_corpus(*dataset.cv_reference, {}, dataset.preprocess, dataset.preprocess_options);
      MetricConfig m = cfg.metrics;
      if (dataset.cv_reference) m.reference_name = dataset.cv_reference->stem().string();

      const auto archive = runs_dir / (dataset.name + ".jsonl");
      std::filesystem::remove(archive);
      for (const auto& pipeline : cfg.pipelines) {
        std::vector<RunRecord> records;
        auto part = orchestrator.run_experiment(docs, pipeline, m, dataset.name, reference ? &*reference : nullptr,
                                                &records);
        part.allow_partial = cfg.allow_partial;
        report.append(part);
        append_run_records(archive, records);
        out << dataset.name << ' ' << pipeline.model_id << ' ' << pipeline.mode_label() << " k=" << pipeline.k
            << ": " << records.size() << '/' << pipeline.seeds.size() << " runs completed\n";
      }
    }

    const auto written = emit_tables(report, {TableFormat::csv, TableFormat::markdown}, cfg.output_dir);
    for (const auto& p : written) out << "wrote " << p.string() << '\n';
    if (report.has_failures() && !cfg.allow_partial) {
      std::size_t failed = 0;
      for (const auto& r : report.rows) failed += r.completed ? 0 : 1;
      err << "error: PipelineAborted: " << failed << " run(s) failed; see report.csv\n";
      return 1;
    }
    return 0;
  }
};

// ---- sweep-k --------------------------------------------------------------

struct SweepCmd {
  CorpusFlags corpus;
  BackendFlags backend;
  std::string model = PipelineConfig{}.model_id;
  std::vector<std::size_t> ks{5, 10, 15, 20};
  std::size_t trials = 10;
  std::size_t t = 5;
  std::uint64_t seed = 1;
  CLI::App* sub = nullptr;

  void add_to(CLI::App& app) {
    sub = app.add_subcommand("sweep-k", "Check that the backend returns the requested number of topics");
    corpus.add_to(*sub);
    backend.add_to(*sub);
    sub->add_option("--model", model, "Backend model id");
    sub->add_option("--ks", ks, "Topic counts to request")->delimiter(',');
    sub->add_option("--trials", trials, "Prompts per topic count");
    sub->add_option("-t,--words", t, "Words per topic");
    sub->add_option("--seed", seed, "Seed of the first document shuffle");
  }

  int run(std::ostream& out) const {
    const auto docs = corpus.load();
    BackendConfig bcfg;
    std::optional<std::filesystem::path> script;
    backend.apply(bcfg, script, *sub);
    auto gateway = make_gateway(bcfg, script);
    Orchestrator orchestrator(*gateway);
    PipelineConfig cfg;
    cfg.model_id = model;
    cfg.t = t;
    cfg.seeds = {seed};
    const auto rows = orchestrator.sweep_topic_count(docs, cfg, ks, trials);
    out << "k,trials,exact,compliance,produced\n";
    bool all_exact = true;
    for (const auto& r : rows) {
      std::string produced;
      for (const auto n : r.produced_counts) produced += (produced.empty() ? "" : ";") + std::to_string(n);
      out << r.requested_k << ',' << r.trials << ',' << r.exact << ',' << fixed3(r.compliance()) << ',' << produced
          << '\n';
      all_exact = all_exact && r.exact == r.trials;
    }
    out << "# exact topic count in all trials: " << (all_exact ? "yes" : "no") << '\n';
    return 0;
  }
};

// ---- audit-fa -------------------------------------------------------------

struct AuditCmd {
  CorpusFlags corpus;
  std::vector<std::string> records;
  std::string reply;
  std::size_t k = 0;
  std::size_t t = 0;
  CLI::App* sub = nullptr;

  void add_to(CLI::App& app) {
    sub = app.add_subcommand("audit-fa", "List topic words that never occur in the corpus");
    corpus.add_to(*sub);
    sub->add_option("--records", records, "RunRecord archive(s)");
    sub->add_option("--reply", reply, "A raw 'Topic n: ...' reply file instead of records");
    sub->add_option("-k,--topics", k, "Topic count expected in --reply");
    sub->add_option("-t,--words", t, "Words per topic expected in --reply");
  }

  void report(std::ostream& out, const std::string& label, const TopicSet& topics, const Corpus& docs) const {
    const auto missing = list_nonfactual_words(topics, docs);
    out << label << " Fa=" << fixed3(factuality_fa(topics, docs)) << " nonfactual=" << missing.size();
    for (const auto& w : missing) out << ' ' << w;
    out << '\n';
  }

  int run(std::ostream& out) const {
    require(!records.empty() || !reply.empty(), "audit-fa needs --records or --reply");
    const auto docs = corpus.load();
    if (!reply.empty()) {
      require(k > 0 && t > 0, "--reply needs -k and -t");
      std::ifstream in(reply);
      if (!in) throw Error(ErrorKind::IoError, "cannot read " + reply);
      std::stringstream buf;
      buf << in.rdbuf();
      auto parsed = parse_topics(buf.str(), k, t);
      if (!parsed.topics) {
        throw Error(ErrorKind::FormatError, "reply does not parse: " + std::string(to_string(parsed.report.status)));
      }
      report(out, reply, *parsed.topics, docs);
    }
    for (const auto& path : records) {
      for (const auto& r : load_run_records(path)) {
        report(out, r.dataset + ' ' + r.model_id + ' ' + r.mode_label() + " k=" + std::to_string(r.k) +
                        " seed=" + std::to_string(r.seed),
               r.final_topics, docs);
      }
    }
    return 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM topic modeling pipelines and topic-quality metrics", "topicllm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  ModelCmd model;
  EvaluateCmd evaluate;
  ExperimentCmd experiment;
  SweepCmd sweep;
  AuditCmd audit;
  model.add_to(app);
  evaluate.add_to(app);
  experiment.add_to(app);
  sweep.add_to(app);
  audit.add_to(app);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*model.sub) return model.run(out);
    if (*evaluate.sub) return evaluate.run(out);
    if (*experiment.sub) return experiment.run(out, err);
    if (*sweep.sub) return sweep.run(out);
    if (*audit.sub) return audit.run(out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace topicllm::cli
