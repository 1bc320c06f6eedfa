#include <fstream>

#include "json.hpp"
#include "topicllm/orchestrator.hpp"

namespace topicllm {

using nlohmann::json;

namespace {

json topics_json(const TopicSet& set) {
  if (set.empty()) return nullptr;
  return json{{"source", to_string(set.source())}, {"topics", set.topics()}};
}

TopicSet topics_from(const json& j) {
  if (j.is_null()) return {};
  return TopicSet(j.at("topics").get<std::vector<Topic>>(),
                  topic_source_from_string(j.at("source").get<std::string>()));
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string to_json_line(const RunRecord& r) {
  json subsets = json::array();
  for (const auto& set : r.subset_topic_sets) subsets.push_back(topics_json(set));

  json prompts = json::array();
  for (const auto& p : r.prompts) {
    prompts.push_back({{"template", to_string(p.template_id)},
                       {"text", p.rendered_text},
                       {"k", p.k_topics},
                       {"t", p.words_per_topic},
                       {"category", optional_json(p.category)},
                       {"documents", p.document_count},
                       {"estimated_tokens", p.estimated_tokens}});
  }

  json reports = json::array();
  for (const auto& p : r.parse_reports) {
    reports.push_back({{"status", to_string(p.status)},
                       {"expected_k", p.expected_k},
                       {"found_k", p.found_k},
                       {"expected_t", p.expected_t},
                       {"offending_lines", p.offending_lines},
                       {"ignored_lines", p.ignored_lines},
                       {"notes", p.notes}});
  }

  json j{{"dataset", r.dataset},
         {"model", r.model_id},
         {"mode", to_string(r.mode)},
         {"control_mode", r.control_mode ? json(to_string(*r.control_mode)) : json(nullptr)},
         {"category", optional_json(r.category)},
         {"k", r.k},
         {"t", r.t},
         {"seed", r.seed},
         {"subset_topic_sets", std::move(subsets)},
         {"final_topics", topics_json(r.final_topics)},
         {"prompts", std::move(prompts)},
         {"parse_reports", std::move(reports)},
         {"llm_calls", r.llm_calls}};
  return j.dump();
}

RunRecord run_record_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    RunRecord r;
    r.dataset = j.at("dataset").get<std::string>();
    r.model_id = j.at("model").get<std::string>();
    r.mode = pipeline_mode_from_string(j.at("mode").get<std::string>());
    if (auto cm = optional_string(j, "control_mode")) r.control_mode = control_mode_from_string(*cm);
    r.category = optional_string(j, "category");
    r.k = j.at("k").get<std::size_t>();
    r.t = j.at("t").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("subset_topic_sets")) r.subset_topic_sets.push_back(topics_from(s));
    r.final_topics = topics_from(j.at("final_topics"));
    for (const auto& p : j.at("prompts")) {
      PromptSpec spec;
      spec.template_id = template_id_from_string(p.at("template").get<std::string>());
      spec.rendered_text = p.at("text").get<std::string>();
      spec.k_topics = p.at("k").get<std::size_t>();
      spec.words_per_topic = p.at("t").get<std::size_t>();
      spec.category = optional_string(p, "category");
      spec.document_count = p.at("documents").get<std::size_t>();
      spec.estimated_tokens = p.at("estimated_tokens").get<std::size_t>();
      r.prompts.push_back(std::move(spec));
    }
    for (const auto& p : j.at("parse_reports")) {
      ParseReport rep;
      rep.status = parse_status_from_string(p.at("status").get<std::string>());
      rep.expected_k = p.at("expected_k").get<std::size_t>();
      rep.found_k = p.at("found_k").get<std::size_t>();
      rep.expected_t = p.at("expected_t").get<std::size_t>();
      rep.offending_lines = p.at("offending_lines").get<std::vector<std::string>>();
      rep.ignored_lines = p.at("ignored_lines").get<std::vector<std::string>>();
      rep.notes = p.at("notes").get<std::vector<std::string>>();
      r.parse_reports.push_back(std::move(rep));
    }
    r.llm_calls = j.at("llm_calls").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("bad run record: ") + e.what());
  }
}

void append_run_records(const std::filesystem::path& path, std::span<const RunRecord> records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<RunRecord> load_run_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::vector<RunRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(run_record_from_json(line));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace topicllm
