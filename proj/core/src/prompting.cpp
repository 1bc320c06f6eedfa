#include "topicllm/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "templates_generated.hpp"
#include "topicllm/error.hpp"

namespace topicllm {

namespace {

constexpr std::string_view kMergeGoal =
    "We aim to identify topics for the entire document set by merging the topic modeling results for each "
    "subset.";
constexpr std::string_view kMergeDetail =
    "NOTE: Outputs should reflect the topics before merging as much as possible. Output should contain topics "
    "that often appear before merging and not have ones that don't appear much before merging.";
constexpr std::string_view kSeqGoal =
    "We aim to identify topics for the entire document set by sequentially updating tentative topics "
    "identified from each subset, considering topics identified just before from another subset.";
constexpr std::string_view kSeqDetail =
    "NOTE: Outputs should be the same as the previous topics as much as possible. You can change them "
    "minimally only when the given documents don't include them much, and a new topic needs to be added to "
    "describe the documents.";
constexpr std::string_view kCvNote = "NOTE: Make top words for each topic likely to occur together in the documents";
constexpr std::string_view kTuNote = "NOTE: Make the top words unique across topics.";
constexpr std::string_view kDcNote =
    "NOTE: Maximize the number of documents that contain at least one of the top words.";

// Slots that vanish together with their line when rendered empty.
constexpr std::array<std::string_view, 3> kOptionalSlots{"[GOAL]", "[DETAIL]", "[METRIC_NOTES]"};
constexpr std::array<std::string_view, 10> kKnownPlaceholders{
    "DOCS", "TOPICS", "NUM_TOPICS", "K", "CAT", "NUM_WORDS", "FORMAT_WORDS", "GOAL", "DETAIL", "METRIC_NOTES"};

using Values = std::map<std::string, std::string, std::less<>>;

bool is_marker_char(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }

// Yields every [NAME] marker with NAME in [A-Z_]+.
template <typename Fn>
void for_each_marker(std::string_view text, Fn&& fn) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_marker_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == ']') fn(i, text.substr(i + 1, j - i - 1));
  }
}

// Single pass: substituted values are never rescanned, so documents that
// happen to contain bracketed text cannot be expanded.
std::string substitute_line(std::string_view line, const Values& values) {
  std::string out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '[') {
      std::size_t j = i + 1;
      while (j < line.size() && is_marker_char(line[j])) ++j;
      if (j > i + 1 && j < line.size() && line[j] == ']') {
        auto it = values.find(line.substr(i + 1, j - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = j + 1;
          continue;
        }
      }
    }
    out += line[i++];
  }
  return out;
}

std::string render(std::string_view body, const Values& values) {
  std::string out;
  std::size_t start = 0;
  bool first = true;
  while (start <= body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(start, end - start);
    bool drop = false;
    for (auto slot : kOptionalSlots) {
      if (line == slot) {
        auto it = values.find(slot.substr(1, slot.size() - 2));
        drop = it == values.end() || it->second.empty();
      }
    }
    if (!drop) {
      if (!first) out += '\n';
      out += substitute_line(line, values);
      first = false;
    }
    if (end == body.size()) break;
    start = end + 1;
  }
  return out;
}

std::string metric_notes(PhraseSet phrases) {
  std::string notes;
  auto add = [&](std::string_view s) {
    if (!notes.empty()) notes += '\n';
    notes += s;
  };
  if (phrases.contains(Phrase::CvNote)) add(kCvNote);
  if (phrases.contains(Phrase::TuNote)) add(kTuNote);
  if (phrases.contains(Phrase::DcNote)) add(kDcNote);
  return notes;
}

Values common_values(std::size_t k, std::size_t t, PhraseSet phrases) {
  return Values{{"NUM_TOPICS", std::to_string(k)},
                {"K", std::to_string(k)},
                {"NUM_WORDS", std::to_string(t)},
                {"FORMAT_WORDS", format_words(t)},
                {"METRIC_NOTES", metric_notes(phrases)}};
}

std::string strip_trailing_newlines(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

PromptSpec make_spec(TemplateId id, std::string text, std::size_t k, std::size_t t, std::size_t docs,
                     std::optional<std::string> category) {
  PromptSpec spec;
  spec.template_id = id;
  spec.estimated_tokens = estimate_tokens(text);
  spec.rendered_text = std::move(text);
  spec.k_topics = k;
  spec.words_per_topic = t;
  spec.document_count = docs;
  spec.category = std::move(category);
  return spec;
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::ParTM: return "ParTM";
    case TemplateId::ParMrg: return "ParMrg";
    case TemplateId::SeqTM: return "SeqTM";
    case TemplateId::Base: return "Base";
    case TemplateId::Orcl: return "Orcl";
    case TemplateId::Ctrl: return "Ctrl";
  }
  return "ParTM";
}

TemplateId template_id_from_string(std::string_view name) {
  for (auto id : kAllTemplates) {
    if (to_string(id) == name) return id;
  }
  throw Error(ErrorKind::FormatError, "unknown template id '" + std::string(name) + "'");
}

std::string_view template_file_name(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::ParTM: return "par_tm.txt";
    case TemplateId::ParMrg: return "par_mrg.txt";
    case TemplateId::SeqTM: return "seq_tm.txt";
    case TemplateId::Base: return "base.txt";
    case TemplateId::Orcl: return "orcl.txt";
    case TemplateId::Ctrl: return "ctrl.txt";
  }
  return "par_tm.txt";
}

std::string_view to_string(ControlMode mode) noexcept {
  switch (mode) {
    case ControlMode::Base: return "Base";
    case ControlMode::Orcl: return "Orcl";
    case ControlMode::Ctrl: return "Ctrl";
  }
  return "Base";
}

ControlMode control_mode_from_string(std::string_view name) {
  if (name == "Base" || name == "base") return ControlMode::Base;
  if (name == "Orcl" || name == "orcl") return ControlMode::Orcl;
  if (name == "Ctrl" || name == "ctrl") return ControlMode::Ctrl;
  throw Error(ErrorKind::ConfigError, "unknown control mode '" + std::string(name) + "'");
}

PhraseSet PhraseSet::defaults_for(TemplateId id) {
  if (id == TemplateId::ParMrg || id == TemplateId::SeqTM) return {Phrase::Goal, Phrase::Detail};
  return {};
}

std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

std::string format_words(std::size_t t) {
  std::string out;
  for (std::size_t i = 0; i < t; ++i) {
    if (i) out += ' ';
    out += "word";
  }
  return out;
}

std::string serialize_documents(std::span<const Document> docs) {
  std::string out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i) out += '\n';
    out += '#';
    for (const auto& token : docs[i].tokens) {
      out += ' ';
      out += token;
    }
  }
  return out;
}

std::string serialize_topic_blocks(std::span<const TopicSet> sets) {
  std::string out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i) out += "\n\n";
    out += "- " + std::to_string(i + 1);
    for (const auto& topic : sets[i].topics()) {
      out += "\n#";
      for (const auto& w : topic) {
        out += ' ';
        out += w;
      }
    }
  }
  return out;
}

bool has_placeholder_marker(std::string_view text) {
  bool found = false;
  for_each_marker(text, [&](std::size_t, std::string_view) { found = true; });
  return found;
}

void TemplateCatalog::validate(TemplateId id, std::string_view body) {
  std::map<std::string, bool, std::less<>> present;
  for_each_marker(body, [&](std::size_t, std::string_view name) {
    if (std::find(kKnownPlaceholders.begin(), kKnownPlaceholders.end(), name) == kKnownPlaceholders.end()) {
      throw Error(ErrorKind::TemplateError,
                  std::string(to_string(id)) + " template uses unknown placeholder [" + std::string(name) + "]");
    }
    present[std::string(name)] = true;
  });
  auto need = [&](std::string_view name) {
    if (!present.count(name)) {
      throw Error(ErrorKind::TemplateError,
                  std::string(to_string(id)) + " template lacks [" + std::string(name) + "]");
    }
  };
  if (!present.count("NUM_TOPICS") && !present.count("K")) need("NUM_TOPICS");
  if (id != TemplateId::ParMrg) need("DOCS");
  if (id == TemplateId::ParMrg || id == TemplateId::SeqTM) need("TOPICS");
  if (id == TemplateId::Ctrl) need("CAT");
  if (body.find("\"Topic k:") == std::string_view::npos) {
    throw Error(ErrorKind::TemplateError, std::string(to_string(id)) + " template lacks the \"Topic k: ...\" format line");
  }
}

const TemplateCatalog& TemplateCatalog::builtin() {
  static const TemplateCatalog catalog = [] {
    TemplateCatalog c;
    const std::array<std::string_view, kAllTemplates.size()> sources{
        assets::kParTm, assets::kParMrg, assets::kSeqTm, assets::kBase, assets::kOrcl, assets::kCtrl};
    for (auto id : kAllTemplates) {
      auto body = strip_trailing_newlines(sources[static_cast<std::size_t>(id)]);
      validate(id, body);
      c.bodies_[static_cast<std::size_t>(id)] = std::move(body);
    }
    c.version_ = strip_trailing_newlines(assets::kVersion);
    return c;
  }();
  return catalog;
}

TemplateCatalog TemplateCatalog::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::IoError, "template directory " + dir.string() + " does not exist");
  }
  TemplateCatalog c = builtin();
  std::string overridden;
  for (auto id : kAllTemplates) {
    const auto file = dir / template_file_name(id);
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    auto body = strip_trailing_newlines(ss.str());
    validate(id, body);
    c.bodies_[static_cast<std::size_t>(id)] = std::move(body);
    overridden += overridden.empty() ? "" : ",";
    overridden += to_string(id);
  }
  if (!overridden.empty()) {
    c.version_ += "+external(" + dir.filename().string() + ":" + overridden + ")";
  }
  return c;
}

PromptSpec TemplateCatalog::render_par_tm(std::span<const Document> docs, std::size_t k, std::size_t t,
                                          PhraseSet phrases) const {
  require(!docs.empty(), "render_par_tm: docs must be non-empty");
  require(k >= 1 && t >= 1, "render_par_tm: k and t must be positive");
  auto values = common_values(k, t, phrases);
  values["DOCS"] = serialize_documents(docs);
  return make_spec(TemplateId::ParTM, render(body(TemplateId::ParTM), values), k, t, docs.size(), std::nullopt);
}

PromptSpec TemplateCatalog::render_par_mrg(std::span<const TopicSet> topic_sets, std::size_t k, std::size_t t,
                                           PhraseSet phrases) const {
  if (topic_sets.size() < 2) {
    throw Error(ErrorKind::MergeOfOne, "merging needs at least two topic sets, got " +
                                           std::to_string(topic_sets.size()));
  }
  require(k >= 1 && t >= 1, "render_par_mrg: k and t must be positive");
  auto values = common_values(k, t, phrases);
  values["TOPICS"] = serialize_topic_blocks(topic_sets);
  if (phrases.contains(Phrase::Goal)) values["GOAL"] = std::string(kMergeGoal);
  if (phrases.contains(Phrase::Detail)) values["DETAIL"] = std::string(kMergeDetail);
  return make_spec(TemplateId::ParMrg, render(body(TemplateId::ParMrg), values), k, t, 0, std::nullopt);
}

PromptSpec TemplateCatalog::render_seq_tm(std::span<const Document> docs, const TopicSet& previous, std::size_t k,
                                          std::size_t t, PhraseSet phrases) const {
  require(!docs.empty(), "render_seq_tm: docs must be non-empty");
  require(previous.k() >= 1, "render_seq_tm: previous topics must hold at least one topic");
  require(k >= 1 && t >= 1, "render_seq_tm: k and t must be positive");
  auto values = common_values(k, t, phrases);
  values["DOCS"] = serialize_documents(docs);
  values["TOPICS"] = strip_trailing_newlines(previous.to_reply_text());
  if (phrases.contains(Phrase::Goal)) values["GOAL"] = std::string(kSeqGoal);
  if (phrases.contains(Phrase::Detail)) values["DETAIL"] = std::string(kSeqDetail);
  return make_spec(TemplateId::SeqTM, render(body(TemplateId::SeqTM), values), k, t, docs.size(), std::nullopt);
}

PromptSpec TemplateCatalog::render_controlled(std::span<const Document> docs, std::size_t k, std::size_t t,
                                              ControlMode mode, const std::optional<std::string>& category,
                                              PhraseSet phrases) const {
  require(!docs.empty(), "render_controlled: docs must be non-empty");
  require(k >= 1 && t >= 1, "render_controlled: k and t must be positive");
  if (mode == ControlMode::Ctrl && (!category || category->empty())) {
    throw Error(ErrorKind::MissingCategory, "Ctrl prompts need a category");
  }
  const TemplateId id = mode == ControlMode::Ctrl   ? TemplateId::Ctrl
                        : mode == ControlMode::Orcl ? TemplateId::Orcl
                                                    : TemplateId::Base;
  auto values = common_values(k, t, phrases);
  values["DOCS"] = serialize_documents(docs);
  if (category) values["CAT"] = *category;
  return make_spec(id, render(body(id), values), k, t, docs.size(),
                   mode == ControlMode::Base ? std::nullopt : category);
}

}  // namespace topicllm
