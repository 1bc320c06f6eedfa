#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "topicllm/corpus.hpp"
#include "topicllm/topic_set.hpp"

namespace topicllm {

enum class TemplateId { ParTM, ParMrg, SeqTM, Base, Orcl, Ctrl };
inline constexpr std::array kAllTemplates{TemplateId::ParTM, TemplateId::ParMrg, TemplateId::SeqTM,
                                          TemplateId::Base,  TemplateId::Orcl,   TemplateId::Ctrl};
std::string_view to_string(TemplateId id) noexcept;
TemplateId template_id_from_string(std::string_view name);
/// Asset file name for a template, e.g. "par_tm.txt".
std::string_view template_file_name(TemplateId id) noexcept;

enum class ControlMode { Base, Orcl, Ctrl };
std::string_view to_string(ControlMode mode) noexcept;
ControlMode control_mode_from_string(std::string_view name);

enum class Phrase : std::uint8_t { Goal, Detail, CvNote, TuNote, DcNote };

class PhraseSet {
 public:
  constexpr PhraseSet() = default;
  constexpr PhraseSet(std::initializer_list<Phrase> phrases) {
    for (auto p : phrases) bits_ |= bit(p);
  }
  constexpr bool contains(Phrase p) const { return (bits_ & bit(p)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr PhraseSet with(Phrase p) const {
    PhraseSet s = *this;
    s.bits_ |= bit(p);
    return s;
  }
  friend constexpr bool operator==(PhraseSet, PhraseSet) = default;

  /// Goal + Detail for merge and sequential prompts, nothing elsewhere.
  static PhraseSet defaults_for(TemplateId id);

 private:
  static constexpr std::uint8_t bit(Phrase p) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p)); }
  std::uint8_t bits_ = 0;
};

struct PromptSpec {
  TemplateId template_id = TemplateId::ParTM;
  std::string rendered_text;
  std::size_t k_topics = 0;
  std::size_t words_per_topic = 0;
  std::optional<std::string> category;
  std::size_t document_count = 0;
  std::size_t estimated_tokens = 0;  // chars / 4, rounded up

  friend bool operator==(const PromptSpec&, const PromptSpec&) = default;
};

/// Rough token estimate used for context budgeting.
std::size_t estimate_tokens(std::string_view text) noexcept;

/// "word word word" with `t` words.
std::string format_words(std::size_t t);

/// Documents as `# tok tok tok` lines.
std::string serialize_documents(std::span<const Document> docs);

/// Merge input blocks: "- 1\n# w w w\n...\n\n- 2\n...".
std::string serialize_topic_blocks(std::span<const TopicSet> sets);

/// True when `text` still holds an uppercase `[PLACEHOLDER]` marker.
bool has_placeholder_marker(std::string_view text);

/// The six prompt templates. The built-in catalog is compiled into the
/// library; a directory of `<id>.txt` files can override any of them.
class TemplateCatalog {
 public:
  static const TemplateCatalog& builtin();

  /// Loads overrides from `dir`; missing files fall back to the built-ins.
  /// Throws TemplateError if a body lacks a placeholder its id requires.
  static TemplateCatalog from_directory(const std::filesystem::path& dir);

  const std::string& body(TemplateId id) const { return bodies_[static_cast<std::size_t>(id)]; }
  const std::string& version() const noexcept { return version_; }

  PromptSpec render_par_tm(std::span<const Document> docs, std::size_t k, std::size_t t,
                           PhraseSet phrases = PhraseSet::defaults_for(TemplateId::ParTM)) const;

  /// Throws MergeOfOne for fewer than two topic sets.
  PromptSpec render_par_mrg(std::span<const TopicSet> topic_sets, std::size_t k, std::size_t t,
                            PhraseSet phrases = PhraseSet::defaults_for(TemplateId::ParMrg)) const;

  PromptSpec render_seq_tm(std::span<const Document> docs, const TopicSet& previous, std::size_t k,
                           std::size_t t, PhraseSet phrases = PhraseSet::defaults_for(TemplateId::SeqTM)) const;

  /// Ctrl without a category throws MissingCategory. For Orcl the caller
  /// passes category-filtered documents; the category is recorded only.
  PromptSpec render_controlled(std::span<const Document> docs, std::size_t k, std::size_t t, ControlMode mode,
                               const std::optional<std::string>& category,
                               PhraseSet phrases = PhraseSet::defaults_for(TemplateId::Base)) const;

  /// Checks a body against the placeholder requirements of `id`.
  static void validate(TemplateId id, std::string_view body);

 private:
  TemplateCatalog() = default;
  std::array<std::string, kAllTemplates.size()> bodies_;
  std::string version_;
};

}  // namespace topicllm
