#include "topicllm/topic_parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "topicllm/error.hpp"

namespace topicllm {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// If `line` starts with "topic <digits>:" returns the text after the colon.
std::optional<std::string_view> topic_line_body(std::string_view line) {
  constexpr std::string_view kWord = "topic";
  if (line.size() < kWord.size()) return std::nullopt;
  for (std::size_t i = 0; i < kWord.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) != kWord[i]) return std::nullopt;
  }
  std::size_t i = kWord.size();
  const std::size_t spaces_start = i;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i == spaces_start) return std::nullopt;
  const std::size_t digits_start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits_start) return std::nullopt;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  return line.substr(i + 1);
}

std::vector<std::string> topic_words(std::string_view body) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (is_space(body[i]) || body[i] == ',')) ++i;
    std::size_t j = i;
    while (j < body.size() && !is_space(body[j]) && body[j] != ',') ++j;
    if (j > i) {
      std::string w(body.substr(i, j - i));
      for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.push_back(std::move(w));
    }
    i = j;
  }
  return words;
}

}  // namespace

std::string_view to_string(ParseStatus status) noexcept {
  switch (status) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::wrong_topic_count: return "wrong_topic_count";
    case ParseStatus::wrong_word_count: return "wrong_word_count";
    case ParseStatus::format_violation: return "format_violation";
  }
  return "format_violation";
}

ParseStatus parse_status_from_string(std::string_view name) {
  for (auto s : {ParseStatus::ok, ParseStatus::wrong_topic_count, ParseStatus::wrong_word_count,
                 ParseStatus::format_violation}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::FormatError, "unknown parse status '" + std::string(name) + "'");
}

ParseResult parse_topics(std::string_view reply, std::size_t expected_k, std::size_t expected_t,
                         TopicSource source) noexcept {
  ParseResult result;
  auto& report = result.report;
  try {
    report.expected_k = expected_k;
    report.expected_t = expected_t;

    std::vector<std::vector<std::string>> topics;
    std::vector<std::string> topic_lines;
    std::size_t start = 0;
    while (start <= reply.size()) {
      auto end = reply.find('\n', start);
      if (end == std::string_view::npos) end = reply.size();
      const auto line = trim(reply.substr(start, end - start));
      if (!line.empty()) {
        auto body = topic_line_body(line);
        auto words = body ? topic_words(*body) : std::vector<std::string>{};
        if (body && !words.empty()) {
          topics.push_back(std::move(words));
          topic_lines.emplace_back(line);
        } else {
          report.ignored_lines.emplace_back(line);
        }
      }
      if (end == reply.size()) break;
      start = end + 1;
    }

    report.found_k = topics.size();
    if (topics.empty()) {
      report.status = ParseStatus::format_violation;
      report.offending_lines = report.ignored_lines;
      return result;
    }
    if (topics.size() != expected_k) {
      report.status = ParseStatus::wrong_topic_count;
      report.offending_lines = report.ignored_lines;
      return result;
    }
    for (std::size_t i = 0; i < topics.size(); ++i) {
      if (topics[i].size() != expected_t) report.offending_lines.push_back(topic_lines[i]);
    }
    if (!report.offending_lines.empty()) {
      report.status = ParseStatus::wrong_word_count;
      return result;
    }
    for (std::size_t i = 0; i < topics.size(); ++i) {
      std::set<std::string_view> seen;
      for (const auto& w : topics[i]) {
        if (!seen.insert(w).second) {
          report.notes.push_back("duplicate word '" + w + "' in topic " + std::to_string(i + 1));
        }
      }
    }
    result.topics = TopicSet(std::move(topics), source);
    report.status = ParseStatus::ok;
  } catch (const std::exception& e) {
    // Only reachable on allocation failure or an unforeseen word shape.
    result.topics.reset();
    report.status = ParseStatus::format_violation;
    report.notes.push_back(e.what());
  }
  return result;
}

RetryDecision retry_policy(const ParseReport& report, std::size_t attempt, std::size_t max_attempts) {
  require(report.status != ParseStatus::ok, "retry_policy: report status is ok");
  return attempt < max_attempts ? RetryDecision::reprompt_same : RetryDecision::abort;
}

}  // namespace topicllm
