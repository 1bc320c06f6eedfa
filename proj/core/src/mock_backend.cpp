#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "topicllm/llm_gateway.hpp"

namespace topicllm {

using nlohmann::json;

namespace {

ErrorKind error_kind_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ErrorKind::ReportInvalid); ++i) {
    const auto kind = static_cast<ErrorKind>(i);
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::ConfigError, "unknown error class '" + name + "' in mock script");
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string w; is >> w;) out.push_back(lower(std::move(w)));
  return out;
}

// First integer immediately following some occurrence of `marker` in `text`.
std::optional<std::size_t> number_after(std::string_view text, std::string_view marker) {
  for (auto pos = text.find(marker); pos != std::string_view::npos; pos = text.find(marker, pos + 1)) {
    std::size_t i = pos + marker.size();
    std::size_t value = 0;
    bool any = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) && value < 100000) {
      value = value * 10 + static_cast<std::size_t>(text[i] - '0');
      any = true;
      ++i;
    }
    if (any) return value;
  }
  return std::nullopt;
}

// Counts the words in the quoted format example: "Topic k: word word word".
std::optional<std::size_t> words_in_format_line(std::string_view text) {
  const auto pos = text.find("\"Topic k:");
  if (pos == std::string_view::npos) return std::nullopt;
  const auto end = text.find('"', pos + 1);
  if (end == std::string_view::npos) return std::nullopt;
  auto words = split_words(text.substr(pos + 9, end - pos - 9));
  if (words.empty()) return std::nullopt;
  return words.size();
}

struct PromptView {
  std::size_t k = 5;
  std::size_t t = 5;
  std::vector<std::vector<std::string>> docs;
  std::vector<std::vector<std::string>> prior_topics;
  std::optional<std::string> category;
};

PromptView read_prompt(std::string_view prompt) {
  PromptView view;
  if (auto k = number_after(prompt, "identify ")) view.k = *k;
  else if (auto k2 = number_after(prompt, "latent ")) view.k = *k2;
  if (auto t = words_in_format_line(prompt)) view.t = *t;
  else if (auto t2 = number_after(prompt, "use ")) view.t = *t2;

  const std::string_view cat_marker = "specifically related to ";
  if (auto pos = prompt.find(cat_marker); pos != std::string_view::npos) {
    const auto start = pos + cat_marker.size();
    const auto end = prompt.find(')', start);
    if (end != std::string_view::npos) view.category = lower(std::string(prompt.substr(start, end - start)));
  }

  std::istringstream is{std::string(prompt)};
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line.front() == '#') {
      auto words = split_words(std::string_view(line).substr(1));
      if (!words.empty()) view.docs.push_back(std::move(words));
    } else if (line.rfind("Topic ", 0) == 0 && line.size() > 6 && std::isdigit(static_cast<unsigned char>(line[6]))) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto words = split_words(std::string_view(line).substr(colon + 1));
        if (!words.empty()) view.prior_topics.push_back(std::move(words));
      }
    }
  }
  return view;
}

}  // namespace

std::string heuristic_topic_reply(std::string_view prompt) {
  PromptView view = read_prompt(prompt);
  const std::size_t k = std::max<std::size_t>(view.k, 1);
  const std::size_t t = std::max<std::size_t>(view.t, 1);

  std::vector<std::vector<std::string>> topics;
  const bool prior_fits = view.prior_topics.size() == k &&
                          std::all_of(view.prior_topics.begin(), view.prior_topics.end(),
                                      [&](const auto& topic) { return topic.size() == t; });
  if (prior_fits) {
    // Sequential prompts ask to keep the previous topics; this stand-in does exactly that.
    topics = view.prior_topics;
  } else {
    auto docs = view.docs;
    if (view.category) {
      std::vector<std::vector<std::string>> focused;
      for (const auto& d : docs) {
        if (std::find(d.begin(), d.end(), *view.category) != d.end()) focused.push_back(d);
      }
      if (!focused.empty()) docs = std::move(focused);
    }

    std::map<std::string, std::size_t> freq;
    std::vector<std::set<std::string>> doc_sets;
    for (const auto& d : docs) {
      for (const auto& w : d) ++freq[w];
      doc_sets.emplace_back(d.begin(), d.end());
    }
    // tf-idf keeps words that occur in nearly every document from seeding
    // topics. Document frequencies come from the whole prompt, so a category
    // focus favors words specific to the focused documents.
    std::map<std::string, std::size_t> df_all;
    for (const auto& d : view.docs) {
      for (const auto& w : std::set<std::string>(d.begin(), d.end())) ++df_all[w];
    }
    const double n_all = static_cast<double>(view.docs.size());
    std::map<std::string, double> weight;
    for (const auto& [w, c] : freq) {
      weight[w] = static_cast<double>(c) * std::log((n_all + 1.0) / static_cast<double>(df_all[w]));
    }
    std::vector<std::string> ranked;
    for (const auto& [w, c] : freq) ranked.push_back(w);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const auto& a, const auto& b) { return weight[a] > weight[b]; });

    // Largest fraction of the documents holding `w` shared with any one earlier seed.
    std::vector<std::string> seeds;
    auto overlap = [&](const std::string& w) {
      std::size_t with = 0;
      std::vector<std::size_t> shared(seeds.size(), 0);
      for (const auto& s : doc_sets) {
        if (!s.count(w)) continue;
        ++with;
        for (std::size_t i = 0; i < seeds.size(); ++i) shared[i] += s.count(seeds[i]);
      }
      const std::size_t most = shared.empty() ? 0 : *std::max_element(shared.begin(), shared.end());
      return with == 0 ? 0.0 : static_cast<double>(most) / static_cast<double>(with);
    };

    std::set<std::string> used;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::string> topic;
      auto seed_it = ranked.end();
      double best = -1.0;
      std::size_t inspected = 0;
      for (auto it = ranked.begin(); it != ranked.end() && inspected < 64; ++it) {
        if (used.count(*it)) continue;
        ++inspected;
        const double score = weight[*it] * (1.0 - overlap(*it));
        if (score > best) {
          best = score;
          seed_it = it;
        }
      }
      if (seed_it == ranked.end()) {
        if (ranked.empty()) {
          for (std::size_t j = 0; j < t; ++j) topic.push_back("topic" + std::to_string(i + 1) + "word" + std::to_string(j + 1));
          topics.push_back(std::move(topic));
          continue;
        }
        seed_it = ranked.begin() + static_cast<std::ptrdiff_t>(i % ranked.size());
      }
      const std::string seed = *seed_it;
      seeds.push_back(seed);
      topic.push_back(seed);
      used.insert(seed);

      std::map<std::string, std::size_t> cooc;
      for (const auto& s : doc_sets) {
        if (!s.count(seed)) continue;
        for (const auto& w : s) {
          if (w != seed) ++cooc[w];
        }
      }
      std::vector<std::string> partners;
      for (const auto& [w, c] : cooc) partners.push_back(w);
      std::stable_sort(partners.begin(), partners.end(), [&](const auto& a, const auto& b) {
        const double sa = static_cast<double>(cooc[a]) * weight[a] / static_cast<double>(freq[a]);
        const double sb = static_cast<double>(cooc[b]) * weight[b] / static_cast<double>(freq[b]);
        if (sa != sb) return sa > sb;
        return weight[a] > weight[b];
      });
      auto take = [&](const std::vector<std::string>& pool, bool allow_used) {
        for (const auto& w : pool) {
          if (topic.size() == t) return;
          if (std::find(topic.begin(), topic.end(), w) != topic.end()) continue;
          if (!allow_used && used.count(w)) continue;
          topic.push_back(w);
          used.insert(w);
        }
      };
      take(partners, false);
      take(ranked, false);
      take(ranked, true);
      for (std::size_t j = topic.size(); j < t; ++j) topic.push_back(seed + std::to_string(j));
      topics.push_back(std::move(topic));
    }
  }

  std::string reply;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    reply += "Topic " + std::to_string(i + 1) + ":";
    for (const auto& w : topics[i]) reply += " " + w;
    reply += "\n";
  }
  return reply;
}

MockScript MockScript::parse(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::ConfigError, "mock script is not a JSON object");
  }
  MockScript script;
  try {
    for (const auto& r : j.value("rules", json::array())) {
      MockRule rule;
      rule.contains = r.value("contains", "");
      rule.reply = r.value("reply", "");
      const auto finish = r.value("finish", "complete");
      rule.finish = finish == "truncated" ? FinishReason::truncated : FinishReason::complete;
      if (r.contains("fail_with")) rule.fail_with = error_kind_from_string(r["fail_with"].get<std::string>());
      rule.transient_failures = r.value("transient_failures", std::size_t{0});
      script.rules.push_back(std::move(rule));
    }
    const auto fallback = j.value("fallback", "heuristic");
    if (fallback == "heuristic") script.fallback = MockFallback::heuristic;
    else if (fallback == "fail") script.fallback = MockFallback::fail;
    else throw Error(ErrorKind::ConfigError, "unknown mock fallback '" + fallback + "'");
    script.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad mock script: ") + e.what());
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open mock script " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

MockBackend::MockBackend(MockScript script)
    : script_(std::move(script)), transient_seen_(script_.rules.size(), 0) {}

std::vector<std::string> MockBackend::seen_prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

ChatResponse MockBackend::send(const ChatRequest& request) {
  ++calls_;
  const std::size_t now = ++in_flight_;
  for (std::size_t peak = peak_in_flight_.load(); now > peak && !peak_in_flight_.compare_exchange_weak(peak, now);) {
  }
  struct Leave {
    std::atomic<std::size_t>& n;
    ~Leave() { --n; }
  } leave{in_flight_};

  {
    std::lock_guard lock(mutex_);
    prompts_.push_back(request.user_message);
  }
  if (script_.latency.count() > 0) std::this_thread::sleep_for(script_.latency);

  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const auto& rule = script_.rules[i];
    if (!rule.contains.empty() && request.user_message.find(rule.contains) == std::string::npos) continue;
    if (rule.transient_failures > 0) {
      std::lock_guard lock(mutex_);
      if (transient_seen_[i] < rule.transient_failures) {
        ++transient_seen_[i];
        throw TransientError(ErrorKind::RateLimited, "scripted transient failure");
      }
    }
    if (rule.fail_with) {
      throw Error(*rule.fail_with, "scripted failure");
    }
    ChatResponse response;
    response.text = rule.reply;
    response.finish_reason = rule.finish;
    response.usage = {request.user_message.size() / 4, rule.reply.size() / 4};
    return response;
  }

  if (script_.fallback == MockFallback::fail) {
    throw Error(ErrorKind::BackendRejected, "mock script has no rule for this request");
  }
  ChatResponse response;
  response.text = heuristic_topic_reply(request.user_message);
  response.usage = {request.user_message.size() / 4, response.text.size() / 4};
  return response;
}

}  // namespace topicllm
