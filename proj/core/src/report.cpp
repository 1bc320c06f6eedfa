#include "topicllm/report.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <tuple>

#include "topicllm/error.hpp"

namespace topicllm {

std::string_view to_string(RowKind kind) noexcept {
  return kind == RowKind::run ? "run" : "before_merge";
}

namespace {

using GroupKey = std::tuple<std::string, std::string, std::string, std::string, std::size_t, RowKind>;

GroupKey key_of(const ReportRow& r) { return {r.dataset, r.model, r.mode, r.category, r.k, r.kind}; }

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string md_cell(std::string s) {
  for (std::size_t pos = 0; (pos = s.find('|', pos)) != std::string::npos; pos += 2) s.replace(pos, 1, "\\|");
  for (auto& c : s) {
    if (c == '\n') c = ' ';
  }
  return s;
}

std::vector<std::string> categories_of(const EvalReport& report) {
  std::set<std::string> cats;
  for (const auto& r : report.rows) {
    for (const auto& [cat, v] : r.values.dc_by_category) cats.insert(cat);
  }
  return {cats.begin(), cats.end()};
}

std::vector<std::string> datasets_of(const EvalReport& report) {
  std::vector<std::string> out;
  for (const auto& r : report.rows) {
    if (std::find(out.begin(), out.end(), r.dataset) == out.end()) out.push_back(r.dataset);
  }
  return out;
}

enum Metric { kCv, kTu, kDc, kFa };
constexpr const char* kMetricNames[] = {"cv", "tu", "dc", "fa"};

double metric(const MetricValues& v, int m) {
  switch (m) {
    case kCv: return v.cv;
    case kTu: return v.tu;
    case kDc: return v.dc;
    default: return v.fa;
  }
}

// best[i][m]: aggregate i has the highest mean of metric m among run-kind
// aggregates sharing its dataset and k.
std::vector<std::array<bool, 4>> best_flags(const std::vector<AggregateRow>& aggs) {
  std::vector<std::array<bool, 4>> best(aggs.size(), {false, false, false, false});
  for (std::size_t i = 0; i < aggs.size(); ++i) {
    const auto& a = aggs[i];
    if (a.kind != RowKind::run || !a.summary) continue;
    for (int m = 0; m < 4; ++m) {
      bool top = true;
      for (const auto& b : aggs) {
        if (b.kind != RowKind::run || !b.summary || b.dataset != a.dataset || b.k != a.k) continue;
        if (metric(b.summary->mean, m) > metric(a.summary->mean, m)) top = false;
      }
      best[i][m] = top;
    }
  }
  return best;
}

void provenance_lines(std::ostream& out, const Provenance& p, const char* prefix) {
  std::string models;
  for (const auto& m : p.model_ids) models += (models.empty() ? "" : ";") + m;
  out << prefix << "tool_version: " << p.tool_version << '\n'
      << prefix << "template_version: " << p.template_version << '\n'
      << prefix << "backend: " << p.backend_kind << '\n'
      << prefix << "model_ids: " << models << '\n'
      << prefix << "temperature: " << full(p.temperature) << '\n'
      << prefix << "max_output_tokens: " << p.max_output_tokens << '\n'
      << prefix << "max_attempts: " << p.max_attempts << '\n'
      << prefix << "window_size: " << p.window_size << '\n'
      << prefix << "epsilon: " << full(p.epsilon) << '\n'
      << prefix << "cv_reference: " << p.cv_reference << '\n'
      << prefix << "fa_mode: " << p.fa_mode << '\n'
      << prefix << "timestamp: " << p.timestamp << '\n';
}

}  // namespace

std::vector<AggregateRow> EvalReport::aggregates() const {
  std::vector<AggregateRow> out;
  std::vector<GroupKey> keys;
  std::vector<std::vector<const ReportRow*>> members;
  for (const auto& r : rows) {
    const auto key = key_of(r);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      members.emplace_back();
      it = keys.end() - 1;
    }
    members[static_cast<std::size_t>(it - keys.begin())].push_back(&r);
  }

  for (std::size_t g = 0; g < keys.size(); ++g) {
    AggregateRow a;
    std::tie(a.dataset, a.model, a.mode, a.category, a.k, a.kind) = keys[g];
    std::vector<const MetricValues*> done;
    for (const auto* r : members[g]) {
      if (r->completed) {
        done.push_back(&r->values);
      } else {
        ++a.failed;
      }
    }
    a.completed = done.size();
    if (!done.empty() && (a.failed == 0 || allow_partial)) {
      const double n = static_cast<double>(done.size());
      MetricSummary s;
      for (const auto* v : done) {
        s.mean.cv += v->cv;
        s.mean.tu += v->tu;
        s.mean.dc += v->dc;
        s.mean.fa += v->fa;
        for (const auto& [cat, dc] : v->dc_by_category) s.mean.dc_by_category[cat] += dc;
      }
      s.mean.cv /= n;
      s.mean.tu /= n;
      s.mean.dc /= n;
      s.mean.fa /= n;
      for (auto& [cat, dc] : s.mean.dc_by_category) dc /= n;

      if (done.size() > 1) {
        auto sq = [](double x) { return x * x; };
        for (const auto* v : done) {
          s.stddev.cv += sq(v->cv - s.mean.cv);
          s.stddev.tu += sq(v->tu - s.mean.tu);
          s.stddev.dc += sq(v->dc - s.mean.dc);
          s.stddev.fa += sq(v->fa - s.mean.fa);
          for (const auto& [cat, mean] : s.mean.dc_by_category) {
            const auto it = v->dc_by_category.find(cat);
            s.stddev.dc_by_category[cat] += sq((it == v->dc_by_category.end() ? 0.0 : it->second) - mean);
          }
        }
        s.stddev.cv = std::sqrt(s.stddev.cv / (n - 1));
        s.stddev.tu = std::sqrt(s.stddev.tu / (n - 1));
        s.stddev.dc = std::sqrt(s.stddev.dc / (n - 1));
        s.stddev.fa = std::sqrt(s.stddev.fa / (n - 1));
        for (auto& [cat, var] : s.stddev.dc_by_category) var = std::sqrt(var / (n - 1));
      } else {
        for (const auto& [cat, mean] : s.mean.dc_by_category) s.stddev.dc_by_category[cat] = 0.0;
      }
      a.summary = std::move(s);
    }
    out.push_back(std::move(a));
  }
  return out;
}

bool EvalReport::has_failures() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.completed; });
}

void EvalReport::append(const EvalReport& other) {
  if (rows.empty() && provenance.tool_version.empty()) provenance = other.provenance;
  for (const auto& m : other.provenance.model_ids) {
    if (std::find(provenance.model_ids.begin(), provenance.model_ids.end(), m) == provenance.model_ids.end()) {
      provenance.model_ids.push_back(m);
    }
  }
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  allow_partial = allow_partial || other.allow_partial;
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  provenance_lines(out, report.provenance, "# ");
  const auto cats = categories_of(report);
  out << "row_type,dataset,model,mode,category,k,seed,kind,completed,failed,error,cv,tu,dc,fa";
  for (const auto& c : cats) out << ",dc_" << csv_field(c);
  out << ",best\n";

  auto values = [&](const MetricValues& v) {
    std::string s = full(v.cv) + "," + full(v.tu) + "," + full(v.dc) + "," + full(v.fa);
    for (const auto& c : cats) {
      const auto it = v.dc_by_category.find(c);
      s += "," + (it == v.dc_by_category.end() ? std::string() : full(it->second));
    }
    return s;
  };
  const std::string blanks = ",,," + std::string(cats.size(), ',');

  for (const auto& r : report.rows) {
    out << "run," << csv_field(r.dataset) << ',' << csv_field(r.model) << ',' << csv_field(r.mode) << ','
        << csv_field(r.category) << ',' << r.k << ',' << r.seed << ',' << to_string(r.kind) << ','
        << (r.completed ? 1 : 0) << ',' << (r.completed ? 0 : 1) << ',' << csv_field(r.error) << ','
        << (r.completed ? values(r.values) : blanks) << ",\n";
  }

  const auto aggs = report.aggregates();
  const auto best = best_flags(aggs);
  for (std::size_t i = 0; i < aggs.size(); ++i) {
    const auto& a = aggs[i];
    std::string flags;
    for (int m = 0; m < 4; ++m) {
      if (best[i][m]) flags += (flags.empty() ? "" : ";") + std::string(kMetricNames[m]);
    }
    for (const char* type : {"mean", "stddev"}) {
      out << type << ',' << csv_field(a.dataset) << ',' << csv_field(a.model) << ',' << csv_field(a.mode) << ','
          << csv_field(a.category) << ',' << a.k << ",," << to_string(a.kind) << ',' << a.completed << ','
          << a.failed << ",,";
      if (a.summary) {
        out << values(std::string_view(type) == "mean" ? a.summary->mean : a.summary->stddev);
      } else {
        out << blanks;
      }
      out << ',' << (std::string_view(type) == "mean" ? flags : "") << '\n';
    }
  }
  return out.str();
}

std::string render_markdown(const EvalReport& report) {
  std::ostringstream out;
  out << "<!--\n";
  provenance_lines(out, report.provenance, "");
  out << "-->\n\n";
  out << "# Topic model evaluation\n\n";
  provenance_lines(out, report.provenance, "- ");

  const auto aggs = report.aggregates();
  const auto best = best_flags(aggs);
  const auto cats = categories_of(report);

  auto cell = [](const std::optional<MetricSummary>& s, int m, bool bold) -> std::string {
    if (!s) return "n/a";
    std::string v = fixed3(metric(s->mean, m)) + " ± " + fixed3(metric(s->stddev, m));
    return bold ? "**" + v + "**" : v;
  };

  for (const auto& dataset : datasets_of(report)) {
    out << "\n## " << md_cell(dataset) << "\n\n";
    out << "| Model | Mode | Category | K | Runs | Failed | Cv | TU | DC | Fa |\n"
        << "|---|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (std::size_t i = 0; i < aggs.size(); ++i) {
      const auto& a = aggs[i];
      if (a.dataset != dataset || a.kind != RowKind::run) continue;
      out << "| " << md_cell(a.model) << " | " << md_cell(a.mode) << " | " << md_cell(a.category) << " | " << a.k
          << " | " << a.completed << " | " << a.failed;
      for (int m = 0; m < 4; ++m) out << " | " << cell(a.summary, m, best[i][m]);
      out << " |\n";
    }

    const bool any_before = std::any_of(aggs.begin(), aggs.end(), [&](const AggregateRow& a) {
      return a.dataset == dataset && a.kind == RowKind::before_merge;
    });
    if (any_before) {
      out << "\n### Before merge\n\n"
          << "| Model | Mode | K | Runs | Cv | TU | DC | Fa |\n"
          << "|---|---|---:|---:|---:|---:|---:|---:|\n";
      for (const auto& a : aggs) {
        if (a.dataset != dataset || a.kind != RowKind::before_merge) continue;
        out << "| " << md_cell(a.model) << " | " << md_cell(a.mode) << " | " << a.k << " | " << a.completed;
        for (int m = 0; m < 4; ++m) out << " | " << cell(a.summary, m, false);
        out << " |\n";
      }
    }

    if (!cats.empty()) {
      out << "\n### DC by category\n\n| Model | Mode | Category | K";
      for (const auto& c : cats) out << " | DC_" << md_cell(c);
      out << " |\n|---|---|---|---:";
      for (std::size_t i = 0; i < cats.size(); ++i) out << "|---:";
      out << "|\n";
      for (const auto& a : aggs) {
        if (a.dataset != dataset || a.kind != RowKind::run) continue;
        out << "| " << md_cell(a.model) << " | " << md_cell(a.mode) << " | " << md_cell(a.category) << " | " << a.k;
        for (const auto& c : cats) {
          const bool has = a.summary && a.summary->mean.dc_by_category.count(c);
          out << " | " << (has ? fixed3(a.summary->mean.dc_by_category.at(c)) : std::string("-"));
        }
        out << " |\n";
      }
      out << "\n### Factuality\n\n| Model | Mode | Category | K | Fa |\n|---|---|---|---:|---:|\n";
      for (const auto& a : aggs) {
        if (a.dataset != dataset || a.kind != RowKind::run) continue;
        out << "| " << md_cell(a.model) << " | " << md_cell(a.mode) << " | " << md_cell(a.category) << " | " << a.k
            << " | " << (a.summary ? fixed3(a.summary->mean.fa) : std::string("n/a")) << " |\n";
      }
    }

    out << "\n### Runs\n\n| Model | Mode | Category | K | Seed | Kind | Cv | TU | DC | Fa | Error |\n"
        << "|---|---|---|---:|---:|---|---:|---:|---:|---:|---|\n";
    for (const auto& r : report.rows) {
      if (r.dataset != dataset) continue;
      out << "| " << md_cell(r.model) << " | " << md_cell(r.mode) << " | " << md_cell(r.category) << " | " << r.k
          << " | " << r.seed << " | " << to_string(r.kind);
      for (int m = 0; m < 4; ++m) out << " | " << (r.completed ? fixed3(metric(r.values, m)) : std::string("-"));
      out << " | " << md_cell(r.error) << " |\n";
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_tables(const EvalReport& report, const std::set<TableFormat>& formats,
                                               const std::filesystem::path& out_dir) {
  require(!report.rows.empty(), "emit_tables: report has no rows");
  require(!formats.empty(), "emit_tables: no output format requested");
  const auto& p = report.provenance;
  if (p.model_ids.empty() ||
      std::any_of(p.model_ids.begin(), p.model_ids.end(), [](const std::string& m) { return m.empty(); })) {
    throw Error(ErrorKind::ReportInvalid, "report provenance lacks a model id");
  }
  if (p.backend_kind.empty()) throw Error(ErrorKind::ReportInvalid, "report provenance lacks a backend");

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << body;
    written.push_back(path);
  };
  if (formats.count(TableFormat::csv)) write(out_dir / "report.csv", render_csv(report));
  if (formats.count(TableFormat::markdown)) write(out_dir / "report.md", render_markdown(report));
  return written;
}

std::string report_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace topicllm
