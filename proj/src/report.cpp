#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"
#include "medcal/harness.hpp"

namespace medcal {

namespace {

using nlohmann::ordered_json;

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string percent_label(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g%%", fraction * 100.0);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

ordered_json row_to_json(const EvalRow& r) {
  ordered_json j;
  j["strategy"] = r.strategy;
  j["budget_fraction"] = r.budget_fraction;
  j["M"] = r.m;
  j["seed"] = r.seed;
  j["proxy_accuracy"] = r.proxy_accuracy;
  j["covering_radius"] = r.covering_radius;
  j["mean_min_distance"] = r.mean_min_distance;
  j["class_coverage"] = r.class_coverage;
  j["class_entropy"] = r.class_entropy;
  j["foreground_fraction"] = r.foreground_fraction ? ordered_json(*r.foreground_fraction)
                                                   : ordered_json(nullptr);
  return j;
}

ordered_json aggregate_to_json(const AggregateRow& a) {
  ordered_json j;
  j["strategy"] = a.strategy;
  j["budget_fraction"] = a.budget_fraction;
  j["M"] = a.m;
  j["n_seeds"] = a.n_seeds;
  j["proxy_accuracy"] = a.proxy_accuracy;
  j["covering_radius"] = a.covering_radius;
  j["mean_min_distance"] = a.mean_min_distance;
  j["class_coverage"] = a.class_coverage;
  j["class_entropy"] = a.class_entropy;
  j["foreground_fraction"] = a.foreground_fraction ? ordered_json(*a.foreground_fraction)
                                                   : ordered_json(nullptr);
  return j;
}

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// One strategy x budget table of a per-aggregate value, plus Average.
template <typename ValueFn>
std::string markdown_table(const EvalReport& report, const std::string& title, ValueFn value) {
  std::vector<std::string> strategies;
  std::vector<double> budgets;
  std::map<std::pair<std::string, double>, const AggregateRow*> cells;
  for (const auto& a : report.aggregates) {
    if (std::find(strategies.begin(), strategies.end(), a.strategy) == strategies.end()) {
      strategies.push_back(a.strategy);
    }
    if (std::find(budgets.begin(), budgets.end(), a.budget_fraction) == budgets.end()) {
      budgets.push_back(a.budget_fraction);
    }
    cells[{a.strategy, a.budget_fraction}] = &a;
  }

  std::string out = "### " + title + "\n\n| Strategy |";
  for (double b : budgets) out += " " + percent_label(b) + " |";
  out += " Average |\n|---|";
  for (std::size_t b = 0; b < budgets.size(); ++b) out += "---:|";
  out += "---:|\n";
  for (const auto& s : strategies) {
    out += "| " + s + " |";
    double sum = 0.0;
    std::size_t count = 0;
    for (double b : budgets) {
      auto it = cells.find({s, b});
      if (it == cells.end()) {
        out += " - |";
        continue;
      }
      const double v = value(*it->second);
      sum += v;
      ++count;
      out += " " + fixed(v, 2) + " |";
    }
    out += " " + (count ? fixed(sum / static_cast<double>(count), 2) : std::string("-")) + " |\n";
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string report_to_csv(const EvalReport& report) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : report.rows) {
    out += r.strategy + "," + format_double(r.budget_fraction) + "," + std::to_string(r.m) + "," +
           std::to_string(r.seed) + "," + format_double(r.proxy_accuracy) + "," +
           format_double(r.covering_radius) + "," + format_double(r.mean_min_distance) + "," +
           std::to_string(r.class_coverage) + "," + format_double(r.class_entropy) + "," +
           optional_field(r.foreground_fraction) + "\n";
  }
  for (const auto& a : report.aggregates) {
    out += a.strategy + "," + format_double(a.budget_fraction) + "," + std::to_string(a.m) +
           ",mean," + format_double(a.proxy_accuracy) + "," + format_double(a.covering_radius) +
           "," + format_double(a.mean_min_distance) + "," + format_double(a.class_coverage) + "," +
           format_double(a.class_entropy) + "," + optional_field(a.foreground_fraction) + "\n";
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) j["rows"].push_back(row_to_json(r));
  j["aggregates"] = ordered_json::array();
  for (const auto& a : report.aggregates) j["aggregates"].push_back(aggregate_to_json(a));
  return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  EvalReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.strategy = r.at("strategy").get<std::string>();
      row.budget_fraction = r.at("budget_fraction").get<double>();
      row.m = r.at("M").get<std::size_t>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.proxy_accuracy = r.at("proxy_accuracy").get<double>();
      row.covering_radius = r.at("covering_radius").get<double>();
      row.mean_min_distance = r.at("mean_min_distance").get<double>();
      row.class_coverage = r.at("class_coverage").get<std::size_t>();
      row.class_entropy = r.at("class_entropy").get<double>();
      row.foreground_fraction = optional_from(r, "foreground_fraction");
      report.rows.push_back(std::move(row));
    }
    for (const auto& a : j.at("aggregates")) {
      AggregateRow agg;
      agg.strategy = a.at("strategy").get<std::string>();
      agg.budget_fraction = a.at("budget_fraction").get<double>();
      agg.m = a.at("M").get<std::size_t>();
      agg.n_seeds = a.at("n_seeds").get<std::size_t>();
      agg.proxy_accuracy = a.at("proxy_accuracy").get<double>();
      agg.covering_radius = a.at("covering_radius").get<double>();
      agg.mean_min_distance = a.at("mean_min_distance").get<double>();
      agg.class_coverage = a.at("class_coverage").get<double>();
      agg.class_entropy = a.at("class_entropy").get<double>();
      agg.foreground_fraction = optional_from(a, "foreground_fraction");
      report.aggregates.push_back(std::move(agg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, std::string("invalid report JSON: ") + e.what());
  }
  return report;
}

std::string report_to_markdown(const EvalReport& report) {
  std::size_t seeds = 0;
  for (const auto& a : report.aggregates) seeds = std::max(seeds, a.n_seeds);
  std::string out = markdown_table(
      report, "Proxy accuracy (%), mean over " + std::to_string(seeds) + " seeds",
      [](const AggregateRow& a) { return 100.0 * a.proxy_accuracy; });
  out += "\n";
  out += markdown_table(report, "Covering radius",
                        [](const AggregateRow& a) { return a.covering_radius; });
  out += "\n";
  out += markdown_table(report, "Class coverage",
                        [](const AggregateRow& a) { return a.class_coverage; });
  return out;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return report_to_csv(report);
    case ReportFormat::kJson: return report_to_json(report);
    case ReportFormat::kMarkdown: return report_to_markdown(report);
  }
  return {};
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  if (report.rows.empty()) throw Error(ErrorCode::kInvalidArgument, "report has no rows");
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace medcal
