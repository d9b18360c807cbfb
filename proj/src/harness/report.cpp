#include "tg/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tg/errors.hpp"

namespace tg::harness {
namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::vector<MetricRow> to_rows(const RunReport& report) {
  std::vector<MetricRow> rows;
  for (const auto& r : report.runs) {
    auto add = [&](std::string metric, double value) { rows.push_back({r.attacker, r.repetition, std::move(metric), value}); };
    add("defender_clean_accuracy", r.defender_clean_accuracy);
    add("argmax_unchanged", r.argmax.after_renormalization);
    add("argmax_unchanged_before_renorm", r.argmax.before_renormalization);
    add("degenerate_gradient_fraction", r.argmax.degenerate_fraction);
    add("seed_baseline_accuracy", r.seed_baseline_accuracy);
    add("substitute_accuracy", r.substitute_accuracy);
    add("blackbox_accuracy_under_transfer", r.blackbox_accuracy_under_transfer);
    add("oracle_queries", static_cast<double>(r.oracle_queries));
    for (std::size_t i = 0; i < r.round_accuracy.size(); ++i) {
      add("round" + std::to_string(i) + "_substitute_accuracy", r.round_accuracy[i]);
    }
    for (std::size_t i = 0; i < r.round_grad_norm.size(); ++i) {
      add("round" + std::to_string(i) + "_mean_grad_norm", r.round_grad_norm[i]);
    }
  }
  return rows;
}

std::string to_csv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.attacker;
    out += "," + std::to_string(r.repetition) + "," + r.metric + "," + format_value(r.value) + "\n";
  }
  return out;
}

std::vector<MetricRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError("report header must be '" + std::string(kCsvHeader) + "'");
  }
  std::vector<MetricRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 4 || f[0].size() != 1 || f[2].empty()) {
      throw FormatError("report line " + std::to_string(lineno) + ": expected attacker,repetition,metric,value");
    }
    MetricRow row{f[0][0], 0, f[2], 0.0};
    try {
      std::size_t used = 0;
      row.repetition = std::stoi(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
      row.value = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
    } catch (const std::logic_error&) {
      throw FormatError("report line " + std::to_string(lineno) + ": bad number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SummaryCell> summarize(const std::vector<MetricRow>& rows) {
  if (rows.empty()) throw EmptyInputError("nothing to summarize");
  std::vector<SummaryCell> cells;
  std::map<std::pair<char, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    auto& v = values[{r.attacker, r.metric}];
    if (v.empty()) cells.push_back({r.attacker, r.metric, 0, 0.0, 0.0});
    v.push_back(r.value);
  }
  for (auto& c : cells) {
    const auto& v = values[{c.attacker, c.metric}];
    c.count = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    c.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - c.mean) * (x - c.mean);
      c.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
  }
  return cells;
}

std::vector<SummaryCell> summarize(const RunReport& report) { return summarize(to_rows(report)); }

std::string summary_table(const std::vector<SummaryCell>& cells) {
  std::vector<char> ids;
  std::vector<std::string> metrics;
  std::map<std::pair<char, std::string>, const SummaryCell*> at;
  for (const auto& c : cells) {
    if (std::find(ids.begin(), ids.end(), c.attacker) == ids.end()) ids.push_back(c.attacker);
    if (std::find(metrics.begin(), metrics.end(), c.metric) == metrics.end()) metrics.push_back(c.metric);
    at[{c.attacker, c.metric}] = &c;
  }

  std::ostringstream out;
  char buf[64];
  for (const auto& m : metrics) {
    out << m << "\n";
    out << "ID  mean (sd)          n\n";
    for (char id : ids) {
      const auto it = at.find({id, m});
      if (it == at.end()) continue;
      const auto& c = *it->second;
      std::snprintf(buf, sizeof buf, "%c   %.3f (%.3f)  %zu\n", id, c.mean, c.stddev, c.count);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

void emit(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto rows = to_rows(report);
  write_file(dir / "report.csv", to_csv(rows));
  write_file(dir / "summary.txt", summary_table(summarize(rows)));
}

}  // namespace tg::harness
