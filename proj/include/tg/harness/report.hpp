#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tg/harness/runner.hpp"

namespace tg::harness {

/// Header of report.csv. Each following line is one metric of one
/// (attacker, repetition) pair; values are printed with 17 significant digits.
inline constexpr const char* kCsvHeader = "attacker,repetition,metric,value";

struct MetricRow {
  char attacker = '?';
  int repetition = 0;
  std::string metric;
  double value = 0.0;
  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Long-format rows: metrics in a fixed order, attackers in run order.
std::vector<MetricRow> to_rows(const RunReport& report);

std::string to_csv(const std::vector<MetricRow>& rows);
/// Throws FormatError on a wrong header or malformed line.
std::vector<MetricRow> parse_csv(const std::string& text);

struct SummaryCell {
  char attacker = '?';
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for a single repetition
};

/// Mean and standard deviation per (attacker, metric), first-appearance order.
/// Throws EmptyInputError when there are no rows.
std::vector<SummaryCell> summarize(const std::vector<MetricRow>& rows);
std::vector<SummaryCell> summarize(const RunReport& report);

/// Text table: one line per attacker id, one "mean (sd)" column per metric,
/// three decimals.
std::string summary_table(const std::vector<SummaryCell>& cells);

/// Writes report.csv and summary.txt into `dir` (created if missing).
void emit(const RunReport& report, const std::filesystem::path& dir);

}  // namespace tg::harness
