#pragma once

#include <map>
#include <string>
#include <vector>

namespace calwave {

struct ThresholdCheck {
  std::string metric;
  double bound = 0.0;
  bool upper = true;  ///< metric <= bound when true, metric >= bound otherwise
  bool passed = true;
};

struct ReportRecord {
  std::string experiment;
  /// Run parameters as printed strings, plus grid/ladder provenance and the
  /// build commit.
  std::map<std::string, std::string> parameters;
  std::map<std::string, double> metrics;
  std::vector<ThresholdCheck> checks;

  /// Throws a divergence error for non-finite values.
  void metric(const std::string& name, double value);
  void require_at_most(const std::string& name, double bound);
  void require_at_least(const std::string& name, double bound);
  bool passed() const;
};

enum class ReportFormat { csv, json };

ReportFormat parse_format(const std::string& name);

/// %.17g, the round-trip representation used by every writer.
std::string format_number(double x);

/// Long format: header `experiment,param:<p>...,metric,value`, one row per
/// metric; the parameter columns are the sorted union over all records.
std::string to_csv(const std::vector<ReportRecord>& records);
/// Array of flat objects with "experiment", "param:<p>" and "metric:<m>" keys.
std::string to_json(const std::vector<ReportRecord>& records);
std::vector<ReportRecord> records_from_json(const std::string& text);

/// Writes the records to `path`; throws an io error when it cannot.
void emit_report(const std::vector<ReportRecord>& records, ReportFormat format, const std::string& path);

}  // namespace calwave
