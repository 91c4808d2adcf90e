#include "calwave/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calwave/error.hpp"

namespace calwave {

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void ReportRecord::metric(const std::string& name, double value) {
  if (!std::isfinite(value))
    throw Error(ErrorKind::divergence, experiment + ": metric " + name + " is not finite", name);
  metrics[name] = value;
}

void ReportRecord::require_at_most(const std::string& name, double bound) {
  checks.push_back({name, bound, true, metrics.at(name) <= bound});
}

void ReportRecord::require_at_least(const std::string& name, double bound) {
  checks.push_back({name, bound, false, metrics.at(name) >= bound});
}

bool ReportRecord::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw Error(ErrorKind::invalid_configuration, "format must be csv or json", "format");
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const std::vector<ReportRecord>& records) {
  std::set<std::string> params;
  for (const auto& r : records)
    for (const auto& [k, v] : r.parameters) params.insert(k);
  std::ostringstream out;
  out << "experiment";
  for (const auto& p : params) out << ',' << csv_cell("param:" + p);
  out << ",metric,value\n";
  for (const auto& r : records) {
    for (const auto& [m, value] : r.metrics) {
      out << csv_cell(r.experiment);
      for (const auto& p : params) {
        const auto it = r.parameters.find(p);
        out << ',' << (it == r.parameters.end() ? std::string() : csv_cell(it->second));
      }
      out << ',' << csv_cell(m) << ',' << format_number(value) << '\n';
    }
  }
  return out.str();
}

std::string to_json(const std::vector<ReportRecord>& records) {
  // Written by hand so that numbers keep all 17 digits.
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << (i ? ",\n " : "\n ") << "{\"experiment\": " << nlohmann::json(r.experiment).dump();
    for (const auto& [k, v] : r.parameters)
      out << ", " << nlohmann::json("param:" + k).dump() << ": " << nlohmann::json(v).dump();
    for (const auto& [k, v] : r.metrics)
      out << ", " << nlohmann::json("metric:" + k).dump() << ": " << format_number(v);
    out << "}";
  }
  out << (records.empty() ? "]\n" : "\n]\n");
  return out.str();
}

std::vector<ReportRecord> records_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::invalid_configuration, std::string("malformed report: ") + e.what(), "json");
  }
  if (!j.is_array()) throw Error(ErrorKind::invalid_configuration, "report must be an array", "json");
  std::vector<ReportRecord> out;
  for (const auto& obj : j) {
    ReportRecord r;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      if (key == "experiment") r.experiment = it->get<std::string>();
      else if (key.rfind("param:", 0) == 0) r.parameters[key.substr(6)] = it->get<std::string>();
      else if (key.rfind("metric:", 0) == 0) r.metrics[key.substr(7)] = it->get<double>();
      else throw Error(ErrorKind::invalid_configuration, "unexpected report field", key);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void emit_report(const std::vector<ReportRecord>& records, ReportFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path + " for writing", "output.path");
  f << (format == ReportFormat::csv ? to_csv(records) : to_json(records));
  f.close();
  if (!f) throw Error(ErrorKind::io, "failed writing " + path, "output.path");
}

}  // namespace calwave
