#include "calwave/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calwave/error.hpp"

namespace calwave {

namespace {

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> table = {
      {"experiment", "experiment"}, {"d", "grid.d"},
      {"r_max", "grid.r_max"},      {"n", "grid.n"},
      {"dt", "time.dt"},            {"T", "time.T"},
      {"lambda", "soliton.lambda"}, {"family", "soliton.family"},
      {"amplitude", "data.amplitude"}, {"field", "data.field"},
      {"s_max", "heat.s_max"},      {"rho", "heat.rho"},
      {"scheme", "heat.scheme"},    {"seed", "run.seed"},
      {"output", "output.path"},
  };
  return table;
}

std::string canonical_key(const std::string& key) {
  for (const auto& [short_name, dotted] : aliases())
    if (key == short_name || key == dotted) return dotted;
  throw Error(ErrorKind::invalid_configuration, "unknown key '" + key + "'", key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw Error(ErrorKind::invalid_configuration, "'" + v + "' is not a finite number", key);
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorKind::invalid_configuration, "'" + v + "' is not an integer", key);
  return x;
}

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Assignments = std::vector<std::pair<std::string, std::string>>;

void flatten(const nlohmann::json& j, const std::string& prefix, Assignments& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else if (it->is_string()) {
      out.emplace_back(key, it->get<std::string>());
    } else if (it->is_number_integer() || it->is_number_unsigned()) {
      out.emplace_back(key, it->dump());
    } else if (it->is_number()) {
      out.emplace_back(key, number(it->get<double>()));
    } else {
      throw Error(ErrorKind::invalid_configuration, "unsupported value type", key);
    }
  }
}

Assignments read_assignments(const std::string& text) {
  Assignments out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::invalid_configuration, std::string("malformed JSON: ") + e.what(), "json");
    }
    flatten(j, "", out);
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::invalid_configuration,
                  "line " + std::to_string(lineno) + " is not of the form key = value", line);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error(ErrorKind::invalid_configuration, "line " + std::to_string(lineno) + " has no key", line);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

void assign(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "experiment") c.experiment = v;
  else if (key == "grid.d") c.d = static_cast<int>(to_integer(key, v));
  else if (key == "grid.r_max") c.r_max = to_double(key, v);
  else if (key == "grid.n") c.n = static_cast<int>(to_integer(key, v));
  else if (key == "time.dt") c.dt = to_double(key, v);
  else if (key == "time.T") c.T = to_double(key, v);
  else if (key == "soliton.lambda") c.lambda = to_double(key, v);
  else if (key == "soliton.family") c.family = v;
  else if (key == "data.amplitude") c.amplitude = to_double(key, v);
  else if (key == "data.field") c.field = v;
  else if (key == "heat.s_max") c.s_max = to_double(key, v);
  else if (key == "heat.rho") c.rho = to_double(key, v);
  else if (key == "heat.scheme") c.scheme = v;
  else if (key == "run.seed") {
    const long long s = to_integer(key, v);
    if (s < 0) throw Error(ErrorKind::invalid_configuration, "seed must be nonnegative", key);
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "output.path") c.output = v;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_configuration, key + " " + what, key);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment",     "grid.d",         "grid.r_max", "grid.n",      "time.dt",
      "time.T",         "soliton.lambda", "soliton.family", "data.amplitude", "data.field",
      "heat.s_max",     "heat.rho",       "heat.scheme", "run.seed",    "output.path"};
  return keys;
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "soliton-energy") {
    // Field defaults above.
  } else if (experiment == "soliton-stability") {
    c.r_max = 20.0;
    c.n = 4000;
    c.T = 10.0;
    c.lambda = 0.5;
  } else if (experiment == "heat-smoothing") {
    c.d = 4;
    c.r_max = 8.0;
    c.n = 80;
    c.amplitude = 0.004;
  } else if (experiment == "caloric-gauge-residuals") {
    c.d = 4;
    c.r_max = 8.0;
    c.n = 160;
    c.amplitude = 0.004;
    c.rho = 1.0905077326652577;  // 2^(1/8)
  } else if (experiment == "dispersive-decay") {
    c.d = 3;
    c.r_max = 60.0;
    c.n = 6000;
    c.T = 50.0;
    c.amplitude = 1.0;
  } else if (experiment == "strichartz-sweep") {
    c.d = 4;
    c.r_max = 18.0;
    c.n = 900;
    c.T = 10.0;
    c.amplitude = 1.0;
  } else if (experiment == "lp-reconstruction") {
    c.d = 4;
    c.r_max = 8.0;
    c.n = 160;
    c.amplitude = 1.0;
    c.rho = 1.0905077326652577;
  } else if (experiment == "poincare-gap") {
    c.d = 4;
    c.r_max = 90.0;
    c.n = 9000;
  } else if (experiment == "laplacian-accuracy") {
    c.d = 4;
    c.r_max = 8.0;
    c.n = 80;
  } else {
    throw Error(ErrorKind::invalid_configuration, "unknown experiment '" + experiment + "'", "experiment");
  }
  return c;
}

void validate_config(const ExperimentConfig& c) {
  default_config(c.experiment);
  require(c.d >= 2 && c.d <= 4, "grid.d", "must lie in [2, 4]");
  require(c.r_max > 0.0 && c.r_max <= 200.0, "grid.r_max", "must lie in (0, 200]");
  require(c.n >= 8 && c.n <= 200000, "grid.n", "must lie in [8, 200000]");
  require(c.dt >= 0.0 && c.dt <= 1.0, "time.dt", "must lie in [0, 1]");
  require(c.T >= 0.0 && c.T <= 1000.0, "time.T", "must lie in [0, 1000]");
  require(c.family == "P" || c.family == "Q", "soliton.family", "must be P or Q");
  require(c.lambda >= 0.0 && c.lambda <= 100.0, "soliton.lambda", "must lie in [0, 100]");
  require(c.family != "P" || c.lambda < 1.0, "soliton.lambda", "must be below 1 for family P");
  require(c.amplitude >= 0.0 && c.amplitude <= 10.0, "data.amplitude", "must lie in [0, 10]");
  require(c.field == "cosh" || c.field == "gaussian", "data.field", "must be cosh or gaussian");
  require(c.s_max > 0.0 && c.s_max <= 1000.0, "heat.s_max", "must lie in (0, 1000]");
  require(c.rho > 1.0 && c.rho <= 2.0, "heat.rho", "must lie in (1, 2]");
  require(c.scheme == "rk4" || c.scheme == "imex", "heat.scheme", "must be rk4 or imex");
}

ExperimentConfig parse_config(const std::string& text) {
  Assignments raw = read_assignments(text);
  std::map<std::string, std::string> latest;
  std::vector<std::string> order;
  for (const auto& [key, value] : raw) {
    const std::string k = canonical_key(key);
    if (!latest.count(k)) order.push_back(k);
    latest[k] = value;
  }
  const std::string name = latest.count("experiment") ? latest["experiment"] : "soliton-energy";
  ExperimentConfig c = default_config(name);
  for (const auto& k : order) assign(c, k, latest[k]);
  validate_config(c);
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "experiment = " << c.experiment << '\n'
      << "grid.d = " << c.d << '\n'
      << "grid.r_max = " << number(c.r_max) << '\n'
      << "grid.n = " << c.n << '\n'
      << "time.dt = " << number(c.dt) << '\n'
      << "time.T = " << number(c.T) << '\n'
      << "soliton.lambda = " << number(c.lambda) << '\n'
      << "soliton.family = " << c.family << '\n'
      << "data.amplitude = " << number(c.amplitude) << '\n'
      << "data.field = " << c.field << '\n'
      << "heat.s_max = " << number(c.s_max) << '\n'
      << "heat.rho = " << number(c.rho) << '\n'
      << "heat.scheme = " << c.scheme << '\n'
      << "run.seed = " << c.seed << '\n'
      << "output.path = " << c.output << '\n';
  return out.str();
}

}  // namespace calwave
