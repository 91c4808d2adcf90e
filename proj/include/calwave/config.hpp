#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace calwave {

/// One experiment run. Fields not given in the text take the defaults of
/// the selected experiment (see default_config).
struct ExperimentConfig {
  std::string experiment = "soliton-energy";
  int d = 2;
  double r_max = 40.0;
  int n = 8000;
  double dt = 0.0;  ///< 0 selects the stability limit
  double T = 0.0;
  double lambda = 0.70710678118654757;
  std::string family = "P";
  double amplitude = 0.0;
  double s_max = 12.0;
  double rho = 1.189207115002721;
  std::string scheme = "rk4";
  std::string field = "cosh";
  std::uint64_t seed = 1;
  std::string output;

  double h() const { return r_max / n; }
};

ExperimentConfig default_config(const std::string& experiment);

/// Accepts `key = value` lines (with `#` comments) or a JSON object, nested
/// objects standing for dotted namespaces. Keys may be written dotted
/// (`grid.n`) or short (`n`). Later assignments win. Throws an
/// invalid_configuration error carrying the offending key.
ExperimentConfig parse_config(const std::string& text);

/// Canonical `key = value` text with every field spelled out.
std::string serialize_config(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

/// Canonical dotted names in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace calwave
