#pragma once

#include <string>
#include <vector>

#include "calwave/config.hpp"
#include "calwave/report.hpp"

namespace calwave {

struct ExperimentInfo {
  std::string name;
  std::string summary;
  /// Metric followed by convergence_study; empty when not refinable.
  std::string residual;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);

struct RunOptions {
  bool record_wall_time = false;
};

/// Runs the configured experiment. Output is a deterministic function of
/// the config (wall time only when requested). Errors are rethrown with the
/// experiment name prefixed.
std::vector<ReportRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs `refinements` levels, each doubling grid.n and halving time.dt and
/// log(heat.rho), and fits the order of the experiment's residual. The last
/// record carries parameter "order", either a number or "exact" when every
/// level's residual is below 1e-11.
std::vector<ReportRecord> convergence_study(const ExperimentConfig& config, int refinements,
                                            const RunOptions& options = {});

/// Least-squares slope of -log2(residual) against level.
double fitted_order(const std::vector<double>& residuals);

}  // namespace calwave
