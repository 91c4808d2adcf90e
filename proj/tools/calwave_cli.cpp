// calwave: run, sweep and refine the registered experiments.
//
// Exit status: 0 when every threshold holds, 2 when one is violated (the
// metric is named on stderr), 1 on any error.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "calwave/config.hpp"
#include "calwave/error.hpp"
#include "calwave/registry.hpp"
#include "calwave/report.hpp"

namespace {

using namespace calwave;

struct CommonOptions {
  std::string config_path;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> sets;
  bool timing = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "key = value or JSON config file");
  app->add_option("--out", o.out, "report path (default: $CALWAVE_OUT_DIR/<experiment>.<format>, else stdout)");
  app->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--set", o.sets, "override, key=value (repeatable)");
  app->add_flag("--timing", o.timing, "record wall time in the report");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot read " + path, "config");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string config_text(const CommonOptions& o, const std::vector<std::string>& extra = {}) {
  std::string text = o.config_path.empty() ? std::string() : read_file(o.config_path);
  // A JSON document cannot be appended to, so overrides go through its
  // canonical text form.
  if (!text.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos &&
      text[text.find_first_not_of(" \t\r\n")] == '{')
    text = serialize_config(parse_config(text));
  for (const auto& s : o.sets) text += "\n" + s;
  for (const auto& s : extra) text += "\n" + s;
  return text;
}

std::string output_path(const CommonOptions& o, const ExperimentConfig& c, const std::string& stem) {
  if (!o.out.empty()) return o.out;
  if (!c.output.empty()) return c.output;
  if (const char* dir = std::getenv("CALWAVE_OUT_DIR"); dir && *dir)
    return std::string(dir) + "/" + stem + "." + o.format;
  return {};
}

int finish(const std::vector<ReportRecord>& records, const CommonOptions& o, const std::string& path) {
  const ReportFormat fmt = parse_format(o.format);
  if (path.empty()) {
    std::cout << (fmt == ReportFormat::csv ? to_csv(records) : to_json(records));
  } else {
    emit_report(records, fmt, path);
  }
  int status = 0;
  for (const auto& r : records) {
    for (const auto& c : r.checks) {
      if (c.passed) continue;
      std::cerr << "threshold violated: " << r.experiment << " " << c.metric << " = "
                << format_number(r.metrics.at(c.metric)) << (c.upper ? " > " : " < ") << format_number(c.bound)
                << "\n";
      status = 2;
    }
  }
  return status;
}

// "key=v1,v2,v3" -> key and its values.
std::pair<std::string, std::vector<std::string>> split_vary(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::invalid_configuration, "--vary expects key=v1,v2,...", spec);
  std::vector<std::string> values;
  std::stringstream rest(spec.substr(eq + 1));
  std::string v;
  while (std::getline(rest, v, ',')) values.push_back(v);
  if (values.empty()) throw Error(ErrorKind::invalid_configuration, "--vary needs at least one value", spec);
  return {spec.substr(0, eq), values};
}

std::vector<ReportRecord> run_sweep(const std::vector<ExperimentConfig>& configs, int jobs, const RunOptions& opts) {
  std::vector<std::vector<ReportRecord>> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_experiment(configs[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int width = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  for (int t = 0; t < width; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.insert(out.end(), results[i].begin(), results[i].end());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave maps on hyperbolic space: caloric gauge and dispersion experiments"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, conv_opts;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_common(sweep, sweep_opts);
  std::vector<std::string> vary;
  int jobs = 1;
  sweep->add_option("--vary", vary, "key=v1,v2,... (repeatable; the grid is the product)")->required();
  sweep->add_option("--jobs", jobs, "parallel sweep width")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("converge", "refinement study of a refinable experiment");
  add_common(conv, conv_opts);
  int levels = 3;
  conv->add_option("--levels", levels, "number of refinement levels (>= 3)");

  auto* list = app.add_subcommand("list", "list registered experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (list->parsed()) {
      for (const auto& e : experiment_registry())
        std::cout << e.name << (e.residual.empty() ? "" : " [refinable]") << "  " << e.summary << "\n";
      return 0;
    }
    if (run->parsed()) {
      const ExperimentConfig c = parse_config(config_text(run_opts));
      RunOptions ro;
      ro.record_wall_time = run_opts.timing;
      return finish(run_experiment(c, ro), run_opts, output_path(run_opts, c, c.experiment));
    }
    if (sweep->parsed()) {
      std::vector<std::vector<std::string>> grid{{}};
      for (const auto& spec : vary) {
        const auto [key, values] = split_vary(spec);
        std::vector<std::vector<std::string>> next;
        for (const auto& partial : grid)
          for (const auto& v : values) {
            auto p = partial;
            p.push_back(key + "=" + v);
            next.push_back(std::move(p));
          }
        grid = std::move(next);
      }
      std::vector<ExperimentConfig> configs;
      for (const auto& extra : grid) configs.push_back(parse_config(config_text(sweep_opts, extra)));
      RunOptions ro;
      ro.record_wall_time = sweep_opts.timing;
      const auto records = run_sweep(configs, jobs, ro);
      return finish(records, sweep_opts, output_path(sweep_opts, configs.front(), configs.front().experiment + "-sweep"));
    }
    if (conv->parsed()) {
      const ExperimentConfig c = parse_config(config_text(conv_opts));
      RunOptions ro;
      ro.record_wall_time = conv_opts.timing;
      const auto records = convergence_study(c, levels, ro);
      return finish(records, conv_opts, output_path(conv_opts, c, c.experiment + "-converge"));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
