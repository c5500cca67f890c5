// Command line front end: runs seeded experiments from a key=value config
// file and writes the per-iteration diagnostics as CSV.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hees/hees.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw hees::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            unsigned parallel, const std::string& aggregate) {
  hees::ExperimentConfig cfg;
  try {
    cfg = hees::parse_config(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::string out = !out_override.empty() ? out_override : cfg.output;
  try {
    const std::vector<hees::RunTrace> traces = hees::run_experiment(cfg, parallel);
    if (out.empty()) {
      if (aggregate == "median")
        hees::emit_csv_median(traces, std::cout);
      else
        hees::emit_csv(traces, std::cout);
    } else {
      if (aggregate == "median")
        hees::emit_csv_median(traces, out);
      else
        hees::emit_csv(traces, out);
    }
    for (const hees::RunTrace& tr : traces) {
      if (!tr.error.empty()) {
        std::cerr << "run error (seed " << tr.seed << "): " << tr.error << "\n";
        return kExitRuntimeError;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  try {
    const hees::ExperimentConfig cfg = hees::parse_config(read_file(config_path));
    std::cout << "ok: " << cfg.seeds.size() << " seed(s), budget " << cfg.budget
              << ", d=" << cfg.problem.d << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hessian Estimation Evolution Strategy benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, aggregate;
  unsigned parallel = 1;

  CLI::App* run = app.add_subcommand("run", "run every seed of a config and emit CSV");
  run->add_option("config", config_path, "config file (key=value lines)")->required();
  run->add_option("--out", out_path, "output CSV path (default: 'out' key or stdout)");
  run->add_option("--parallel", parallel, "number of worker threads")->default_val(1u);
  run->add_option("--aggregate", aggregate, "emit per-iteration medians instead of runs")
      ->check(CLI::IsMember({"median"}));

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", config_path, "config file")->required();

  CLI::App* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfigError;
  }

  if (version->parsed()) {
    std::cout << "hees " << hees::kVersion << "\n";
    return 0;
  }
  if (validate->parsed()) return cmd_validate(config_path);
  return cmd_run(config_path, out_path, parallel, aggregate);
}
