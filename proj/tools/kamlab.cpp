// kamlab: experiment driver. Exit status 0 iff every assertion of the
// command passed, 1 on a failed assertion or library error, 2 on bad usage.

#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "lab/commands.hpp"

using namespace kamlab::lab;

namespace {

int default_workers() {
  if (const char* env = std::getenv("KAMLAB_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring KAMLAB_WORKERS=" << env << "\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kamlab: counterterm KAM experiments for the truncated NLS"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config (JSON); defaults when omitted")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override run.seed");
  app.add_option("--workers", workers, "worker threads (falls back to KAMLAB_WORKERS)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "override output.dir");
  app.add_flag("--verbose", verbose, "progress on stderr");
  app.require_subcommand(1);
  for (const auto& name : command_names()) app.add_subcommand(name)->fallthrough();
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out_dir = *out;
    resolve(cfg);
  } catch (const ConfigError& e) {
    std::cerr << dump_json({{"error", {{"type", "ConfigError"}, {"field", e.field()}, {"message", e.what()}}}});
    return 2;
  }
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

  const RunOptions opt{workers.value_or(default_workers()), verbose};
  const Report rep = run_command(command, cfg, opt);
  try {
    for (const auto& p : emit_report(rep, cfg.out_dir)) {
      if (verbose) std::cerr << "wrote " << p.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& a : rep.assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : "  (" + a.detail + ")") << "\n";
  }
  if (rep.error) std::cout << "ERROR " << rep.error->at("type").get<std::string>() << ": " << rep.error->at("message").get<std::string>() << "\n";
  std::cout << command << ": " << (rep.ok() ? "ok" : "failed") << "\n";
  return rep.ok() ? 0 : 1;
}
