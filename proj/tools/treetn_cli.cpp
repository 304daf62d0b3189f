#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "treetn/experiment.hpp"
#include "treetn/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitViolation = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree tensor network approximation experiments"};
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed overriding the configuration");
  app.add_option("--threads", threads, "worker threads for grid sweeps")->check(CLI::Range(1, 1024));
  app.set_version_flag("--version", treetn::kLibraryVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  treetn::ExperimentConfig config;
  try {
    std::ifstream is(config_path);
    if (!is) throw treetn::ConfigError("cannot read config file " + config_path);
    std::ostringstream text;
    text << is.rdbuf();
    config = treetn::ExperimentConfig::from_json(text.str());
    if (seed) config.seed = *seed;
  } catch (const treetn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  treetn::set_thread_count(threads);
  try {
    const auto result = treetn::run_experiment(config);
    treetn::write_result(result, config, out_dir);
    std::cout << config.command << ": " << result.rows << " rows, " << result.violations << " bound violations\n";
    if (result.violations > 0) {
      std::cerr << "bound violation detected\n";
      return kExitViolation;
    }
  } catch (const treetn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
