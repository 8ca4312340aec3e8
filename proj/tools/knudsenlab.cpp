#include "knudsenlab/experiments.hpp"
#include "knudsenlab/output.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

using namespace knudsenlab;

namespace {

// Exit codes: 0 pass, 1 failed check, 2 bad config or arguments, 3 numerical failure.
int run(const std::string& subcommand, const std::string& config_path, const std::string& output,
        std::optional<int> threads, std::optional<long long> seed) {
  ExperimentConfig config = load_config(config_path);
  if (to_string(config.experiment.kind) != subcommand)
    throw ConfigError("config experiment.type is " + to_string(config.experiment.kind) + ", subcommand is " +
                      subcommand);
  if (!threads)
    if (const char* env = std::getenv("KNUDSENLAB_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("KNUDSENLAB_THREADS is not an integer: ") + env);
      }
    }
  if (threads) config.runtime.threads = *threads;
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed must be nonnegative");
    config.runtime.seed = static_cast<std::uint64_t>(*seed);
  }
  validate(config);
  std::string dir = output;
  if (dir.empty()) dir = config.experiment.output_dir.empty() ? "out" : config.experiment.output_dir;

  const ExperimentResult result = run_experiment(config, dir);
  for (const auto& c : result.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << format_double(c.value)
              << " threshold=" << format_double(c.threshold) << (c.detail.empty() ? "" : "  (" + c.detail + ")")
              << '\n';
  if (result.numerical_failure) std::cerr << "numerical failure: " << result.error << '\n';
  std::cout << "result: " << (dir + "/result.json") << '\n';
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypocoercive kinetic solver: verification, decay, branch and hydrodynamic-limit experiments"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path, output;
  std::optional<int> threads;
  std::optional<long long> seed;
  for (const char* name : {"verify", "simulate", "decay-sweep", "branches", "hydro-sweep"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
    sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output, "output directory (default: experiment.output_dir, else ./out)");
    sub->add_option("--threads", threads, "worker threads (fallback: KNUDSENLAB_THREADS, then runtime.threads)");
    sub->add_option("--seed", seed, "overrides runtime.seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), config_path, output, threads, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
