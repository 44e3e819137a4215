// csd: run one experiment configuration and write its artifacts.
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
// failure, 4 I/O failure.

#include <CLI11.hpp>

#include <iostream>

#include "config.hpp"
#include "csd/errors.hpp"
#include "runner.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalid = 2, kNumerical = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charge-state depletion microscopy simulator"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
  app.add_option("--config", config_path, "Experiment configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "Seed for shot-noise sampling (overrides the config)");
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "Only report errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    auto config = csd::tools::load_config(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    csd::tools::RunOptions options;
    options.output_dir = out_dir.empty() ? config.output_dir : std::filesystem::path(out_dir);
    options.log = quiet ? nullptr : &std::cout;
    csd::tools::run_experiment(config, options);
    return kOk;
  } catch (const csd::tools::ConfigError& e) {
    std::cerr << "csd: " << e.what() << '\n';
    return kInvalid;
  } catch (const csd::DomainError& e) {
    std::cerr << "csd: invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const csd::NumericalError& e) {
    std::cerr << "csd: numerical failure: " << e.what() << " (best residual "
              << e.best_residual() << ")\n";
    return kNumerical;
  } catch (const csd::tools::IoError& e) {
    std::cerr << "csd: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "csd: " << e.what() << '\n';
    return kIo;
  }
}
