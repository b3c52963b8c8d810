#include "nonclip/acceptance.hpp"
#include "nonclip/config.hpp"
#include "nonclip/experiment.hpp"
#include "nonclip/log.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config,--config", args.config, "Experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "Output directory (default: run.output)");
  cmd->add_option("--jobs", args.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "Single seed overriding run.seeds");
}

nonclip::ExperimentConfig resolve(const CommonArgs& args) {
  if (args.config.empty()) throw nonclip::ConfigParseError(0, "", "a config file is required");
  nonclip::ExperimentConfig config = nonclip::load_config(args.config);
  if (args.seed) config.seeds = {*args.seed};
  if (!args.out.empty()) config.output = args.out;
  nonclip::validate_experiment(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clipped steepest-descent / conditional-gradient experiments"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, probe_args;
  auto* run_cmd = app.add_subcommand("run", "One experiment: a trajectory CSV per seed plus summary.csv");
  add_common(run_cmd, run_args);
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over sweep.gammas x sweep.rhos, writes sweep.csv");
  add_common(sweep_cmd, sweep_args);
  auto* probe_cmd = app.add_subcommand("probe", "Smoothness probe along trajectories, writes probe.csv");
  add_common(probe_cmd, probe_args);
  auto* verify_cmd = app.add_subcommand("verify", "Acceptance suite; nonzero exit on any failure");
  std::vector<int> only;
  verify_cmd->add_option("--only", only, "Criterion ids to run (default: all)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run_cmd) {
      const auto config = resolve(run_args);
      for (const auto& f : nonclip::run_experiment(config, config.output, run_args.jobs)) std::cout << f << '\n';
    } else if (*sweep_cmd) {
      const auto config = resolve(sweep_args);
      std::cout << nonclip::run_sweep(config, config.output, sweep_args.jobs) << '\n';
    } else if (*probe_cmd) {
      const auto config = resolve(probe_args);
      for (const auto& f : nonclip::run_probe(config, config.output, probe_args.jobs)) std::cout << f << '\n';
    } else if (*verify_cmd) {
      const auto results = nonclip::run_acceptance(only, &std::cout);
      std::size_t failed = 0;
      for (const auto& r : results) failed += !r.pass;
      std::cout << (failed ? "FAILED " : "OK ") << results.size() - failed << "/" << results.size() << '\n';
      return failed ? 1 : 0;
    }
  } catch (const nonclip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
