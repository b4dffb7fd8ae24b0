#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relopt/run_config.hpp"
#include "relopt/runs.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override the configured master seed");
  cmd->add_option("--threads", args.threads, "Cap engine-internal parallelism");
}

relopt::RunConfig load_config(const CommonArgs& args) {
  relopt::RunConfig config = relopt::RunConfig::load(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.threads) {
    if (*args.threads < 1) throw relopt::ConfigError("--threads must be >= 1");
    config.threads = *args.threads;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-assisted reliability-based design optimization toolkit"};
  app.require_subcommand(1);

  CommonArgs reliability_args, refine_args, ddo_args, rbdo_args, verify_args;
  CLI::App* reliability =
      app.add_subcommand("reliability", "Subset-simulation analysis of the true model");
  add_common(reliability, reliability_args);
  CLI::App* refine =
      app.add_subcommand("refine", "Adaptive surrogate refinement to the spread target");
  add_common(refine, refine_args);
  CLI::App* ddo = app.add_subcommand("ddo", "Deterministic design optimization");
  add_common(ddo, ddo_args);
  CLI::App* rbdo =
      app.add_subcommand("rbdo", "Reliability-based design optimization pipeline");
  add_common(rbdo, rbdo_args);
  CLI::App* verify =
      app.add_subcommand("verify", "Verify a design on the true limit states");
  add_common(verify, verify_args);

  CLI11_PARSE(app, argc, argv);

  const auto dispatch = [&](const CommonArgs& args,
                            void (*run)(const relopt::RunConfig&,
                                        const std::filesystem::path&)) {
    try {
      const relopt::RunConfig config = load_config(args);
      run(config, args.out_dir);
      return 0;
    } catch (const relopt::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  };

  if (reliability->parsed()) return dispatch(reliability_args, relopt::run_reliability);
  if (refine->parsed()) return dispatch(refine_args, relopt::run_refine);
  if (ddo->parsed()) return dispatch(ddo_args, relopt::run_ddo);
  if (rbdo->parsed()) return dispatch(rbdo_args, relopt::run_rbdo);
  if (verify->parsed()) return dispatch(verify_args, relopt::run_verify);
  return 1;
}
